// Copyright 2026 The sdslab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON dataset manifest. Paths are relative to the manifest's directory:
//
//   {
//     "categories": ["aero", ...],          // optional, default VOC
//     "records": [
//       {"id": "2008_000123", "semantic": "sem/2008_000123.png",
//        "saliency": "sal/2008_000123.png", "image": "img/2008_000123.png",
//        "split": "train"}
//     ]
//   }
//
// "image" and "split" are optional.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdslab/error.hpp"
#include "sdslab/io/png.hpp"
#include "sdslab/mask.hpp"

namespace sdslab::io {

enum class Split { Train, Test };

struct ManifestRecord {
  std::string id;
  std::string semantic;
  std::string saliency;
  std::string image;
  std::optional<Split> split;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<std::string> categories;  // empty: VOC
  std::vector<ManifestRecord> records;

  CategoryTaxonomy taxonomy() const {
    return categories.empty() ? CategoryTaxonomy::voc() : CategoryTaxonomy(categories);
  }

  std::filesystem::path resolve(const std::string& rel) const {
    const std::filesystem::path p(rel);
    return p.is_absolute() ? p : base_dir / p;
  }

  const ManifestRecord& find(const std::string& id) const {
    for (const auto& r : records) {
      if (r.id == id) return r;
    }
    throw DomainError("manifest: no record with id '" + id + "'");
  }

  DatasetManifest subset(Split s) const {
    DatasetManifest out{base_dir, categories, {}};
    for (const auto& r : records) {
      if (r.split == s) out.records.push_back(r);
    }
    return out;
  }
};

inline std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : m.records) {
    nlohmann::json j{{"id", r.id}, {"semantic", r.semantic}, {"saliency", r.saliency}};
    if (!r.image.empty()) j["image"] = r.image;
    if (r.split) j["split"] = to_string(*r.split);
    recs.push_back(std::move(j));
  }
  nlohmann::json out;
  if (!m.categories.empty()) out["categories"] = m.categories;
  out["records"] = std::move(recs);
  return out;
}

/// Parses and validates a manifest: ids unique, referenced files present.
inline DatasetManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                      bool check_files = true) {
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    if (j.contains("categories")) m.categories = j["categories"].get<std::vector<std::string>>();
    std::set<std::string> ids;
    for (const auto& jr : j.at("records")) {
      ManifestRecord r;
      r.id = jr.at("id").get<std::string>();
      r.semantic = jr.value("semantic", "");
      r.saliency = jr.value("saliency", "");
      r.image = jr.value("image", "");
      if (jr.contains("split")) {
        const auto s = jr["split"].get<std::string>();
        if (s == "train") {
          r.split = Split::Train;
        } else if (s == "test") {
          r.split = Split::Test;
        } else {
          throw DomainError("manifest: record '" + r.id + "' has unknown split '" + s + "'");
        }
      }
      if (!ids.insert(r.id).second) throw DomainError("manifest: duplicate id '" + r.id + "'");
      m.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("manifest: ") + e.what());
  }
  (void)m.taxonomy();  // validates category names
  if (check_files) {
    for (const auto& r : m.records) {
      for (const std::string* f : {&r.semantic, &r.saliency, &r.image}) {
        if (!f->empty() && !std::filesystem::exists(m.resolve(*f))) {
          throw IoError("manifest: record '" + r.id + "' references missing file " + m.resolve(*f).string());
        }
      }
    }
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

inline void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_text(path, to_json(m).dump(2) + "\n");
}

/// Seeded random train/test split: the first `train_count` records of a
/// shuffled order go to train, the rest to test.
inline void assign_split(DatasetManifest& m, std::uint64_t seed, std::size_t train_count) {
  detail::require(train_count <= m.records.size(), "assign_split: train count exceeds record count");
  std::vector<std::size_t> order(m.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < order.size(); ++k) {
    m.records[order[k]].split = k < train_count ? Split::Train : Split::Test;
  }
}

/// Pairs records of two manifests by id, in the order of `a`. Ids present in
/// only one of them are reported as an error.
inline std::vector<std::pair<const ManifestRecord*, const ManifestRecord*>> join_by_id(const DatasetManifest& a,
                                                                                      const DatasetManifest& b) {
  std::vector<std::pair<const ManifestRecord*, const ManifestRecord*>> out;
  std::vector<std::string> missing;
  std::set<std::string> matched;
  for (const auto& ra : a.records) {
    auto it = std::find_if(b.records.begin(), b.records.end(), [&](const ManifestRecord& rb) { return rb.id == ra.id; });
    if (it == b.records.end()) {
      missing.push_back(ra.id);
    } else {
      out.emplace_back(&ra, &*it);
      matched.insert(ra.id);
    }
  }
  for (const auto& rb : b.records) {
    if (!matched.count(rb.id)) missing.push_back(rb.id);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) list += ", ...";
    throw DomainError("manifests disagree on " + std::to_string(missing.size()) + " id(s): " + list);
  }
  return out;
}

}  // namespace sdslab::io
