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

// Relative saliency rank of the semantic categories present in one image.
//
// For every category the saliency map is masked by the category region. The
// masked map is kept only when enough of the region carries saliency
// (coverage >= tau); a kept category is scored by the maximum saliency inside
// its region, and categories are ordered by that score.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdslab/error.hpp"
#include "sdslab/mask.hpp"

namespace sdslab {

struct RankConfig {
  double coverage_threshold = 0.5;  // tau
  double saliency_floor = 0.0;
  double tie_epsilon = 1e-9;

  void validate() const {
    detail::require(coverage_threshold >= 0.0 && coverage_threshold <= 1.0,
                    "RankConfig: coverage threshold must lie in [0, 1]");
    detail::require(tie_epsilon >= 0.0, "RankConfig: tie epsilon must be >= 0");
  }
};

struct RankEntry {
  std::size_t category = 0;
  double rank_value = 0.0;
  double coverage = 0.0;
  std::optional<std::size_t> rank_position;  // nullopt == ABSENT

  bool ranked() const { return rank_position.has_value(); }
  friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

/// Entries are ordered by rank position; absent entries follow in category order.
struct RankTable {
  std::string image;
  std::vector<RankEntry> entries;
  // Salient pixels (saliency > floor) that fall on background or void.
  std::size_t unattributed_salient_pixels = 0;

  const RankEntry* find(std::size_t category) const {
    for (const auto& e : entries) {
      if (e.category == category) return &e;
    }
    return nullptr;
  }

  std::size_t num_ranked() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const RankEntry& e) { return e.ranked(); }));
  }

  friend bool operator==(const RankTable&, const RankTable&) = default;
};

struct ValidOverlap {
  std::optional<SaliencyMap> overlap;  // nullopt == rejected
  double coverage = 0.0;

  bool kept() const { return overlap.has_value(); }
};

inline ValidOverlap valid_overlap(const SaliencyMap& overlap, const BinaryMask& cat_mask,
                                  const RankConfig& cfg) {
  detail::require_same_dims(overlap, cat_mask, "valid_overlap");
  const std::size_t mask_area = area(cat_mask);
  detail::require(mask_area > 0, "valid_overlap: empty category mask");
  std::size_t covered = 0;
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    if (cat_mask[i] && overlap[i] > cfg.saliency_floor) ++covered;
  }
  ValidOverlap out;
  out.coverage = static_cast<double>(covered) / static_cast<double>(mask_area);
  if (out.coverage >= cfg.coverage_threshold) out.overlap = overlap;
  return out;
}

namespace detail {

// Single-linkage grouping of values sorted in descending order: neighbours
// closer than eps share a group. Returns the group id per position.
inline std::vector<std::size_t> chain_groups(const std::vector<double>& sorted_desc, double eps) {
  std::vector<std::size_t> group(sorted_desc.size(), 0);
  for (std::size_t i = 1; i < sorted_desc.size(); ++i) {
    group[i] = group[i - 1] + (sorted_desc[i - 1] - sorted_desc[i] <= eps ? 0 : 1);
  }
  return group;
}

}  // namespace detail

inline RankTable semantic_rank(const LabelMask& sem, const SaliencyMap& sal,
                               const RankConfig& cfg = {}, std::string image_id = {}) {
  cfg.validate();
  detail::require_same_dims(sem, sal, "semantic_rank");

  RankTable table;
  table.image = std::move(image_id);
  for (std::size_t i = 0; i < sem.size(); ++i) {
    if ((sem[i] == 0 || sem.is_ignored(i)) && sal[i] > cfg.saliency_floor) {
      ++table.unattributed_salient_pixels;
    }
  }

  std::vector<RankEntry> ranked;
  std::vector<RankEntry> absent;
  for (std::size_t c : present_categories(sem)) {
    const BinaryMask mask = category_mask(sem, c);
    const ValidOverlap valid = valid_overlap(elementwise_product(sal, mask), mask, cfg);
    RankEntry e{c, 0.0, valid.coverage, std::nullopt};
    const double peak = valid.kept() ? valid.overlap->max() : 0.0;
    if (valid.kept() && peak > cfg.saliency_floor) {
      e.rank_value = peak;
      ranked.push_back(e);
    } else {
      absent.push_back(e);
    }
  }

  // Order by value; within an epsilon-tie group prefer larger coverage, then
  // the lower category index, so positions are reproducible.
  std::sort(ranked.begin(), ranked.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.rank_value != b.rank_value) return a.rank_value > b.rank_value;
    return a.category < b.category;
  });
  std::vector<double> values;
  for (const auto& e : ranked) values.push_back(e.rank_value);
  const auto group = detail::chain_groups(values, cfg.tie_epsilon);
  for (std::size_t lo = 0; lo < ranked.size();) {
    std::size_t hi = lo + 1;
    while (hi < ranked.size() && group[hi] == group[lo]) ++hi;
    std::sort(ranked.begin() + static_cast<std::ptrdiff_t>(lo),
              ranked.begin() + static_cast<std::ptrdiff_t>(hi),
              [](const RankEntry& a, const RankEntry& b) {
                if (a.coverage != b.coverage) return a.coverage > b.coverage;
                return a.category < b.category;
              });
    lo = hi;
  }
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank_position = i + 1;

  table.entries = std::move(ranked);
  table.entries.insert(table.entries.end(), absent.begin(), absent.end());
  return table;
}

/// Groups of ranked entries whose rank values lie within tie_epsilon of a
/// neighbour, listed by descending value. Absent entries belong to no group.
inline std::vector<std::vector<std::size_t>> rank_ties(const std::vector<RankEntry>& entries,
                                                       double tie_epsilon = RankConfig{}.tie_epsilon) {
  std::vector<RankEntry> ranked;
  for (const auto& e : entries) {
    if (e.ranked()) ranked.push_back(e);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankEntry& a, const RankEntry& b) {
    return a.rank_value > b.rank_value;
  });
  std::vector<double> values;
  for (const auto& e : ranked) values.push_back(e.rank_value);
  const auto group = detail::chain_groups(values, tie_epsilon);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i == 0 || group[i] != group[i - 1]) out.emplace_back();
    out.back().push_back(ranked[i].category);
  }
  return out;
}

inline nlohmann::json to_json(const RankTable& t, const CategoryTaxonomy& taxonomy) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : t.entries) {
    nlohmann::json j;
    j["category"] = e.category;
    j["name"] = taxonomy.name(e.category);
    j["rank_value"] = e.rank_value;
    j["coverage"] = e.coverage;
    j["rank_position"] = e.rank_position ? nlohmann::json(*e.rank_position) : nlohmann::json(nullptr);
    entries.push_back(std::move(j));
  }
  return {{"image", t.image},
          {"entries", std::move(entries)},
          {"unattributed_salient_pixels", t.unattributed_salient_pixels}};
}

inline RankTable rank_table_from_json(const nlohmann::json& j) {
  try {
    RankTable t;
    t.image = j.at("image").get<std::string>();
    for (const auto& je : j.at("entries")) {
      RankEntry e;
      e.category = je.at("category").get<std::size_t>();
      e.rank_value = je.at("rank_value").get<double>();
      e.coverage = je.at("coverage").get<double>();
      if (!je.at("rank_position").is_null()) e.rank_position = je.at("rank_position").get<std::size_t>();
      t.entries.push_back(e);
    }
    if (j.contains("unattributed_salient_pixels")) {
      t.unattributed_salient_pixels = j["unattributed_salient_pixels"].get<std::size_t>();
    }
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw DomainError(std::string("RankTable JSON: ") + ex.what());
  }
}

}  // namespace sdslab
