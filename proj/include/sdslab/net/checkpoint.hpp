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

// Plain-text run configuration and parameter checkpoints.
//
// Config files hold one `key = value` per line; '#' starts a comment.
// A checkpoint is a pair of files: `<prefix>.bin` with the parameters as
// little-endian IEEE-754 doubles in layer order, and `<prefix>.json`
// describing the variant and the offset and shape of every layer.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdslab/error.hpp"
#include "sdslab/net/network.hpp"
#include "sdslab/net/train.hpp"

namespace sdslab::net {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in, const std::string& source = "config") {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw DomainError(source + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw DomainError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

inline KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_key_values(in, path.string());
}

/// Everything needed for one training or gradient-check run.
struct RunConfig {
  Variant variant = Variant::Branches;
  std::size_t num_categories = 3;
  std::size_t width = 16;
  std::size_t branch_depth = 2;
  std::size_t branch_width = 16;
  std::size_t image_size = 32;
  TrainHyper hyper;
  std::string manifest;  // empty: one synthetic scene

  VariantConfig variant_config() const {
    return VariantConfig::make(variant, num_categories, width, branch_depth, branch_width);
  }

  static RunConfig from(const KeyValues& kv) {
    RunConfig c;
    auto number = [&](const std::string& key, auto& out) {
      auto it = kv.find(key);
      if (it == kv.end()) return;
      std::istringstream is(it->second);
      is >> out;
      if (!is || !(is >> std::ws).eof()) {
        throw DomainError("config: bad value '" + it->second + "' for " + key);
      }
    };
    static const char* known[] = {"variant", "num_categories", "width", "branch_depth", "branch_width",
                                  "image_size", "lr", "steps", "seed", "manifest"};
    for (const auto& [k, v] : kv) {
      if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
        throw DomainError("config: unknown key '" + k + "'");
      }
    }
    if (auto it = kv.find("variant"); it != kv.end()) c.variant = parse_variant(it->second);
    number("num_categories", c.num_categories);
    number("width", c.width);
    number("branch_depth", c.branch_depth);
    number("branch_width", c.branch_width);
    number("image_size", c.image_size);
    number("lr", c.hyper.lr);
    number("steps", c.hyper.steps);
    number("seed", c.hyper.seed);
    if (auto it = kv.find("manifest"); it != kv.end()) c.manifest = it->second;
    detail::require(c.num_categories >= 1, "config: num_categories must be >= 1");
    detail::require(c.image_size > 0 && c.image_size % 8 == 0, "config: image_size must be a multiple of 8");
    return c;
  }
};

inline nlohmann::json checkpoint_manifest(const VariantConfig& cfg, const Parameters& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : params.slots()) {
    layers.push_back({{"name", s.name},
                      {"weight_offset", s.weight_offset},
                      {"weight_shape", {s.spec.out_ch, s.spec.in_ch, s.spec.kernel, s.spec.kernel}},
                      {"bias_offset", s.bias_offset},
                      {"bias_shape", {s.spec.out_ch}},
                      {"stride", s.spec.stride},
                      {"dilation", s.spec.dilation},
                      {"pad", s.spec.pad}});
  }
  return {{"format", "sdslab-checkpoint-1"},
          {"variant", to_string(cfg.variant)},
          {"num_sem_classes", cfg.num_sem_classes},
          {"num_sal_classes", cfg.num_sal_classes},
          {"count", params.size()},
          {"dtype", "float64-le"},
          {"layers", std::move(layers)}};
}

inline void save_checkpoint(const std::filesystem::path& prefix, const VariantConfig& cfg,
                            const Parameters& params) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian");
  const auto bin = std::filesystem::path(prefix.string() + ".bin");
  const auto meta = std::filesystem::path(prefix.string() + ".json");
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw IoError("cannot write " + bin.string());
  out.write(reinterpret_cast<const char*>(params.values().data()),
            std::streamsize(params.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + bin.string());
  std::ofstream js(meta);
  if (!js) throw IoError("cannot write " + meta.string());
  js << checkpoint_manifest(cfg, params).dump(2) << '\n';
}

/// Reads values written by save_checkpoint into a layout built from `cfg`;
/// the manifest must describe the same layout.
inline Parameters load_checkpoint(const std::filesystem::path& prefix, const VariantConfig& cfg) {
  const auto bin = std::filesystem::path(prefix.string() + ".bin");
  const auto meta = std::filesystem::path(prefix.string() + ".json");
  const Network net(cfg);
  Parameters p = net.zero_params();
  std::ifstream js(meta);
  if (!js) throw IoError("cannot open " + meta.string());
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(meta.string() + ": " + e.what());
  }
  if (manifest != checkpoint_manifest(cfg, p)) {
    throw DomainError(meta.string() + ": checkpoint layout does not match the configured variant");
  }
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw IoError("cannot open " + bin.string());
  in.read(reinterpret_cast<char*>(p.values().data()), std::streamsize(p.size() * sizeof(double)));
  if (in.gcount() != std::streamsize(p.size() * sizeof(double)) || in.peek() != EOF) {
    throw IoError(bin.string() + ": expected " + std::to_string(p.size()) + " doubles");
  }
  return p;
}

inline std::string loss_trace_csv(const std::vector<LossBreakdown>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "step,total,semantic,saliency,refined\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& l = trace[i];
    os << i << ',' << l.total() << ',' << l.semantic << ',' << l.saliency << ',';
    if (l.refined) os << *l.refined;
    os << '\n';
  }
  return os.str();
}

}  // namespace sdslab::net
