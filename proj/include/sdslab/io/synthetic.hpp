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

// Synthetic scenes with planted category regions and saliency levels, whose
// expected rank table is known from the plan rather than from the pixels.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdslab/error.hpp"
#include "sdslab/io/masks.hpp"
#include "sdslab/mask.hpp"
#include "sdslab/net/tensor.hpp"
#include "sdslab/net/train.hpp"
#include "sdslab/ranking.hpp"

namespace sdslab::io {

struct PlantedRegion {
  std::size_t category = 1;
  std::size_t x = 0, y = 0, w = 1, h = 1;
  double saliency_level = 1.0;  // (0, 1]
  double coverage = 1.0;        // share of the region's pixels carrying the level
};

struct SyntheticSceneSpec {
  std::size_t width = 32;
  std::size_t height = 32;
  std::size_t num_categories = 3;
  std::vector<PlantedRegion> regions;
  std::uint64_t seed = 0;
  bool allow_ties = false;

  void validate() const {
    detail::require(width > 0 && height > 0, "SyntheticSceneSpec: empty canvas");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto& r = regions[i];
      const std::string who = "SyntheticSceneSpec: region " + std::to_string(i);
      detail::require(r.category >= 1 && r.category <= num_categories, who + " has an invalid category");
      detail::require(r.w > 0 && r.h > 0 && r.x + r.w <= width && r.y + r.h <= height,
                      who + " does not fit the canvas");
      detail::require(r.saliency_level > 0.0 && r.saliency_level <= 1.0, who + " saliency level outside (0, 1]");
      detail::require(r.coverage >= 0.0 && r.coverage <= 1.0, who + " coverage outside [0, 1]");
      for (std::size_t j = 0; j < i; ++j) {
        const auto& o = regions[j];
        const bool overlap = r.x < o.x + o.w && o.x < r.x + r.w && r.y < o.y + o.h && o.y < r.y + r.h;
        detail::require(!overlap, who + " overlaps region " + std::to_string(j));
        detail::require(r.category != o.category, who + " repeats the category of region " + std::to_string(j));
        detail::require(allow_ties || r.saliency_level != o.saliency_level,
                        who + " repeats a saliency level without allow_ties");
      }
    }
  }
};

struct SyntheticScene {
  LabelMask semantic;
  SaliencyMap saliency;
  RankTable expected;
};

inline SyntheticScene generate_synthetic(const SyntheticSceneSpec& spec, const RankConfig& cfg = {},
                                         std::string image_id = {}) {
  spec.validate();
  cfg.validate();
  const std::size_t n = spec.width * spec.height;
  std::vector<Label> labels(n, 0);
  std::vector<double> sal(n, 0.0);
  std::vector<RankEntry> ranked, absent;
  std::mt19937_64 rng(spec.seed);
  for (const auto& r : spec.regions) {
    std::vector<std::size_t> pixels;
    for (std::size_t y = r.y; y < r.y + r.h; ++y) {
      for (std::size_t x = r.x; x < r.x + r.w; ++x) {
        pixels.push_back(y * spec.width + x);
        labels[y * spec.width + x] = Label(r.category);
      }
    }
    std::size_t lit = std::size_t(std::llround(r.coverage * double(pixels.size())));
    if (r.coverage > 0.0) lit = std::max<std::size_t>(lit, 1);
    if (lit < pixels.size()) std::shuffle(pixels.begin(), pixels.end(), rng);
    for (std::size_t k = 0; k < lit; ++k) sal[pixels[k]] = r.saliency_level;

    const double coverage = double(lit) / double(pixels.size());
    RankEntry e{r.category, 0.0, coverage, std::nullopt};
    if (lit > 0 && coverage >= cfg.coverage_threshold && r.saliency_level > cfg.saliency_floor) {
      e.rank_value = r.saliency_level;
      ranked.push_back(e);
    } else {
      absent.push_back(e);
    }
  }
  // Planted levels are exact, so ties are exact equalities.
  std::sort(ranked.begin(), ranked.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.rank_value != b.rank_value) return a.rank_value > b.rank_value;
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.category < b.category;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank_position = i + 1;
  std::sort(absent.begin(), absent.end(), [](const RankEntry& a, const RankEntry& b) { return a.category < b.category; });

  SyntheticScene scene{LabelMask(spec.width, spec.height, std::move(labels), spec.num_categories),
                       SaliencyMap(spec.width, spec.height, std::move(sal)), RankTable{}};
  scene.expected.image = std::move(image_id);
  scene.expected.entries = std::move(ranked);
  scene.expected.entries.insert(scene.expected.entries.end(), absent.begin(), absent.end());
  return scene;
}

/// Random scene: between min_regions and max_regions rectangles on a 3x3
/// grid of cells (one region per cell), distinct categories and distinct
/// saliency levels that are exact multiples of 1/255.
inline SyntheticSceneSpec random_scene_spec(std::size_t width, std::size_t height, std::size_t num_categories,
                                            std::size_t min_regions, std::size_t max_regions, std::uint64_t seed) {
  detail::require(min_regions <= max_regions && max_regions <= 9, "random_scene_spec: at most 9 regions");
  detail::require(max_regions <= num_categories, "random_scene_spec: not enough categories for distinct regions");
  detail::require(width >= 6 && height >= 6, "random_scene_spec: canvas too small");
  std::mt19937_64 rng(seed);
  SyntheticSceneSpec spec{width, height, num_categories, {}, seed, false};
  const std::size_t count = std::uniform_int_distribution<std::size_t>(min_regions, max_regions)(rng);

  std::vector<std::size_t> cells(9), cats(num_categories), levels(230);
  std::iota(cells.begin(), cells.end(), 0);
  std::iota(cats.begin(), cats.end(), 1);
  std::iota(levels.begin(), levels.end(), 26);
  std::shuffle(cells.begin(), cells.end(), rng);
  std::shuffle(cats.begin(), cats.end(), rng);
  std::shuffle(levels.begin(), levels.end(), rng);

  const std::size_t cw = width / 3, ch = height / 3;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cx = (cells[i] % 3) * cw, cy = (cells[i] / 3) * ch;
    const std::size_t w = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(1, cw / 2), cw)(rng);
    const std::size_t h = std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(1, ch / 2), ch)(rng);
    const std::size_t x = cx + std::uniform_int_distribution<std::size_t>(0, cw - w)(rng);
    const std::size_t y = cy + std::uniform_int_distribution<std::size_t>(0, ch - h)(rng);
    spec.regions.push_back({cats[i], x, y, w, h, double(levels[i]) / 255.0, 1.0});
  }
  return spec;
}

/// Colour image for a scene: a fixed colour per category plus Gaussian noise.
inline net::Tensor4 render_image(const LabelMask& sem, std::uint64_t seed, double noise = 0.05) {
  const std::size_t plane = sem.size();
  net::Tensor4 img({1, 3, sem.height(), sem.width()});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, noise);
  for (std::size_t i = 0; i < plane; ++i) {
    const unsigned c = sem[i];
    const double base[3] = {0.15 + 0.7 * double((c * 37u) % 11u) / 10.0, 0.15 + 0.7 * double((c * 53u) % 7u) / 6.0,
                            0.15 + 0.7 * double((c * 29u) % 5u) / 4.0};
    for (std::size_t k = 0; k < 3; ++k) img[k * plane + i] = std::clamp(base[k] + jitter(rng), 0.0, 1.0);
  }
  return img;
}

/// One synthetic training sample of the given size.
inline net::TrainingSample synthetic_sample(std::size_t size, std::size_t num_categories, std::uint64_t seed) {
  const std::size_t regions = std::min<std::size_t>(num_categories, 9);
  const auto spec = random_scene_spec(size, size, num_categories, regions, regions, seed);
  auto scene = generate_synthetic(spec);
  return {render_image(scene.semantic, seed), scene.semantic, binarize(scene.saliency)};
}

inline nlohmann::json to_json(const SyntheticSceneSpec& s) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : s.regions) {
    regions.push_back({{"category", r.category},
                       {"x", r.x},
                       {"y", r.y},
                       {"w", r.w},
                       {"h", r.h},
                       {"saliency_level", r.saliency_level},
                       {"coverage", r.coverage}});
  }
  return {{"width", s.width},     {"height", s.height}, {"num_categories", s.num_categories},
          {"regions", regions}, {"seed", s.seed},     {"allow_ties", s.allow_ties}};
}

inline SyntheticSceneSpec scene_spec_from_json(const nlohmann::json& j) {
  try {
    SyntheticSceneSpec s;
    s.width = j.at("width").get<std::size_t>();
    s.height = j.at("height").get<std::size_t>();
    s.num_categories = j.at("num_categories").get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.allow_ties = j.value("allow_ties", false);
    for (const auto& jr : j.at("regions")) {
      PlantedRegion r;
      r.category = jr.at("category").get<std::size_t>();
      r.x = jr.at("x").get<std::size_t>();
      r.y = jr.at("y").get<std::size_t>();
      r.w = jr.at("w").get<std::size_t>();
      r.h = jr.at("h").get<std::size_t>();
      r.saliency_level = jr.at("saliency_level").get<double>();
      r.coverage = jr.value("coverage", 1.0);
      s.regions.push_back(r);
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("scene spec: ") + e.what());
  }
}

}  // namespace sdslab::io
