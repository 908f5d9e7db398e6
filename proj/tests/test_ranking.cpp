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

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sdslab/io/synthetic.hpp"
#include "sdslab/ranking.hpp"

namespace sdslab {
namespace {

std::vector<std::size_t> ranked_order(const RankTable& t) {
  std::vector<std::size_t> out;
  for (const auto& e : t.entries) {
    if (e.ranked()) out.push_back(e.category);
  }
  return out;
}

TEST(ValidOverlap, HalfCoverageIsKeptAtDefaultThreshold) {
  // 4x4 image, category occupies the top two rows (8 pixels), 4 of them lit.
  std::vector<std::uint8_t> bits(16, 0);
  std::vector<double> sal(16, 0.0);
  for (std::size_t i = 0; i < 8; ++i) bits[i] = 1;
  for (std::size_t i = 0; i < 4; ++i) sal[i] = 0.7;
  const BinaryMask mask(4, 4, bits);
  const SaliencyMap overlap = elementwise_product(SaliencyMap(4, 4, sal), mask);
  const ValidOverlap v = valid_overlap(overlap, mask, RankConfig{});
  EXPECT_DOUBLE_EQ(v.coverage, 0.5);
  EXPECT_TRUE(v.kept());

  sal[3] = 0.0;
  const ValidOverlap r = valid_overlap(elementwise_product(SaliencyMap(4, 4, sal), mask), mask, RankConfig{});
  EXPECT_DOUBLE_EQ(r.coverage, 3.0 / 8.0);
  EXPECT_FALSE(r.kept());
}

TEST(ValidOverlap, EmptyMaskThrows) {
  EXPECT_THROW(valid_overlap(SaliencyMap::uniform(2, 2, 0.5), BinaryMask::filled(2, 2, false), RankConfig{}),
               DomainError);
}

TEST(RankTies, NearlyEqualValuesFormOneGroup) {
  const std::vector<RankEntry> e{{1, 0.5, 1.0, 1}, {2, 0.5 + 1e-10, 1.0, 2}};
  const auto groups = rank_ties(e);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(std::set<std::size_t>(groups[0].begin(), groups[0].end()), (std::set<std::size_t>{1, 2}));
}

TEST(RankTies, ChainsAreTransitive) {
  const std::vector<RankEntry> e{{1, 0.5, 1.0, 1}, {2, 0.5 + 0.6e-9, 1.0, 2}, {3, 0.5 + 1.2e-9, 1.0, 3},
                                 {4, 0.4, 1.0, 4}, {5, 0.0, 0.2, std::nullopt}};
  const auto groups = rank_ties(e);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].size(), 3u);
  EXPECT_EQ(groups[1], (std::vector<std::size_t>{4}));
}

TEST(SemanticRank, ThreeCategoryExample) {
  // Row 0: cat 1 at 0.9; row 1: cat 2 at 0.4; row 2: cat 3 unlit.
  const LabelMask sem(3, 3, {1, 1, 1, 2, 2, 2, 3, 3, 3}, 3);
  const SaliencyMap sal(3, 3, {0.9, 0.8, 0.9, 0.4, 0.4, 0.3, 0, 0, 0});
  const RankTable t = semantic_rank(sem, sal, {}, "x");
  EXPECT_EQ(t.image, "x");
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(ranked_order(t), (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(t.find(1)->rank_value, 0.9);
  EXPECT_EQ(*t.find(2)->rank_position, 2u);
  EXPECT_FALSE(t.find(3)->ranked());
  EXPECT_EQ(t.find(3)->rank_value, 0.0);
  EXPECT_EQ(t.num_ranked(), 2u);
}

TEST(SemanticRank, UnattributedSalientPixelsAreCounted) {
  const LabelMask sem(4, 1, {0, 1, 255, 0}, 1, Label(255));
  const SaliencyMap sal(4, 1, {0.5, 0.5, 0.5, 0.0});
  const RankTable t = semantic_rank(sem, sal);
  EXPECT_EQ(t.unattributed_salient_pixels, 2u);
}

TEST(SemanticRank, TiesBrokenByCoverageThenCategory) {
  // Categories 1 and 2 share the peak; 2 is fully covered, 1 only half.
  const LabelMask sem(4, 2, {1, 1, 2, 2, 3, 3, 0, 0}, 3);
  const SaliencyMap sal(4, 2, {0.6, 0.0, 0.6, 0.6, 0.6, 0.6, 0, 0});
  const RankTable t = semantic_rank(sem, sal);
  EXPECT_EQ(ranked_order(t), (std::vector<std::size_t>{2, 3, 1}));
}

TEST(SemanticRank, DimensionMismatchThrows) {
  EXPECT_THROW(semantic_rank(LabelMask::uniform(2, 2, 1, 1), SaliencyMap::uniform(3, 2, 0.5)), DomainError);
}

TEST(SemanticRank, InvalidThresholdThrows) {
  RankConfig cfg;
  cfg.coverage_threshold = 1.5;
  EXPECT_THROW(semantic_rank(LabelMask::uniform(2, 2, 1, 1), SaliencyMap::uniform(2, 2, 0.5), cfg), DomainError);
}

TEST(SemanticRank, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_real_distribution<double> tau(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t w = dim(rng), h = dim(rng);
    const LabelMask sem = oracle::random_label_mask(rng, w, h, 4);
    const SaliencyMap sal = oracle::random_saliency(rng, w, h, 0.4);
    RankConfig cfg;
    cfg.coverage_threshold = tau(rng);
    const RankTable t = semantic_rank(sem, sal, cfg);
    const auto expect = oracle::brute_rank(sem, sal, cfg.coverage_threshold);
    ASSERT_EQ(t.entries.size(), expect.size());
    for (const auto& o : expect) {
      const RankEntry* e = t.find(o.category);
      ASSERT_NE(e, nullptr);
      EXPECT_EQ(e->ranked(), o.ranked);
      EXPECT_EQ(e->rank_value, o.value);
      EXPECT_DOUBLE_EQ(e->coverage, o.coverage);
    }
    EXPECT_EQ(ranked_order(t), oracle::brute_order(expect));
  }
}

TEST(SemanticRank, ThresholdMonotonicity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelMask sem = oracle::random_label_mask(rng, 6, 6, 5);
    const SaliencyMap sal = oracle::random_saliency(rng, 6, 6, 0.5);
    std::set<std::size_t> previous;
    bool first = true;
    for (double tau : {0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0}) {
      RankConfig cfg;
      cfg.coverage_threshold = tau;
      const auto order = ranked_order(semantic_rank(sem, sal, cfg));
      const std::set<std::size_t> now(order.begin(), order.end());
      if (!first) {
        EXPECT_TRUE(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
      }
      previous = now;
      first = false;
    }
  }
}

TEST(SemanticRank, ScalingSaliencyPreservesOrder) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> scale(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelMask sem = oracle::random_label_mask(rng, 7, 5, 6);
    const SaliencyMap sal = oracle::random_saliency(rng, 7, 5, 0.3);
    const double s = scale(rng);
    std::vector<double> scaled(sal.values().begin(), sal.values().end());
    for (double& v : scaled) v *= s;
    EXPECT_EQ(ranked_order(semantic_rank(sem, sal)), ranked_order(semantic_rank(sem, SaliencyMap(7, 5, scaled))));
  }
}

TEST(SemanticRank, CategoryPermutationInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 6;
    const LabelMask sem = oracle::random_label_mask(rng, 6, 6, c);
    const SaliencyMap sal = oracle::random_saliency(rng, 6, 6, 0.3);
    std::vector<Label> perm(c + 1);
    std::iota(perm.begin(), perm.end(), Label(0));
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    std::vector<Label> relabeled;
    for (Label l : sem.labels()) relabeled.push_back(perm[l]);
    const auto a = ranked_order(semantic_rank(sem, sal));
    const auto b = ranked_order(semantic_rank(LabelMask(6, 6, relabeled, c), sal));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(perm[a[i]], b[i]);
  }
}

TEST(SemanticRank, PlantedScenesAreRecovered) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto spec = io::random_scene_spec(24, 24, 8, 2, 6, seed);
    const auto scene = io::generate_synthetic(spec, {}, "s");
    EXPECT_EQ(semantic_rank(scene.semantic, scene.saliency, {}, "s"), scene.expected) << "seed " << seed;
  }
}

TEST(SemanticRank, JsonRoundTrip) {
  const LabelMask sem(3, 1, {1, 2, 0}, 2);
  const SaliencyMap sal(3, 1, {0.25, 0.5, 0.125});
  const RankTable t = semantic_rank(sem, sal, {}, "img");
  const auto j = to_json(t, CategoryTaxonomy::numbered(2));
  EXPECT_EQ(j["entries"][0]["name"], "c2");
  EXPECT_EQ(rank_table_from_json(j), t);
  EXPECT_THROW(rank_table_from_json(nlohmann::json::object()), DomainError);
}

}  // namespace
}  // namespace sdslab
