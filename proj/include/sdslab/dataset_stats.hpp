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

// Dataset-level aggregation of rank tables: how often each category appears,
// appears as salient, and at which rank; pairwise salient co-occurrence and
// precedence. All aggregates are integer counts that merge associatively;
// ratios are derived on demand.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/mask.hpp"
#include "sdslab/ranking.hpp"

namespace sdslab {

template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    detail::require(o.n_ == n_, "SquareMatrix: size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

struct AnnotatedMask {
  std::string image;
  LabelMask mask;
};

struct CategoryCounts {
  std::size_t overall = 0;
  std::size_t salient = 0;
  std::size_t salient_alone = 0;
  std::array<std::size_t, 3> rank_count{};  // rank 1, 2, 3

  double distrib() const { return overall ? double(salient) / double(overall) : 0.0; }

  /// Share of salient appearances at rank k (1-based).
  double rank_frac(std::size_t k) const {
    return salient ? double(rank_count.at(k - 1)) / double(salient) : 0.0;
  }

  /// Share of all appearances at rank k (1-based).
  double rank_frac_overall(std::size_t k) const {
    return overall ? double(rank_count.at(k - 1)) / double(overall) : 0.0;
  }

  CategoryCounts& operator+=(const CategoryCounts& o) {
    overall += o.overall;
    salient += o.salient;
    salient_alone += o.salient_alone;
    for (std::size_t k = 0; k < 3; ++k) rank_count[k] += o.rank_count[k];
    return *this;
  }

  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

/// Per-category counts, addressed by 1-based category index.
class CategoryDistribution {
 public:
  CategoryDistribution() = default;
  explicit CategoryDistribution(std::size_t num_categories) : counts_(num_categories) {}

  std::size_t num_categories() const { return counts_.size(); }
  std::size_t num_images() const { return images_; }

  const CategoryCounts& at(std::size_t category) const { return counts_.at(checked(category)); }
  CategoryCounts& at(std::size_t category) { return counts_.at(checked(category)); }

  void add_image() { ++images_; }

  CategoryDistribution& operator+=(const CategoryDistribution& o) {
    detail::require(o.counts_.size() == counts_.size(), "CategoryDistribution: size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    images_ += o.images_;
    return *this;
  }

  friend bool operator==(const CategoryDistribution&, const CategoryDistribution&) = default;

 private:
  std::size_t checked(std::size_t category) const {
    detail::require(category >= 1 && category <= counts_.size(),
                    "CategoryDistribution: category " + std::to_string(category) + " out of range");
    return category - 1;
  }

  std::vector<CategoryCounts> counts_;
  std::size_t images_ = 0;
};

/// Pairwise salient co-occurrence. Matrices are indexed by category - 1.
/// higher(a, b) counts images where a is ranked strictly above b outside a
/// tie group; tied(a, b) counts images where both share a tie group.
class CooccurrenceMatrix {
 public:
  CooccurrenceMatrix() = default;
  explicit CooccurrenceMatrix(std::size_t num_categories)
      : counts_(num_categories), higher_(num_categories), tied_(num_categories) {}

  std::size_t num_categories() const { return counts_.size(); }

  std::size_t count(std::size_t a, std::size_t b) const { return counts_(idx(a), idx(b)); }
  std::size_t higher(std::size_t a, std::size_t b) const { return higher_(idx(a), idx(b)); }
  std::size_t tied(std::size_t a, std::size_t b) const { return tied_(idx(a), idx(b)); }

  /// P(a ranked strictly above b | both salient); NaN where they never co-occur.
  double precedence(std::size_t a, std::size_t b) const {
    const std::size_t n = count(a, b);
    return n ? double(higher(a, b)) / double(n) : std::numeric_limits<double>::quiet_NaN();
  }

  SquareMatrix<double> precedence_matrix() const {
    const std::size_t n = num_categories();
    SquareMatrix<double> p(n);
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = 1; b <= n; ++b) p(a - 1, b - 1) = precedence(a, b);
    }
    return p;
  }

  const SquareMatrix<std::size_t>& counts() const { return counts_; }

  void add_image(const RankTable& t, double tie_epsilon) {
    std::vector<const RankEntry*> salient;
    for (const auto& e : t.entries) {
      if (e.ranked()) {
        detail::require(e.category >= 1 && e.category <= num_categories(),
                        "cooccurrence: category " + std::to_string(e.category) + " out of range");
        salient.push_back(&e);
      }
    }
    const auto groups = rank_ties(t.entries, tie_epsilon);
    auto group_of = [&](std::size_t category) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (std::find(groups[g].begin(), groups[g].end(), category) != groups[g].end()) return g;
      }
      return groups.size();
    };
    for (const RankEntry* a : salient) {
      for (const RankEntry* b : salient) {
        if (a == b) continue;
        const std::size_t ia = idx(a->category), ib = idx(b->category);
        ++counts_(ia, ib);
        if (group_of(a->category) == group_of(b->category)) {
          ++tied_(ia, ib);
        } else if (*a->rank_position < *b->rank_position) {
          ++higher_(ia, ib);
        }
      }
    }
  }

  CooccurrenceMatrix& operator+=(const CooccurrenceMatrix& o) {
    counts_ += o.counts_;
    higher_ += o.higher_;
    tied_ += o.tied_;
    return *this;
  }

  friend bool operator==(const CooccurrenceMatrix&, const CooccurrenceMatrix&) = default;

 private:
  std::size_t idx(std::size_t category) const {
    detail::require(category >= 1 && category <= num_categories(),
                    "CooccurrenceMatrix: category " + std::to_string(category) + " out of range");
    return category - 1;
  }

  SquareMatrix<std::size_t> counts_;
  SquareMatrix<std::size_t> higher_;
  SquareMatrix<std::size_t> tied_;
};

namespace detail {

inline void accumulate_image(CategoryDistribution& dist, const RankTable& table,
                             const std::vector<std::size_t>& present) {
  dist.add_image();
  for (std::size_t c : present) ++dist.at(c).overall;
  for (const auto& e : table.entries) {
    if (!e.ranked()) continue;
    auto& counts = dist.at(e.category);
    ++counts.salient;
    if (present.size() == 1 && present.front() == e.category) ++counts.salient_alone;
    if (*e.rank_position <= 3) ++counts.rank_count[*e.rank_position - 1];
  }
}

}  // namespace detail

/// Category distribution; presence comes from the semantic masks, which must
/// align with the tables by image id.
inline CategoryDistribution distribution(std::span<const RankTable> tables,
                                         std::span<const AnnotatedMask> sems,
                                         std::size_t num_categories) {
  detail::require(tables.size() == sems.size(), "distribution: " + std::to_string(tables.size()) +
                                                    " rank tables vs " + std::to_string(sems.size()) +
                                                    " semantic masks");
  CategoryDistribution dist(num_categories);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].image != sems[i].image) {
      throw DomainError("distribution: image id mismatch at position " + std::to_string(i) + " ('" +
                        tables[i].image + "' vs '" + sems[i].image + "')");
    }
    detail::require(sems[i].mask.num_categories() <= num_categories,
                    "distribution: mask '" + sems[i].image + "' has more categories than the taxonomy");
    detail::accumulate_image(dist, tables[i], present_categories(sems[i].mask));
  }
  return dist;
}

/// Same, with presence taken from the tables themselves (one entry per
/// category present in the semantic map).
inline CategoryDistribution distribution(std::span<const RankTable> tables, std::size_t num_categories) {
  CategoryDistribution dist(num_categories);
  for (const auto& t : tables) {
    std::vector<std::size_t> present;
    for (const auto& e : t.entries) present.push_back(e.category);
    std::sort(present.begin(), present.end());
    detail::accumulate_image(dist, t, present);
  }
  return dist;
}

inline CooccurrenceMatrix cooccurrence(std::span<const RankTable> tables, std::size_t num_categories,
                                       double tie_epsilon = RankConfig{}.tie_epsilon) {
  CooccurrenceMatrix m(num_categories);
  for (const auto& t : tables) m.add_image(t, tie_epsilon);
  return m;
}

struct CaseStudyRow {
  std::size_t category = 0;
  std::size_t count = 0;
  double focus_higher = 0.0;  // P(focus ranked above category)
  double other_higher = 0.0;  // P(category ranked above focus)
};

struct CaseStudy {
  std::size_t focus = 0;
  std::vector<CaseStudyRow> rows;
};

/// The k categories most often salient together with `focus`, by count
/// descending (ties by category index). Categories that never co-occur are
/// omitted, so the report may hold fewer than k rows.
inline CaseStudy case_study(const CooccurrenceMatrix& m, std::size_t focus, std::size_t k) {
  detail::require(focus >= 1 && focus <= m.num_categories(),
                  "case_study: focus category " + std::to_string(focus) + " out of range");
  CaseStudy report{focus, {}};
  for (std::size_t c = 1; c <= m.num_categories(); ++c) {
    if (c == focus || m.count(focus, c) == 0) continue;
    report.rows.push_back({c, m.count(focus, c), m.precedence(focus, c), m.precedence(c, focus)});
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const CaseStudyRow& a, const CaseStudyRow& b) { return a.count > b.count; });
  if (report.rows.size() > k) report.rows.resize(k);
  return report;
}

}  // namespace sdslab
