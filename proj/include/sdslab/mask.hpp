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

// Raster types shared by every module. All rasters are row-major with the
// origin at the top-left pixel.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sdslab/error.hpp"

namespace sdslab {

using Label = std::uint8_t;

/// Per-pixel semantic category indices. 0 is background, 1..C foreground.
/// An optional ignore label (VOC "void") may appear in addition to [0, C].
class LabelMask {
 public:
  LabelMask() = default;

  LabelMask(std::size_t width, std::size_t height, std::vector<Label> labels,
            std::size_t num_categories,
            std::optional<Label> ignore_label = std::nullopt)
      : width_(width),
        height_(height),
        num_categories_(num_categories),
        ignore_label_(ignore_label),
        labels_(std::move(labels)) {
    detail::require(labels_.size() == width_ * height_,
                    "LabelMask: label count " + std::to_string(labels_.size()) +
                        " does not match " + std::to_string(width_) + "x" +
                        std::to_string(height_));
    detail::require(num_categories_ <= 254, "LabelMask: too many categories");
    if (ignore_label_) {
      detail::require(*ignore_label_ > num_categories_,
                      "LabelMask: ignore label collides with a category index");
    }
    for (Label l : labels_) {
      if (l > num_categories_ && !(ignore_label_ && l == *ignore_label_)) {
        throw DomainError("LabelMask: label " + std::to_string(l) +
                          " outside [0, " + std::to_string(num_categories_) +
                          "]");
      }
    }
  }

  static LabelMask uniform(std::size_t width, std::size_t height, Label value,
                           std::size_t num_categories) {
    return {width, height, std::vector<Label>(width * height, value),
            num_categories};
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t num_categories() const { return num_categories_; }
  std::optional<Label> ignore_label() const { return ignore_label_; }
  std::span<const Label> labels() const { return labels_; }

  Label operator[](std::size_t i) const { return labels_[i]; }
  Label at(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }

  bool is_ignored(std::size_t i) const {
    return ignore_label_ && labels_[i] == *ignore_label_;
  }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t num_categories_ = 0;
  std::optional<Label> ignore_label_;
  std::vector<Label> labels_;
};

/// Per-pixel saliency in [0, 1]. Out-of-range input is rejected, never clamped.
class SaliencyMap {
 public:
  SaliencyMap() = default;

  SaliencyMap(std::size_t width, std::size_t height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    detail::require(values_.size() == width_ * height_,
                    "SaliencyMap: value count does not match dimensions");
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("SaliencyMap: value " + std::to_string(v) +
                          " outside [0, 1]");
      }
    }
  }

  static SaliencyMap uniform(std::size_t width, std::size_t height, double v) {
    return {width, height, std::vector<double>(width * height, v)};
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }

  double max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
  }

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

class BinaryMask {
 public:
  BinaryMask() = default;

  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    detail::require(bits_.size() == width_ * height_,
                    "BinaryMask: bit count does not match dimensions");
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  BinaryMask(std::size_t width, std::size_t height, std::initializer_list<bool> bits)
      : BinaryMask(width, height, std::vector<std::uint8_t>(bits.begin(), bits.end())) {}

  static BinaryMask filled(std::size_t width, std::size_t height, bool value) {
    return {width, height, std::vector<std::uint8_t>(width * height, value ? 1 : 0)};
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return bits_.size(); }
  std::span<const std::uint8_t> bits() const { return bits_; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Ordered category names; index 0 is always background.
class CategoryTaxonomy {
 public:
  explicit CategoryTaxonomy(std::vector<std::string> names) : names_(std::move(names)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
      detail::require(seen.insert(n).second, "CategoryTaxonomy: duplicate name '" + n + "'");
      detail::require(n != "background", "CategoryTaxonomy: 'background' is reserved");
    }
  }

  /// The 20 PASCAL VOC categories in VOC index order.
  static CategoryTaxonomy voc() {
    return CategoryTaxonomy({"aero", "bike", "bird", "boat", "bottle", "bus", "car",
                             "cat", "chair", "cow", "table", "dog", "horse", "mbike",
                             "person", "plant", "sheep", "sofa", "train", "tv"});
  }

  /// Generic names "c1".."cN", used for synthetic data.
  static CategoryTaxonomy numbered(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n; ++i) names.push_back("c" + std::to_string(i));
    return CategoryTaxonomy(std::move(names));
  }

  static constexpr std::size_t background_index = 0;

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::string name(std::size_t category) const {
    if (category == background_index) return "background";
    detail::require(category <= names_.size(),
                    "CategoryTaxonomy: no category " + std::to_string(category));
    return names_[category - 1];
  }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i + 1;
    }
    throw DomainError("CategoryTaxonomy: unknown category '" + std::string(name) + "'");
  }

 private:
  std::vector<std::string> names_;
};

namespace detail {

template <typename A, typename B>
void require_same_dims(const A& a, const B& b, const char* where) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DomainError(std::string(where) + ": dimension mismatch (" +
                      std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                      " vs " + std::to_string(b.width()) + "x" +
                      std::to_string(b.height()) + ")");
  }
}

}  // namespace detail

inline BinaryMask category_mask(const LabelMask& m, std::size_t category) {
  detail::require(category >= 1 && category <= m.num_categories(),
                  "category_mask: category " + std::to_string(category) +
                      " outside [1, " + std::to_string(m.num_categories()) + "]");
  std::vector<std::uint8_t> bits(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) bits[i] = m[i] == category ? 1 : 0;
  return {m.width(), m.height(), std::move(bits)};
}

inline BinaryMask background_mask(const LabelMask& m) {
  std::vector<std::uint8_t> bits(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) bits[i] = m[i] == 0 ? 1 : 0;
  return {m.width(), m.height(), std::move(bits)};
}

/// Saliency restricted to the mask: f where b is set, 0 elsewhere.
inline SaliencyMap elementwise_product(const SaliencyMap& f, const BinaryMask& b) {
  detail::require_same_dims(f, b, "elementwise_product");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = b[i] ? f[i] : 0.0;
  return {f.width(), f.height(), std::move(out)};
}

inline std::size_t area(const BinaryMask& b) {
  return static_cast<std::size_t>(std::count(b.bits().begin(), b.bits().end(), 1));
}

/// Foreground categories that occur at least once, ascending.
inline std::vector<std::size_t> present_categories(const LabelMask& m) {
  std::vector<bool> seen(m.num_categories() + 1, false);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.is_ignored(i)) seen[m[i]] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 1; c <= m.num_categories(); ++c) {
    if (seen[c]) out.push_back(c);
  }
  return out;
}

}  // namespace sdslab
