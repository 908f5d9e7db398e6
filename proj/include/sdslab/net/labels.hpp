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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/mask.hpp"

namespace sdslab::net {

/// Nearest-neighbour downsampling: each target pixel takes the top-left
/// sample of its source block. Labels are never interpolated.
template <typename Mask>
Mask downsample_labels(const Mask& m, std::size_t target_w, std::size_t target_h);

inline std::pair<std::size_t, std::size_t> label_block_factors(std::size_t w, std::size_t h, std::size_t tw,
                                                         std::size_t th) {
  if (tw == 0 || th == 0 || w % tw != 0 || h % th != 0) {
    throw DomainError("downsample_labels: " + std::to_string(w) + "x" + std::to_string(h) +
                      " is not an integral multiple of " + std::to_string(tw) + "x" + std::to_string(th));
  }
  return {w / tw, h / th};
}

template <>
inline LabelMask downsample_labels(const LabelMask& m, std::size_t tw, std::size_t th) {
  const auto [fx, fy] = label_block_factors(m.width(), m.height(), tw, th);
  std::vector<Label> out(tw * th);
  for (std::size_t y = 0; y < th; ++y) {
    for (std::size_t x = 0; x < tw; ++x) out[y * tw + x] = m.at(x * fx, y * fy);
  }
  return {tw, th, std::move(out), m.num_categories(), m.ignore_label()};
}

template <>
inline BinaryMask downsample_labels(const BinaryMask& m, std::size_t tw, std::size_t th) {
  const auto [fx, fy] = label_block_factors(m.width(), m.height(), tw, th);
  std::vector<std::uint8_t> out(tw * th);
  for (std::size_t y = 0; y < th; ++y) {
    for (std::size_t x = 0; x < tw; ++x) out[y * tw + x] = m.at(x * fx, y * fy) ? 1 : 0;
  }
  return {tw, th, std::move(out)};
}

/// Class indices for a batch of label maps, laid out (n, h, w).
struct DenseLabels {
  std::size_t n = 0, h = 0, w = 0;
  std::vector<std::size_t> labels;
  std::optional<std::size_t> ignore;

  static DenseLabels from(const LabelMask& m) {
    DenseLabels d{1, m.height(), m.width(), {}, std::nullopt};
    if (m.ignore_label()) d.ignore = *m.ignore_label();
    d.labels.assign(m.labels().begin(), m.labels().end());
    return d;
  }

  static DenseLabels from(const BinaryMask& m) {
    DenseLabels d{1, m.height(), m.width(), {}, std::nullopt};
    d.labels.assign(m.bits().begin(), m.bits().end());
    return d;
  }

  /// Stacks single-image label maps of equal size into one batch.
  static DenseLabels stack(const std::vector<DenseLabels>& parts) {
    detail::require(!parts.empty(), "DenseLabels::stack: empty batch");
    DenseLabels d{0, parts.front().h, parts.front().w, {}, parts.front().ignore};
    for (const auto& p : parts) {
      detail::require(p.h == d.h && p.w == d.w, "DenseLabels::stack: size mismatch");
      d.n += p.n;
      d.labels.insert(d.labels.end(), p.labels.begin(), p.labels.end());
    }
    return d;
  }
};

}  // namespace sdslab::net
