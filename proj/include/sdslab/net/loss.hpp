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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "sdslab/error.hpp"
#include "sdslab/net/labels.hpp"
#include "sdslab/net/tensor.hpp"

namespace sdslab::net {

struct LossWithGrad {
  double loss = 0.0;
  Tensor4 grad;  // d loss / d logits
};

/// Pixel-wise softmax cross-entropy averaged over all non-ignored pixels.
inline LossWithGrad cross_entropy_loss(const Tensor4& logits, const DenseLabels& gt) {
  const Shape4& s = logits.shape();
  if (s.n != gt.n || s.h != gt.h || s.w != gt.w) {
    throw DomainError("cross_entropy_loss: logits " + s.str() + " vs labels (" + std::to_string(gt.n) + "," +
                      std::to_string(gt.h) + "," + std::to_string(gt.w) + ")");
  }
  LossWithGrad out{0.0, Tensor4(s)};
  std::size_t counted = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const std::size_t l = gt.labels[i];
    if (gt.ignore && l == *gt.ignore) continue;
    if (l >= s.c) {
      throw DomainError("cross_entropy_loss: label " + std::to_string(l) + " outside [0, " +
                        std::to_string(s.c - 1) + "]");
    }
    ++counted;
  }
  if (counted == 0) return out;

  const double inv = 1.0 / double(counted);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        const std::size_t l = gt.labels[(n * s.h + y) * s.w + x];
        if (gt.ignore && l == *gt.ignore) continue;
        double peak = logits.at(n, 0, y, x);
        for (std::size_t c = 1; c < s.c; ++c) peak = std::max(peak, logits.at(n, c, y, x));
        double z = 0.0;
        for (std::size_t c = 0; c < s.c; ++c) z += std::exp(logits.at(n, c, y, x) - peak);
        const double log_z = std::log(z) + peak;
        out.loss += (log_z - logits.at(n, l, y, x)) * inv;
        for (std::size_t c = 0; c < s.c; ++c) {
          const double p = std::exp(logits.at(n, c, y, x) - log_z);
          out.grad.at(n, c, y, x) = (p - (c == l ? 1.0 : 0.0)) * inv;
        }
      }
    }
  }
  return out;
}

}  // namespace sdslab::net
