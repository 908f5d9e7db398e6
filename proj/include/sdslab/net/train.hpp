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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/mask.hpp"
#include "sdslab/net/labels.hpp"
#include "sdslab/net/network.hpp"

namespace sdslab::net {

/// One training image with its full-resolution ground truth.
struct TrainingSample {
  Tensor4 image;  // (1, C_in, H, W)
  LabelMask semantic;
  BinaryMask saliency;
};

/// A dataset stacked into one batch, labels already at logit resolution.
struct Batch {
  Tensor4 images;
  DenseLabels semantic;
  DenseLabels saliency;
};

inline Batch make_batch(const std::vector<TrainingSample>& samples) {
  detail::require(!samples.empty(), "make_batch: empty dataset");
  const Shape4 first = samples.front().image.shape();
  Shape4 shape = first;
  shape.n = 0;
  std::vector<double> data;
  std::vector<DenseLabels> sem, sal;
  for (const auto& s : samples) {
    const Shape4& is = s.image.shape();
    detail::require(is.n == 1 && is.c == first.c && is.h == first.h && is.w == first.w,
                    "make_batch: all images must be (1," + std::to_string(first.c) + "," +
                        std::to_string(first.h) + "," + std::to_string(first.w) + ")");
    detail::require(s.semantic.width() == is.w && s.semantic.height() == is.h &&
                        s.saliency.width() == is.w && s.saliency.height() == is.h,
                    "make_batch: ground truth size differs from image size");
    detail::require(is.h % 8 == 0 && is.w % 8 == 0, "make_batch: image size must be divisible by 8");
    ++shape.n;
    data.insert(data.end(), s.image.data().begin(), s.image.data().end());
    sem.push_back(DenseLabels::from(downsample_labels(s.semantic, is.w / 8, is.h / 8)));
    sal.push_back(DenseLabels::from(downsample_labels(s.saliency, is.w / 8, is.h / 8)));
  }
  return {Tensor4(shape, std::move(data)), DenseLabels::stack(sem), DenseLabels::stack(sal)};
}

struct TrainHyper {
  double lr = 0.05;
  std::size_t steps = 500;
  std::uint64_t seed = 1;
};

struct TrainResult {
  Parameters params;
  std::vector<LossBreakdown> trace;  // loss before each update
};

class TrainingError : public DomainError {
 public:
  TrainingError(std::size_t step, const std::string& what)
      : DomainError("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Full-batch plain gradient descent from a seeded initialisation.
inline TrainResult train(const VariantConfig& cfg, const std::vector<TrainingSample>& dataset,
                         const TrainHyper& hyper) {
  detail::require(!dataset.empty(), "train: empty dataset");
  detail::require(hyper.lr >= 0.0 && std::isfinite(hyper.lr), "train: learning rate must be >= 0");
  const Network net(cfg);
  const Batch batch = make_batch(dataset);
  TrainResult result{net.init_params(hyper.seed), {}};
  result.trace.reserve(hyper.steps);
  for (std::size_t step = 0; step < hyper.steps; ++step) {
    Gradients g = net.backward(result.params, batch.images, batch.semantic, batch.saliency);
    if (!std::isfinite(g.loss.total())) throw TrainingError(step, "loss is not finite");
    result.trace.push_back(g.loss);
    auto& w = result.params.values();
    const auto& dw = g.grad.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= hyper.lr * dw[i];
  }
  return result;
}

}  // namespace sdslab::net
