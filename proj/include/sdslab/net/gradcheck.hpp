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

// Backprop versus central finite differences over every parameter.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "sdslab/net/network.hpp"

namespace sdslab::net {

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor of the relative error, so that near-zero gradients are
  // compared absolutely.
  double abs_floor = 1e-8;
  // When a +-step probe flips a ReLU, the step is divided by 10 up to this
  // many times; coordinates that still straddle a kink are skipped.
  int max_shrinks = 3;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  std::string worst_layer;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t shrunk = 0;   // probed with a reduced step
  std::size_t skipped = 0;  // straddled a kink at every step

  bool passed(double tolerance) const { return checked > 0 && max_rel_err < tolerance; }
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline GradCheckReport gradient_check(const Network& net, Parameters params, const Tensor4& x,
                                      const DenseLabels& sem_gt, const DenseLabels& sal_gt,
                                      const GradCheckOptions& opt = {}) {
  const Gradients g = net.backward(params, x, sem_gt, sal_gt);
  const auto base_pattern = net.activation_pattern(net.run(x, params));
  auto probe = [&](std::size_t i, double h, double& loss_out) {
    const double saved = params[i];
    params[i] = saved + h;
    const auto tp = net.run(x, params);
    const double lp = total_loss(net.outputs(tp), sem_gt, sal_gt).total();
    const bool same_p = net.activation_pattern(tp) == base_pattern;
    params[i] = saved - h;
    const auto tm = net.run(x, params);
    const double lm = total_loss(net.outputs(tm), sem_gt, sal_gt).total();
    const bool same_m = net.activation_pattern(tm) == base_pattern;
    params[i] = saved;
    loss_out = (lp - lm) / (2.0 * h);
    return same_p && same_m;
  };

  GradCheckReport r;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double h = opt.step, numeric = 0.0;
    bool smooth = probe(i, h, numeric);
    int shrinks = 0;
    while (!smooth && shrinks < opt.max_shrinks) {
      h /= 10.0;
      ++shrinks;
      smooth = probe(i, h, numeric);
    }
    if (!smooth) {
      ++r.skipped;
      continue;
    }
    if (shrinks > 0) ++r.shrunk;
    ++r.checked;
    const double err = relative_error(g.grad[i], numeric, opt.abs_floor);
    if (r.checked == 1 || err > r.max_rel_err) {
      r.max_rel_err = err;
      r.worst_index = i;
      r.worst_layer = params.owner(i).name;
      r.worst_analytic = g.grad[i];
      r.worst_numeric = numeric;
    }
  }
  return r;
}

}  // namespace sdslab::net
