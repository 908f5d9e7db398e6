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

// Forward and backward kernels for the three layer types of the toy network:
// zero-padded strided/dilated 2-D convolution, ReLU and channel concatenation.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/net/tensor.hpp"

namespace sdslab::net {

/// Shape or wiring error; names the offending layer.
class ShapeError : public DomainError {
 public:
  ShapeError(std::string layer, const std::string& what)
      : DomainError(layer + ": " + what), layer_(std::move(layer)) {}
  const std::string& layer() const { return layer_; }

 private:
  std::string layer_;
};

struct ConvSpec {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t pad = 0;

  std::size_t weight_count() const { return out_ch * in_ch * kernel * kernel; }
  std::size_t fan_in() const { return in_ch * kernel * kernel; }

  // floor((size + 2 pad - dilation (k - 1) - 1) / stride) + 1
  std::size_t out_size(std::size_t size, const std::string& layer) const {
    const std::size_t span = dilation * (kernel - 1) + 1;
    if (size + 2 * pad < span) {
      throw ShapeError(layer, "input extent " + std::to_string(size) + " smaller than the receptive field");
    }
    return (size + 2 * pad - span) / stride + 1;
  }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

inline Tensor4 conv2d_forward(const Tensor4& x, const ConvSpec& s, std::span<const double> weight,
                              std::span<const double> bias, const std::string& layer) {
  const Shape4& in = x.shape();
  if (in.c != s.in_ch) {
    throw ShapeError(layer, "expected " + std::to_string(s.in_ch) + " input channels, got " + in.str());
  }
  const Shape4 out{in.n, s.out_ch, s.out_size(in.h, layer), s.out_size(in.w, layer)};
  Tensor4 y(out);
  const std::size_t k = s.kernel;
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t o = 0; o < s.out_ch; ++o) {
      for (std::size_t oy = 0; oy < out.h; ++oy) {
        for (std::size_t ox = 0; ox < out.w; ++ox) {
          double acc = bias[o];
          for (std::size_t i = 0; i < s.in_ch; ++i) {
            const double* w = &weight[((o * s.in_ch + i) * k) * k];
            for (std::size_t ky = 0; ky < k; ++ky) {
              const std::ptrdiff_t iy = std::ptrdiff_t(oy * s.stride + ky * s.dilation) - std::ptrdiff_t(s.pad);
              if (iy < 0 || iy >= std::ptrdiff_t(in.h)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t ix =
                    std::ptrdiff_t(ox * s.stride + kx * s.dilation) - std::ptrdiff_t(s.pad);
                if (ix < 0 || ix >= std::ptrdiff_t(in.w)) continue;
                acc += w[ky * k + kx] * x.at(n, i, std::size_t(iy), std::size_t(ix));
              }
            }
          }
          y.at(n, o, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

/// Accumulates weight and bias gradients; returns the input gradient.
inline Tensor4 conv2d_backward(const Tensor4& x, const Tensor4& dy, const ConvSpec& s,
                               std::span<const double> weight, std::span<double> dweight,
                               std::span<double> dbias) {
  const Shape4& in = x.shape();
  const Shape4& out = dy.shape();
  Tensor4 dx(in);
  const std::size_t k = s.kernel;
  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t o = 0; o < s.out_ch; ++o) {
      for (std::size_t oy = 0; oy < out.h; ++oy) {
        for (std::size_t ox = 0; ox < out.w; ++ox) {
          const double g = dy.at(n, o, oy, ox);
          if (g == 0.0) continue;
          dbias[o] += g;
          for (std::size_t i = 0; i < s.in_ch; ++i) {
            const std::size_t wbase = ((o * s.in_ch + i) * k) * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
              const std::ptrdiff_t iy = std::ptrdiff_t(oy * s.stride + ky * s.dilation) - std::ptrdiff_t(s.pad);
              if (iy < 0 || iy >= std::ptrdiff_t(in.h)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t ix =
                    std::ptrdiff_t(ox * s.stride + kx * s.dilation) - std::ptrdiff_t(s.pad);
                if (ix < 0 || ix >= std::ptrdiff_t(in.w)) continue;
                dweight[wbase + ky * k + kx] += g * x.at(n, i, std::size_t(iy), std::size_t(ix));
                dx.at(n, i, std::size_t(iy), std::size_t(ix)) += g * weight[wbase + ky * k + kx];
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

inline Tensor4 relu_forward(const Tensor4& x) {
  Tensor4 y = x;
  // Written so that NaN passes through instead of being clamped to zero.
  for (auto& v : y.data()) v = v < 0.0 ? 0.0 : v;
  return y;
}

inline Tensor4 relu_backward(const Tensor4& x, const Tensor4& dy) {
  Tensor4 dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

inline Tensor4 concat_forward(const std::vector<const Tensor4*>& xs, const std::string& layer) {
  detail::require(!xs.empty(), layer + ": concat of nothing");
  Shape4 out = xs.front()->shape();
  out.c = 0;
  for (const Tensor4* x : xs) {
    const Shape4& s = x->shape();
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      throw ShapeError(layer, "cannot concatenate " + xs.front()->shape().str() + " with " + s.str());
    }
    out.c += s.c;
  }
  Tensor4 y(out);
  const std::size_t plane = out.h * out.w;
  for (std::size_t n = 0; n < out.n; ++n) {
    std::size_t c0 = 0;
    for (const Tensor4* x : xs) {
      const std::size_t chunk = x->shape().c * plane;
      std::copy_n(x->data().begin() + std::ptrdiff_t(n * chunk), chunk,
                  y.data().begin() + std::ptrdiff_t((n * out.c + c0) * plane));
      c0 += x->shape().c;
    }
  }
  return y;
}

/// Splits the concatenated gradient back into one gradient per input.
inline std::vector<Tensor4> concat_backward(const std::vector<const Tensor4*>& xs, const Tensor4& dy) {
  std::vector<Tensor4> out;
  const Shape4& s = dy.shape();
  const std::size_t plane = s.h * s.w;
  std::size_t c0 = 0;
  for (const Tensor4* x : xs) {
    Tensor4 dx(x->shape());
    const std::size_t chunk = x->shape().c * plane;
    for (std::size_t n = 0; n < s.n; ++n) {
      std::copy_n(dy.data().begin() + std::ptrdiff_t((n * s.c + c0) * plane), chunk,
                  dx.data().begin() + std::ptrdiff_t(n * chunk));
    }
    c0 += x->shape().c;
    out.push_back(std::move(dx));
  }
  return out;
}

}  // namespace sdslab::net
