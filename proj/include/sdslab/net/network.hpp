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

// Dual-task dense prediction network at toy scale.
//
// A backbone reduces the input to 1/8 resolution. On top of it five wirings
// produce semantic logits (C+1 classes) and saliency logits (2 classes):
//
//   SharedHeads  backbone -> 1x1 semantic head, 1x1 saliency head
//   Sequential   backbone -> semantic head -> 3x3 conv -> saliency logits
//   Branches     backbone -> semantic branch -> head, backbone -> saliency branch -> head
//   Refined      Branches + concat(semantic, saliency logits) -> 3x3 conv -> refined saliency
//   Gated        concat(backbone, saliency branch features) -> 1x1 gate -> semantic branch
//
// Both task branches are instantiated from one layer template with unshared
// weights. The network is a DAG of conv/relu/concat nodes evaluated in order;
// backward walks the same list in reverse.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/net/labels.hpp"
#include "sdslab/net/layers.hpp"
#include "sdslab/net/loss.hpp"
#include "sdslab/net/tensor.hpp"

namespace sdslab::net {

enum class Variant { SharedHeads, Sequential, Branches, Refined, Gated };

inline constexpr Variant kAllVariants[] = {Variant::SharedHeads, Variant::Sequential, Variant::Branches,
                                           Variant::Refined, Variant::Gated};

/// Short names v0..v4.
inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::SharedHeads: return "v0";
    case Variant::Sequential: return "v1";
    case Variant::Branches: return "v2";
    case Variant::Refined: return "v3";
    case Variant::Gated: return "v4";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "v0" || s == "shared_heads") return Variant::SharedHeads;
  if (s == "v1" || s == "sequential") return Variant::Sequential;
  if (s == "v2" || s == "branches") return Variant::Branches;
  if (s == "v3" || s == "refined") return Variant::Refined;
  if (s == "v4" || s == "gated") return Variant::Gated;
  throw DomainError("unknown variant '" + std::string(s) + "' (expected v0..v4)");
}

enum class LayerKind { Conv, Relu, Concat, DownsampleLabels };

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  ConvSpec conv;

  static LayerSpec make_conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t stride = 1,
                             std::size_t dilation = 1, std::size_t pad = 0) {
    return {LayerKind::Conv, ConvSpec{in_ch, out_ch, kernel, stride, dilation, pad}};
  }
  static LayerSpec relu() { return {LayerKind::Relu, {}}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct VariantConfig {
  Variant variant = Variant::Branches;
  std::size_t in_channels = 3;
  std::vector<LayerSpec> backbone;
  std::vector<LayerSpec> branch;
  std::size_t num_sem_classes = 4;  // C + 1
  std::size_t num_sal_classes = 2;

  /// Three stride-2 3x3 convs to 1/8 resolution and one dilation-2 3x3 conv,
  /// each followed by ReLU; branches of `branch_depth` 3x3 conv + ReLU.
  static VariantConfig make(Variant variant, std::size_t num_categories, std::size_t width = 16,
                            std::size_t branch_depth = 2, std::size_t branch_width = 16,
                            std::size_t in_channels = 3) {
    VariantConfig cfg;
    cfg.variant = variant;
    cfg.in_channels = in_channels;
    cfg.num_sem_classes = num_categories + 1;
    cfg.backbone = {LayerSpec::make_conv(in_channels, width, 3, 2, 1, 1), LayerSpec::relu(),
                    LayerSpec::make_conv(width, width, 3, 2, 1, 1),       LayerSpec::relu(),
                    LayerSpec::make_conv(width, width, 3, 2, 1, 1),       LayerSpec::relu(),
                    LayerSpec::make_conv(width, width, 3, 1, 2, 2),       LayerSpec::relu()};
    std::size_t in = width;
    for (std::size_t i = 0; i < branch_depth; ++i) {
      cfg.branch.push_back(LayerSpec::make_conv(in, branch_width, 3, 1, 1, 1));
      cfg.branch.push_back(LayerSpec::relu());
      in = branch_width;
    }
    return cfg;
  }

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

struct ParamSlot {
  std::string name;
  ConvSpec spec;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

/// All convolution weights and biases in one flat buffer.
class Parameters {
 public:
  Parameters() = default;
  Parameters(std::vector<ParamSlot> slots, std::size_t count) : slots_(std::move(slots)), values_(count, 0.0) {}

  const std::vector<ParamSlot>& slots() const { return slots_; }
  std::size_t size() const { return values_.size(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  const ParamSlot& slot(std::string_view name) const {
    for (const auto& s : slots_) {
      if (s.name == name) return s;
    }
    throw DomainError("Parameters: no layer named '" + std::string(name) + "'");
  }

  std::span<double> weight(const ParamSlot& s) { return {values_.data() + s.weight_offset, s.spec.weight_count()}; }
  std::span<const double> weight(const ParamSlot& s) const {
    return {values_.data() + s.weight_offset, s.spec.weight_count()};
  }
  std::span<double> bias(const ParamSlot& s) { return {values_.data() + s.bias_offset, s.spec.out_ch}; }
  std::span<const double> bias(const ParamSlot& s) const { return {values_.data() + s.bias_offset, s.spec.out_ch}; }

  /// Name of the layer that owns flat index i.
  const ParamSlot& owner(std::size_t i) const {
    for (const auto& s : slots_) {
      if ((i >= s.weight_offset && i < s.weight_offset + s.spec.weight_count()) ||
          (i >= s.bias_offset && i < s.bias_offset + s.spec.out_ch)) {
        return s;
      }
    }
    throw DomainError("Parameters: index out of range");
  }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  std::vector<ParamSlot> slots_;
  std::vector<double> values_;
};

struct ForwardOutputs {
  Tensor4 sem_logits;                  // (n, C+1, h/8, w/8)
  Tensor4 sal_logits;                  // (n, 2, h/8, w/8)
  std::optional<Tensor4> refined_sal;  // Refined variant only
};

struct LossBreakdown {
  double semantic = 0.0;
  double saliency = 0.0;
  std::optional<double> refined;

  double total() const { return semantic + saliency + refined.value_or(0.0); }
};

/// Joint loss: semantic CE + saliency CE (+ refined saliency CE when the
/// variant produces a refined map). Labels must already be at logit size.
inline LossBreakdown total_loss(const ForwardOutputs& out, const DenseLabels& sem_gt, const DenseLabels& sal_gt) {
  LossBreakdown l;
  l.semantic = cross_entropy_loss(out.sem_logits, sem_gt).loss;
  l.saliency = cross_entropy_loss(out.sal_logits, sal_gt).loss;
  if (out.refined_sal) l.refined = cross_entropy_loss(*out.refined_sal, sal_gt).loss;
  return l;
}

struct Gradients {
  LossBreakdown loss;
  Parameters grad;
};

namespace net_impl {

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL + h;  // splitmix64 finaliser
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace net_impl

class Network {
 public:
  /// Intermediate values of one forward pass; value 0 is the input.
  struct Trace {
    std::vector<Tensor4> values;
  };

  explicit Network(VariantConfig cfg) : cfg_(std::move(cfg)) { build(); }

  const VariantConfig& config() const { return cfg_; }
  const std::vector<ParamSlot>& slots() const { return slots_; }
  std::size_t num_params() const { return param_count_; }
  std::size_t backbone_channels() const { return backbone_channels_; }
  std::size_t branch_channels() const { return branch_channels_; }

  Parameters zero_params() const { return Parameters(slots_, param_count_); }

  /// He (fan-in) normal weights, zero biases. Each layer draws from its own
  /// stream keyed by (seed, layer name), so identically named layers of
  /// different variants start identical.
  Parameters init_params(std::uint64_t seed) const {
    Parameters p = zero_params();
    for (const auto& s : slots_) {
      std::mt19937_64 rng(net_impl::mix_seed(seed, s.name));
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(s.spec.fan_in())));
      for (double& w : p.weight(s)) w = dist(rng);
    }
    return p;
  }

  Trace run(const Tensor4& x, const Parameters& p) const {
    check_params(p);
    const Shape4& s = x.shape();
    if (s.c != cfg_.in_channels) {
      throw ShapeError("input", "expected " + std::to_string(cfg_.in_channels) + " channels, got " + s.str());
    }
    if (s.h == 0 || s.w == 0 || s.h % 8 != 0 || s.w % 8 != 0) {
      throw ShapeError("input", "spatial size " + s.str() + " is not a positive multiple of 8");
    }
    Trace t;
    t.values.reserve(nodes_.size() + 1);
    t.values.push_back(x);
    for (const Node& node : nodes_) {
      switch (node.op) {
        case Op::Conv: {
          const ParamSlot& slot = slots_[node.slot];
          t.values.push_back(
              conv2d_forward(t.values[node.inputs[0]], slot.spec, p.weight(slot), p.bias(slot), node.name));
          break;
        }
        case Op::Relu:
          t.values.push_back(relu_forward(t.values[node.inputs[0]]));
          break;
        case Op::Concat: {
          std::vector<const Tensor4*> xs;
          for (auto i : node.inputs) xs.push_back(&t.values[i]);
          t.values.push_back(concat_forward(xs, node.name));
          break;
        }
      }
    }
    return t;
  }

  ForwardOutputs outputs(const Trace& t) const {
    ForwardOutputs out{t.values[sem_out_], t.values[sal_out_], std::nullopt};
    if (refined_out_) out.refined_sal = t.values[*refined_out_];
    return out;
  }

  ForwardOutputs forward(const Tensor4& x, const Parameters& p) const { return outputs(run(x, p)); }

  LossBreakdown loss(const Parameters& p, const Tensor4& x, const DenseLabels& sem_gt,
                     const DenseLabels& sal_gt) const {
    return total_loss(forward(x, p), sem_gt, sal_gt);
  }

  /// Sign pattern of every ReLU input; a change between two parameter
  /// settings means a kink was crossed.
  std::vector<std::uint8_t> activation_pattern(const Trace& t) const {
    std::vector<std::uint8_t> bits;
    for (const Node& node : nodes_) {
      if (node.op != Op::Relu) continue;
      for (double v : t.values[node.inputs[0]].data()) bits.push_back(v > 0.0 ? 1 : 0);
    }
    return bits;
  }

  /// Exact gradient of the joint loss with respect to every parameter.
  Gradients backward(const Parameters& p, const Tensor4& x, const DenseLabels& sem_gt,
                     const DenseLabels& sal_gt) const {
    const Trace t = run(x, p);
    Gradients g{{}, zero_params()};
    std::vector<std::optional<Tensor4>> dv(t.values.size());
    auto accumulate = [&](std::size_t id, Tensor4 d) {
      if (dv[id]) {
        *dv[id] += d;
      } else {
        dv[id] = std::move(d);
      }
    };

    LossWithGrad sem = cross_entropy_loss(t.values[sem_out_], sem_gt);
    LossWithGrad sal = cross_entropy_loss(t.values[sal_out_], sal_gt);
    g.loss.semantic = sem.loss;
    g.loss.saliency = sal.loss;
    accumulate(sem_out_, std::move(sem.grad));
    accumulate(sal_out_, std::move(sal.grad));
    if (refined_out_) {
      LossWithGrad ref = cross_entropy_loss(t.values[*refined_out_], sal_gt);
      g.loss.refined = ref.loss;
      accumulate(*refined_out_, std::move(ref.grad));
    }

    for (std::size_t k = nodes_.size(); k-- > 0;) {
      const Node& node = nodes_[k];
      const std::size_t out_id = k + 1;
      if (!dv[out_id]) continue;
      const Tensor4& dy = *dv[out_id];
      switch (node.op) {
        case Op::Conv: {
          const ParamSlot& slot = slots_[node.slot];
          accumulate(node.inputs[0], conv2d_backward(t.values[node.inputs[0]], dy, slot.spec, p.weight(slot),
                                                     g.grad.weight(slot), g.grad.bias(slot)));
          break;
        }
        case Op::Relu:
          accumulate(node.inputs[0], relu_backward(t.values[node.inputs[0]], dy));
          break;
        case Op::Concat: {
          std::vector<const Tensor4*> xs;
          for (auto i : node.inputs) xs.push_back(&t.values[i]);
          auto parts = concat_backward(xs, dy);
          for (std::size_t j = 0; j < parts.size(); ++j) accumulate(node.inputs[j], std::move(parts[j]));
          break;
        }
      }
      dv[out_id].reset();
    }
    return g;
  }

 private:
  enum class Op { Conv, Relu, Concat };

  struct Node {
    Op op;
    std::vector<std::size_t> inputs;
    std::size_t slot = 0;
    std::string name;
  };

  std::size_t add_conv(std::size_t input, const ConvSpec& spec, std::string name) {
    if (spec.in_ch != channels_[input]) {
      throw ShapeError(name, "expects " + std::to_string(spec.in_ch) + " input channels but receives " +
                                 std::to_string(channels_[input]));
    }
    if (spec.kernel == 0 || spec.stride == 0 || spec.dilation == 0 || spec.out_ch == 0) {
      throw ShapeError(name, "kernel, stride, dilation and output channels must be positive");
    }
    // Output must be exactly input / stride for every input size divisible
    // by the stride.
    const std::ptrdiff_t r = std::ptrdiff_t(2 * spec.pad) - std::ptrdiff_t(spec.dilation * (spec.kernel - 1)) - 1;
    if (r < -std::ptrdiff_t(spec.stride) || r > -1) {
      throw ShapeError(name, "padding " + std::to_string(spec.pad) + " does not give output = input / stride");
    }
    slots_.push_back({name, spec, param_count_, param_count_ + spec.weight_count()});
    param_count_ += spec.weight_count() + spec.out_ch;
    nodes_.push_back({Op::Conv, {input}, slots_.size() - 1, std::move(name)});
    channels_.push_back(spec.out_ch);
    return nodes_.size();
  }

  std::size_t add_relu(std::size_t input, std::string name) {
    nodes_.push_back({Op::Relu, {input}, 0, std::move(name)});
    channels_.push_back(channels_[input]);
    return nodes_.size();
  }

  std::size_t add_concat(std::vector<std::size_t> inputs, std::string name) {
    std::size_t c = 0;
    for (auto i : inputs) c += channels_[i];
    nodes_.push_back({Op::Concat, std::move(inputs), 0, std::move(name)});
    channels_.push_back(c);
    return nodes_.size();
  }

  std::size_t add_stack(std::size_t input, const std::vector<LayerSpec>& layers, const std::string& prefix,
                        std::size_t* total_stride) {
    std::size_t v = input;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string name = prefix + "." + std::to_string(i);
      switch (layers[i].kind) {
        case LayerKind::Conv:
          v = add_conv(v, layers[i].conv, name);
          if (total_stride) *total_stride *= layers[i].conv.stride;
          break;
        case LayerKind::Relu:
          v = add_relu(v, name);
          break;
        default:
          throw ShapeError(name, "only conv and relu layers are allowed in a layer stack");
      }
    }
    return v;
  }

  std::size_t add_branch(std::size_t input, const std::string& prefix) {
    std::size_t stride = 1;
    const std::size_t v = add_stack(input, cfg_.branch, prefix, &stride);
    if (stride != 1) throw ShapeError(prefix, "branch layers must keep the resolution");
    return v;
  }

  void build() {
    detail::require(cfg_.num_sem_classes >= 2, "VariantConfig: need at least 2 semantic classes");
    detail::require(cfg_.num_sal_classes == 2, "VariantConfig: saliency is a 2-class problem");
    channels_.push_back(cfg_.in_channels);
    std::size_t stride = 1;
    const std::size_t b = add_stack(0, cfg_.backbone, "backbone", &stride);
    if (stride != 8) {
      throw ShapeError("backbone", "downsampling factor is " + std::to_string(stride) + ", expected 8");
    }
    backbone_channels_ = channels_[b];
    const std::size_t sem_c = cfg_.num_sem_classes, sal_c = cfg_.num_sal_classes;

    switch (cfg_.variant) {
      case Variant::SharedHeads:
        sem_out_ = add_conv(b, {backbone_channels_, sem_c, 1}, "sem_head");
        sal_out_ = add_conv(b, {backbone_channels_, sal_c, 1}, "sal_head");
        branch_channels_ = backbone_channels_;
        break;
      case Variant::Sequential:
        sem_out_ = add_conv(b, {backbone_channels_, sem_c, 1}, "sem_head");
        sal_out_ = add_conv(sem_out_, {sem_c, sal_c, 3, 1, 1, 1}, "sal_from_sem");
        branch_channels_ = backbone_channels_;
        break;
      case Variant::Branches:
      case Variant::Refined: {
        const std::size_t fs = add_branch(b, "sem_branch");
        const std::size_t fd = add_branch(b, "sal_branch");
        branch_channels_ = channels_[fd];
        sem_out_ = add_conv(fs, {channels_[fs], sem_c, 1}, "sem_head");
        sal_out_ = add_conv(fd, {channels_[fd], sal_c, 1}, "sal_head");
        if (cfg_.variant == Variant::Refined) {
          const std::size_t cat = add_concat({sem_out_, sal_out_}, "refine_concat");
          refined_out_ = add_conv(cat, {sem_c + sal_c, sal_c, 3, 1, 1, 1}, "refine");
        }
        break;
      }
      case Variant::Gated: {
        const std::size_t fd = add_branch(b, "sal_branch");
        branch_channels_ = channels_[fd];
        const std::size_t cat = add_concat({b, fd}, "gate_concat");
        const std::size_t gate = add_conv(cat, {channels_[cat], backbone_channels_, 1}, "gate");
        const std::size_t fs = add_branch(gate, "sem_branch");
        sem_out_ = add_conv(fs, {channels_[fs], sem_c, 1}, "sem_head");
        sal_out_ = add_conv(fd, {channels_[fd], sal_c, 1}, "sal_head");
        break;
      }
    }
  }

  void check_params(const Parameters& p) const {
    if (p.size() != param_count_ || p.slots() != slots_) {
      throw ShapeError("parameters", "layout does not match variant " + to_string(cfg_.variant) + " (" +
                                         std::to_string(p.size()) + " values, expected " +
                                         std::to_string(param_count_) + ")");
    }
  }

  VariantConfig cfg_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> channels_;  // per value
  std::vector<ParamSlot> slots_;
  std::size_t param_count_ = 0;
  std::size_t backbone_channels_ = 0;
  std::size_t branch_channels_ = 0;
  std::size_t sem_out_ = 0;
  std::size_t sal_out_ = 0;
  std::optional<std::size_t> refined_out_;
};

inline ForwardOutputs forward(const Tensor4& x, const VariantConfig& cfg, const Parameters& params) {
  return Network(cfg).forward(x, params);
}

}  // namespace sdslab::net
