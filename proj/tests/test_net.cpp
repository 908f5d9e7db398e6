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

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sdslab/io/synthetic.hpp"
#include "sdslab/net/checkpoint.hpp"
#include "sdslab/net/gradcheck.hpp"
#include "sdslab/net/network.hpp"
#include "sdslab/net/train.hpp"

namespace sdslab::net {
namespace {

Tensor4 random_tensor(Shape4 s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor4 t(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

DenseLabels random_labels(std::size_t h, std::size_t w, std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> d(0, classes - 1);
  DenseLabels l{1, h, w, std::vector<std::size_t>(h * w), std::nullopt};
  for (auto& v : l.labels) v = d(rng);
  return l;
}

// Log-softmax cross-entropy computed directly, pixel by pixel.
double reference_ce(const Tensor4& logits, const DenseLabels& gt) {
  const Shape4& s = logits.shape();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        const std::size_t l = gt.labels[(b * s.h + y) * s.w + x];
        if (gt.ignore && l == *gt.ignore) continue;
        double z = 0.0;
        for (std::size_t c = 0; c < s.c; ++c) z += std::exp(logits.at(b, c, y, x));
        sum += std::log(z) - logits.at(b, l, y, x);
        ++n;
      }
    }
  }
  return n ? sum / double(n) : 0.0;
}

TEST(Conv, IdentityKernelCopiesInput) {
  const Tensor4 x = random_tensor({1, 1, 4, 5}, 1);
  const ConvSpec spec{1, 1, 3, 1, 1, 1};
  std::vector<double> w(9, 0.0);
  w[4] = 1.0;
  const Tensor4 y = conv2d_forward(x, spec, w, std::vector<double>{0.0}, "id");
  EXPECT_EQ(y, x);
}

TEST(Conv, MatchesDirectSum) {
  const Tensor4 x = random_tensor({2, 3, 6, 6}, 2);
  const ConvSpec spec{3, 2, 3, 1, 2, 2};
  const Tensor4 wt = random_tensor({2, 3, 3, 3}, 3);
  const std::vector<double> bias{0.25, -0.5};
  const Tensor4 y = conv2d_forward(x, spec, wt.data(), bias, "dil");
  ASSERT_EQ(y.shape(), (Shape4{2, 2, 6, 6}));
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t o = 0; o < 2; ++o) {
      for (int oy = 0; oy < 6; ++oy) {
        for (int ox = 0; ox < 6; ++ox) {
          double v = bias[o];
          for (std::size_t c = 0; c < 3; ++c) {
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const int iy = oy - 2 + 2 * ky, ix = ox - 2 + 2 * kx;
                if (iy < 0 || iy >= 6 || ix < 0 || ix >= 6) continue;
                v += wt.at(o, c, ky, kx) * x.at(n, c, iy, ix);
              }
            }
          }
          EXPECT_NEAR(y.at(n, o, oy, ox), v, 1e-12);
        }
      }
    }
  }
}

TEST(Conv, ChannelMismatchNamesLayer) {
  const Tensor4 x({1, 2, 4, 4});
  const ConvSpec spec{3, 1, 1};
  try {
    conv2d_forward(x, spec, std::vector<double>(3, 0.0), std::vector<double>(1, 0.0), "probe");
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), "probe");
  }
}

TEST(Concat, StacksChannelsInOrder) {
  const Tensor4 a = random_tensor({1, 2, 2, 2}, 4), b = random_tensor({1, 1, 2, 2}, 5);
  const Tensor4 c = concat_forward({&a, &b}, "cat");
  ASSERT_EQ(c.shape().c, 3u);
  EXPECT_EQ(c.at(0, 1, 1, 0), a.at(0, 1, 1, 0));
  EXPECT_EQ(c.at(0, 2, 0, 1), b.at(0, 0, 0, 1));
  const auto parts = concat_backward({&a, &b}, c);
  EXPECT_EQ(parts[0], a);
  EXPECT_EQ(parts[1], b);
  const Tensor4 odd({1, 1, 3, 2});
  EXPECT_THROW(concat_forward({&a, &odd}, "cat"), ShapeError);
}

TEST(Labels, CheckerboardDownsample) {
  std::vector<Label> l(16);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) l[y * 4 + x] = Label((x + y) % 2 + 1);
  }
  const LabelMask m(4, 4, l, 2);
  const LabelMask d = downsample_labels(m, 2, 2);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(d[i], m[0]);
  EXPECT_THROW(downsample_labels(m, 3, 3), DomainError);
}

TEST(Labels, BinaryDownsampleAndIgnore) {
  const BinaryMask b(4, 2, {true, false, false, false, true, true, true, true});
  const BinaryMask d = downsample_labels(b, 2, 1);
  EXPECT_TRUE(d[0]);
  EXPECT_FALSE(d[1]);
  const LabelMask v(2, 1, {255, 1}, 1, Label(255));
  EXPECT_EQ(*DenseLabels::from(v).ignore, 255u);
}

TEST(Loss, UniformLogitsGiveLogTwo) {
  const Tensor4 logits({1, 2, 3, 3});
  const auto r = cross_entropy_loss(logits, random_labels(3, 3, 2, 1));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
}

TEST(Loss, SaturatedCorrectLogitsHaveNoGradient) {
  const DenseLabels gt = random_labels(2, 2, 3, 2);
  Tensor4 logits({1, 3, 2, 2}, -50.0);
  for (std::size_t i = 0; i < 4; ++i) logits.at(0, gt.labels[i], i / 2, i % 2) = 50.0;
  const auto r = cross_entropy_loss(logits, gt);
  EXPECT_LT(r.loss, 1e-40);
  for (double g : r.grad.data()) EXPECT_LT(std::abs(g), 1e-40);
}

TEST(Loss, LargeLogitsStayFinite) {
  const DenseLabels gt = random_labels(2, 2, 3, 3);
  const Tensor4 logits = random_tensor({1, 3, 2, 2}, 4, -800.0, 800.0);
  EXPECT_TRUE(std::isfinite(cross_entropy_loss(logits, gt).loss));
}

TEST(Loss, MatchesReferenceAndFiniteDifferences) {
  const DenseLabels gt = random_labels(2, 2, 3, 5);
  Tensor4 logits = random_tensor({1, 3, 2, 2}, 6, -3.0, 3.0);
  const auto r = cross_entropy_loss(logits, gt);
  EXPECT_NEAR(r.loss, reference_ce(logits, gt), 1e-12);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double h = 1e-6, saved = logits[i];
    logits[i] = saved + h;
    const double up = reference_ce(logits, gt);
    logits[i] = saved - h;
    const double down = reference_ce(logits, gt);
    logits[i] = saved;
    EXPECT_NEAR(r.grad[i], (up - down) / (2 * h), 1e-8);
  }
}

TEST(Loss, IgnoredPixelsAndBadLabels) {
  DenseLabels gt = random_labels(2, 2, 2, 7);
  gt.labels[0] = 255;
  gt.ignore = 255;
  const Tensor4 logits = random_tensor({1, 2, 2, 2}, 8);
  const auto r = cross_entropy_loss(logits, gt);
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(r.grad.at(0, c, 0, 0), 0.0);
  EXPECT_NEAR(r.loss, reference_ce(logits, gt), 1e-12);
  gt.ignore.reset();
  EXPECT_THROW(cross_entropy_loss(logits, gt), DomainError);
}

class VariantTest : public ::testing::TestWithParam<Variant> {};

TEST_P(VariantTest, OutputsAreOneEighthResolution) {
  const Network netw(VariantConfig::make(GetParam(), 3));
  const Parameters p = netw.init_params(1);
  for (std::size_t h : {16, 24, 32, 64}) {
    for (std::size_t w : {16, 24, 32, 64}) {
      const auto out = netw.forward(random_tensor({1, 3, h, w}, h * w, 0.0, 1.0), p);
      EXPECT_EQ(out.sem_logits.shape(), (Shape4{1, 4, h / 8, w / 8}));
      EXPECT_EQ(out.sal_logits.shape(), (Shape4{1, 2, h / 8, w / 8}));
      EXPECT_EQ(out.refined_sal.has_value(), GetParam() == Variant::Refined);
      if (out.refined_sal) EXPECT_EQ(out.refined_sal->shape(), (Shape4{1, 2, h / 8, w / 8}));
    }
  }
}

TEST_P(VariantTest, RejectsSizesNotDivisibleByEight) {
  const Network netw(VariantConfig::make(GetParam(), 3));
  const Parameters p = netw.zero_params();
  try {
    netw.forward(Tensor4({1, 3, 20, 16}), p);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), "input");
  }
  EXPECT_THROW(netw.forward(Tensor4({1, 1, 16, 16}), p), ShapeError);
}

TEST_P(VariantTest, LossDecomposes) {
  const Network netw(VariantConfig::make(GetParam(), 3));
  const Parameters p = netw.init_params(2);
  const Tensor4 x = random_tensor({1, 3, 16, 16}, 3, 0.0, 1.0);
  const DenseLabels sem = random_labels(2, 2, 4, 4), sal = random_labels(2, 2, 2, 5);
  const auto out = netw.forward(x, p);
  const auto l = total_loss(out, sem, sal);
  double expect = cross_entropy_loss(out.sem_logits, sem).loss + cross_entropy_loss(out.sal_logits, sal).loss;
  if (out.refined_sal) expect += cross_entropy_loss(*out.refined_sal, sal).loss;
  EXPECT_NEAR(l.total(), expect, 1e-15);
  EXPECT_EQ(l.refined.has_value(), GetParam() == Variant::Refined);
  EXPECT_NEAR(l.semantic, reference_ce(out.sem_logits, sem), 1e-12);
}

TEST_P(VariantTest, GradientsMatchFiniteDifferences) {
  const VariantConfig cfg = VariantConfig::make(GetParam(), 2, 4, 1, 4);
  const Network netw(cfg);
  const Parameters p = netw.init_params(3);
  const Tensor4 x = random_tensor({1, 3, 16, 16}, 6, 0.0, 1.0);
  const DenseLabels sem = random_labels(2, 2, 3, 7), sal = random_labels(2, 2, 2, 8);
  const auto g = netw.backward(p, x, sem, sal);
  const auto o = oracle::finite_difference(netw, p, x, sem, sal, g.grad.values());
  EXPECT_LT(o.max_rel_err, 1e-4);
  EXPECT_GT(o.checked, o.skipped * 10);
  const auto report = gradient_check(netw, p, x, sem, sal);
  EXPECT_TRUE(report.passed(1e-4)) << report.worst_layer << " " << report.max_rel_err;
  EXPECT_EQ(report.checked + report.skipped, netw.num_params());
}

TEST_P(VariantTest, ConstantInputGivesConstantInterior) {
  const Network netw(VariantConfig::make(GetParam(), 3));
  const Parameters p = netw.init_params(4);
  const auto out = netw.forward(Tensor4({1, 3, 128, 128}, 0.3), p);
  auto check = [](const Tensor4& t) {
    for (std::size_t c = 0; c < t.shape().c; ++c) {
      const double ref = t.at(0, c, 7, 7);
      for (std::size_t y = 7; y <= 9; ++y) {
        for (std::size_t x = 7; x <= 9; ++x) EXPECT_NEAR(t.at(0, c, y, x), ref, 1e-12);
      }
    }
  };
  check(out.sem_logits);
  check(out.sal_logits);
  if (out.refined_sal) check(*out.refined_sal);
}

TEST_P(VariantTest, ZeroLearningRateKeepsLossConstant) {
  const auto sample = io::synthetic_sample(16, 3, 9);
  const auto r = train(VariantConfig::make(GetParam(), 3, 4, 1, 4), {sample}, {0.0, 4, 1});
  ASSERT_EQ(r.trace.size(), 4u);
  for (const auto& l : r.trace) EXPECT_EQ(l.total(), r.trace.front().total());
}

TEST_P(VariantTest, TrainingIsDeterministicPerSeed) {
  const auto sample = io::synthetic_sample(16, 3, 10);
  const auto cfg = VariantConfig::make(GetParam(), 3, 4, 1, 4);
  const auto a = train(cfg, {sample}, {0.05, 5, 7});
  const auto b = train(cfg, {sample}, {0.05, 5, 7});
  const auto c = train(cfg, {sample}, {0.05, 5, 8});
  EXPECT_EQ(a.params.values(), b.params.values());
  EXPECT_NE(a.params.values(), c.params.values());
  EXPECT_LT(a.trace.back().total(), a.trace.front().total());
}

INSTANTIATE_TEST_SUITE_P(AllVariants, VariantTest, ::testing::ValuesIn(kAllVariants),
                         [](const auto& info) { return to_string(info.param); });

TEST(Network, RefinedHeadWithZeroWeightsOutputsZero) {
  const Network netw(VariantConfig::make(Variant::Refined, 3));
  Parameters p = netw.init_params(5);
  const ParamSlot& s = p.slot("refine");
  for (double& v : p.weight(s)) v = 0.0;
  for (double& v : p.bias(s)) v = 0.0;
  const auto out = netw.forward(random_tensor({1, 3, 16, 16}, 9, 0.0, 1.0), p);
  for (double v : out.refined_sal->data()) EXPECT_EQ(v, 0.0);
}

TEST(Network, GateRestoresBackboneWidth) {
  const Network netw(VariantConfig::make(Variant::Gated, 3, 16, 2, 8));
  const Parameters p = netw.zero_params();
  const ParamSlot& gate = p.slot("gate");
  EXPECT_EQ(gate.spec.in_ch, 24u);
  EXPECT_EQ(gate.spec.out_ch, 16u);
  EXPECT_EQ(gate.spec.kernel, 1u);
  EXPECT_EQ(p.slot("sem_branch.0").spec.in_ch, 16u);
}

TEST(Network, SharedHeadsEqualsBranchesWithoutBranchLayers) {
  const VariantConfig v0 = VariantConfig::make(Variant::SharedHeads, 3);
  const VariantConfig v2 = VariantConfig::make(Variant::Branches, 3, 16, 0);
  const Network a(v0), b(v2);
  ASSERT_EQ(a.num_params(), b.num_params());
  const Tensor4 x = random_tensor({1, 3, 24, 16}, 10, 0.0, 1.0);
  const auto oa = a.forward(x, a.init_params(6));
  const auto ob = b.forward(x, b.init_params(6));
  EXPECT_EQ(oa.sem_logits, ob.sem_logits);
  EXPECT_EQ(oa.sal_logits, ob.sal_logits);
}

TEST(Network, MirroredBranchesReceiveMirroredGradients) {
  // One category makes both heads two-class; copy every sal_* parameter onto
  // its sem_* twin and feed the same labels to both tasks.
  const Network netw(VariantConfig::make(Variant::Branches, 1, 8, 2, 8));
  Parameters p = netw.init_params(11);
  for (const auto& pair : {std::pair{"sem_branch.0", "sal_branch.0"}, std::pair{"sem_branch.2", "sal_branch.2"},
                           std::pair{"sem_head", "sal_head"}}) {
    const ParamSlot& a = p.slot(pair.first);
    const ParamSlot& b = p.slot(pair.second);
    std::copy(p.weight(b).begin(), p.weight(b).end(), p.weight(a).begin());
    std::copy(p.bias(b).begin(), p.bias(b).end(), p.bias(a).begin());
  }
  const Tensor4 x = random_tensor({1, 3, 16, 16}, 12, 0.0, 1.0);
  const DenseLabels labels = random_labels(2, 2, 2, 13);
  const auto g = netw.backward(p, x, labels, labels);
  EXPECT_EQ(g.loss.semantic, g.loss.saliency);
  for (const auto& pair : {std::pair{"sem_branch.0", "sal_branch.0"}, std::pair{"sem_head", "sal_head"}}) {
    const auto ga = g.grad.weight(g.grad.slot(pair.first));
    const auto gb = g.grad.weight(g.grad.slot(pair.second));
    for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_EQ(ga[i], gb[i]);
  }
}

TEST(Network, InvalidArchitecturesNameTheLayer) {
  VariantConfig cfg = VariantConfig::make(Variant::Branches, 3);
  cfg.backbone.resize(4);  // stride 4
  try {
    Network n(cfg);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), "backbone");
  }
  cfg = VariantConfig::make(Variant::Branches, 3);
  cfg.backbone[2].conv.in_ch = 7;
  try {
    Network n(cfg);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.layer(), "backbone.2");
  }
  cfg = VariantConfig::make(Variant::Branches, 3);
  cfg.branch[0].conv.pad = 0;
  EXPECT_THROW(Network{cfg}, ShapeError);
}

TEST(Network, ParameterLayoutMismatchIsRejected) {
  const Network a(VariantConfig::make(Variant::SharedHeads, 3));
  const Network b(VariantConfig::make(Variant::Branches, 3));
  EXPECT_THROW(b.forward(Tensor4({1, 3, 16, 16}), a.zero_params()), ShapeError);
}

TEST(Network, InitIsSeedDependent) {
  const Network netw(VariantConfig::make(Variant::Gated, 3));
  EXPECT_EQ(netw.init_params(3).values(), netw.init_params(3).values());
  EXPECT_NE(netw.init_params(3).values(), netw.init_params(4).values());
}

TEST(Train, NonFiniteLossAborts) {
  auto sample = io::synthetic_sample(16, 3, 1);
  sample.image[5] = std::nan("");
  try {
    train(VariantConfig::make(Variant::Branches, 3, 4, 1, 4), {sample}, {0.05, 3, 1});
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(Train, RejectsNegativeLearningRate) {
  const auto sample = io::synthetic_sample(16, 3, 1);
  EXPECT_THROW(train(VariantConfig::make(Variant::Branches, 3), {sample}, {-0.1, 1, 1}), DomainError);
  EXPECT_THROW(train(VariantConfig::make(Variant::Branches, 3), {}, {}), DomainError);
}

TEST(Checkpoint, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sdslab_test_ckpt";
  std::filesystem::create_directories(dir);
  const auto cfg = VariantConfig::make(Variant::Refined, 3, 8, 1, 8);
  const Network netw(cfg);
  const Parameters p = netw.init_params(21);
  save_checkpoint(dir / "p", cfg, p);
  EXPECT_EQ(load_checkpoint(dir / "p", cfg).values(), p.values());
  EXPECT_THROW(load_checkpoint(dir / "p", VariantConfig::make(Variant::Branches, 3, 8, 1, 8)), DomainError);
  EXPECT_THROW(load_checkpoint(dir / "missing", cfg), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Config, ParsesKeyValues) {
  std::istringstream in("# comment\nvariant = v4\nlr=0.1  # inline\nsteps = 20\nseed=3\n\n");
  const RunConfig rc = RunConfig::from(parse_key_values(in));
  EXPECT_EQ(rc.variant, Variant::Gated);
  EXPECT_DOUBLE_EQ(rc.hyper.lr, 0.1);
  EXPECT_EQ(rc.hyper.steps, 20u);
  EXPECT_EQ(rc.hyper.seed, 3u);
  EXPECT_EQ(rc.num_categories, 3u);
}

TEST(Config, RejectsBadInput) {
  std::istringstream dup("lr = 1\nlr = 2\n");
  EXPECT_THROW(parse_key_values(dup), DomainError);
  std::istringstream noeq("variant v2\n");
  EXPECT_THROW(parse_key_values(noeq), DomainError);
  EXPECT_THROW(RunConfig::from({{"learning_rate", "0.1"}}), DomainError);
  EXPECT_THROW(RunConfig::from({{"steps", "ten"}}), DomainError);
  EXPECT_THROW(RunConfig::from({{"variant", "v9"}}), DomainError);
  EXPECT_THROW(RunConfig::from({{"image_size", "20"}}), DomainError);
}

TEST(Config, LossTraceCsv) {
  std::vector<LossBreakdown> trace{{1.0, 0.5, std::nullopt}, {0.5, 0.25, 0.125}};
  EXPECT_EQ(loss_trace_csv(trace), "step,total,semantic,saliency,refined\n0,1.5,1,0.5,\n1,0.875,0.5,0.25,0.125\n");
}

}  // namespace
}  // namespace sdslab::net
