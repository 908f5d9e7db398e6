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

// Evaluation metrics for both tasks.
//
// Segmentation: confusion matrix (rows = ground truth, columns = prediction),
// pixel accuracy, mean per-class accuracy, per-class IoU and mIoU.
//
// Saliency: precision/recall and ROC over an evenly spaced threshold grid on
// [0, 1] (a pixel is predicted salient when value >= threshold), max F-beta
// along the PR curve, trapezoidal ROC AUC and MAE against a binary ground
// truth.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/mask.hpp"

namespace sdslab {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t num_classes)
      : n_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return n_; }
  std::uint64_t operator()(std::size_t gt, std::size_t pred) const { return counts_[gt * n_ + pred]; }
  void add(std::size_t gt, std::size_t pred, std::uint64_t k = 1) { counts_[gt * n_ + pred] += k; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto v : counts_) t += v;
    return t;
  }
  std::uint64_t row_sum(std::size_t gt) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += (*this)(gt, p);
    return s;
  }
  std::uint64_t col_sum(std::size_t pred) const {
    std::uint64_t s = 0;
    for (std::size_t g = 0; g < n_; ++g) s += (*this)(g, pred);
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    detail::require(o.n_ == n_, "ConfusionMatrix: class count mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Pixels whose ground truth or prediction equals the ignore label are
/// skipped. Without an explicit ignore label the ground truth's own is used.
inline ConfusionMatrix confusion(const LabelMask& pred, const LabelMask& gt,
                                 std::optional<Label> ignore_label = std::nullopt) {
  detail::require_same_dims(pred, gt, "confusion");
  detail::require(pred.num_categories() == gt.num_categories(),
                  "confusion: prediction has " + std::to_string(pred.num_categories()) +
                      " categories, ground truth " + std::to_string(gt.num_categories()));
  if (!ignore_label) ignore_label = gt.ignore_label();
  const std::size_t n = gt.num_categories() + 1;
  ConfusionMatrix cm(n);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Label g = gt[i], p = pred[i];
    if (ignore_label && (g == *ignore_label || p == *ignore_label)) continue;
    if (g >= n || p >= n) continue;  // foreign void label
    cm.add(g, p);
  }
  return cm;
}

struct SegmentationScores {
  double pixel_acc = 0.0;
  double mean_acc = 0.0;
  double miou = 0.0;
  std::vector<double> per_class_acc;  // NaN where the class is absent from ground truth
  std::vector<double> per_class_iou;  // NaN where the class is absent from both
};

/// IoU and mIoU average over classes seen in prediction or ground truth;
/// mean accuracy averages over classes seen in ground truth.
inline SegmentationScores segmentation_scores(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  detail::require(total > 0, "segmentation_scores: empty confusion matrix");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SegmentationScores s;
  std::uint64_t trace = 0;
  double acc_sum = 0.0, iou_sum = 0.0;
  std::size_t acc_n = 0, iou_n = 0;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    const std::uint64_t tp = cm(c, c), row = cm.row_sum(c), col = cm.col_sum(c);
    trace += tp;
    double acc = nan, iou = nan;
    if (row > 0) {
      acc = double(tp) / double(row);
      acc_sum += acc;
      ++acc_n;
    }
    if (row + col > 0) {
      iou = double(tp) / double(row + col - tp);
      iou_sum += iou;
      ++iou_n;
    }
    s.per_class_acc.push_back(acc);
    s.per_class_iou.push_back(iou);
  }
  s.pixel_acc = double(trace) / double(total);
  s.mean_acc = acc_n ? acc_sum / double(acc_n) : 0.0;
  s.miou = iou_n ? iou_sum / double(iou_n) : 0.0;
  return s;
}

enum class AucMode { PerImage, Pooled };

struct MetricConfig {
  double beta_squared = 0.3;
  std::size_t num_thresholds = 256;
  AucMode auc_mode = AucMode::PerImage;

  void validate() const {
    detail::require(beta_squared > 0.0, "MetricConfig: beta_squared must be > 0");
    detail::require(num_thresholds >= 2, "MetricConfig: need at least 2 thresholds");
  }

  double threshold(std::size_t i) const { return double(i) / double(num_thresholds - 1); }
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct SaliencyScore {
  double f_measure_max = 0.0;
  double best_threshold = 0.0;
  double auc = 0.0;
  double mae = 0.0;
  std::vector<PrPoint> pr_curve;    // ascending threshold
  std::vector<RocPoint> roc_curve;  // ascending threshold, so descending fpr
  // Ground truth had no positives or no negatives; recall or fpr was
  // undefined and reported as 0.
  bool degenerate = false;
};

inline double f_beta(double precision, double recall, double beta_squared) {
  const double denom = beta_squared * precision + recall;
  return denom > 0.0 ? (1.0 + beta_squared) * precision * recall / denom : 0.0;
}

/// Area under a ROC curve given in any threshold order, closed with (0,0) and
/// (1,1).
inline double roc_auc(std::vector<RocPoint> roc) {
  roc.push_back({0.0, 0.0});
  roc.push_back({1.0, 1.0});
  std::sort(roc.begin(), roc.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  double auc = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    auc += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) * 0.5;
  }
  return auc;
}

/// Per-threshold true/false positive counts of one image.
struct ThresholdCounts {
  std::vector<std::uint64_t> tp, fp;
  std::uint64_t positives = 0, negatives = 0;
  double abs_error_sum = 0.0;

  std::size_t pixels() const { return positives + negatives; }

  ThresholdCounts& operator+=(const ThresholdCounts& o) {
    detail::require(o.tp.size() == tp.size(), "ThresholdCounts: grid mismatch");
    for (std::size_t i = 0; i < tp.size(); ++i) {
      tp[i] += o.tp[i];
      fp[i] += o.fp[i];
    }
    positives += o.positives;
    negatives += o.negatives;
    abs_error_sum += o.abs_error_sum;
    return *this;
  }
};

inline ThresholdCounts threshold_counts(const SaliencyMap& pred, const BinaryMask& gt,
                                        const MetricConfig& cfg) {
  cfg.validate();
  detail::require_same_dims(pred, gt, "saliency_scores");
  const std::size_t n = cfg.num_thresholds;
  const double steps = double(n - 1);
  // passes[k]: pixels that clear exactly thresholds 0..k-1.
  std::vector<std::uint64_t> pos_passes(n + 1, 0), neg_passes(n + 1, 0);
  ThresholdCounts out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double v = pred[i];
    auto k = static_cast<std::size_t>(std::floor(v * steps));
    // Correct the floor estimate against the exact comparison v >= t_k.
    while (k + 1 < n && v >= cfg.threshold(k + 1)) ++k;
    while (k > 0 && v < cfg.threshold(k)) --k;
    const std::size_t passes = v >= cfg.threshold(k) ? k + 1 : 0;
    if (gt[i]) {
      ++pos_passes[passes];
      ++out.positives;
      out.abs_error_sum += 1.0 - v;
    } else {
      ++neg_passes[passes];
      ++out.negatives;
      out.abs_error_sum += v;
    }
  }
  out.tp.assign(n, 0);
  out.fp.assign(n, 0);
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t t = n; t-- > 0;) {
    tp += pos_passes[t + 1];
    fp += neg_passes[t + 1];
    out.tp[t] = tp;
    out.fp[t] = fp;
  }
  return out;
}

namespace detail {

inline void fill_curves(const ThresholdCounts& c, const MetricConfig& cfg, SaliencyScore& s) {
  s.pr_curve.clear();
  s.roc_curve.clear();
  s.degenerate = c.positives == 0 || c.negatives == 0;
  for (std::size_t t = 0; t < cfg.num_thresholds; ++t) {
    const std::uint64_t predicted = c.tp[t] + c.fp[t];
    const double precision = predicted ? double(c.tp[t]) / double(predicted) : 0.0;
    const double recall = c.positives ? double(c.tp[t]) / double(c.positives) : 0.0;
    const double fpr = c.negatives ? double(c.fp[t]) / double(c.negatives) : 0.0;
    s.pr_curve.push_back({cfg.threshold(t), precision, recall});
    s.roc_curve.push_back({fpr, recall});
  }
  s.f_measure_max = 0.0;
  for (const auto& p : s.pr_curve) {
    const double f = f_beta(p.precision, p.recall, cfg.beta_squared);
    if (f > s.f_measure_max) {
      s.f_measure_max = f;
      s.best_threshold = p.threshold;
    }
  }
  s.auc = roc_auc(s.roc_curve);
}

}  // namespace detail

inline SaliencyScore saliency_scores(const SaliencyMap& pred, const BinaryMask& gt,
                                     const MetricConfig& cfg = {}) {
  const ThresholdCounts c = threshold_counts(pred, gt, cfg);
  SaliencyScore s;
  detail::fill_curves(c, cfg, s);
  s.mae = c.pixels() ? c.abs_error_sum / double(c.pixels()) : 0.0;
  return s;
}

/// Dataset-level saliency evaluation. Precision and recall are averaged across
/// images per threshold before F is taken; AUC is averaged per image over
/// non-degenerate images (or computed on pooled pixels); MAE is the mean of
/// per-image MAE.
class SaliencyAccumulator {
 public:
  explicit SaliencyAccumulator(MetricConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    precision_sum_.assign(cfg_.num_thresholds, 0.0);
    recall_sum_.assign(cfg_.num_thresholds, 0.0);
    pooled_.tp.assign(cfg_.num_thresholds, 0);
    pooled_.fp.assign(cfg_.num_thresholds, 0);
  }

  const MetricConfig& config() const { return cfg_; }
  std::size_t num_images() const { return images_; }

  SaliencyScore add(const SaliencyMap& pred, const BinaryMask& gt) {
    const ThresholdCounts c = threshold_counts(pred, gt, cfg_);
    SaliencyScore s;
    detail::fill_curves(c, cfg_, s);
    s.mae = c.pixels() ? c.abs_error_sum / double(c.pixels()) : 0.0;
    for (std::size_t t = 0; t < cfg_.num_thresholds; ++t) {
      precision_sum_[t] += s.pr_curve[t].precision;
      recall_sum_[t] += s.pr_curve[t].recall;
    }
    if (!s.degenerate) {
      auc_sum_ += s.auc;
      ++auc_images_;
    }
    mae_sum_ += s.mae;
    max_f_sum_ += s.f_measure_max;
    pooled_ += c;
    ++images_;
    return s;
  }

  SaliencyAccumulator& operator+=(const SaliencyAccumulator& o) {
    detail::require(o.cfg_.num_thresholds == cfg_.num_thresholds, "SaliencyAccumulator: grid mismatch");
    for (std::size_t t = 0; t < cfg_.num_thresholds; ++t) {
      precision_sum_[t] += o.precision_sum_[t];
      recall_sum_[t] += o.recall_sum_[t];
    }
    auc_sum_ += o.auc_sum_;
    auc_images_ += o.auc_images_;
    mae_sum_ += o.mae_sum_;
    max_f_sum_ += o.max_f_sum_;
    pooled_ += o.pooled_;
    images_ += o.images_;
    return *this;
  }

  SaliencyScore result() const {
    detail::require(images_ > 0, "SaliencyAccumulator: no images");
    SaliencyScore s;
    const double n = double(images_);
    for (std::size_t t = 0; t < cfg_.num_thresholds; ++t) {
      s.pr_curve.push_back({cfg_.threshold(t), precision_sum_[t] / n, recall_sum_[t] / n});
    }
    for (const auto& p : s.pr_curve) {
      const double f = f_beta(p.precision, p.recall, cfg_.beta_squared);
      if (f > s.f_measure_max) {
        s.f_measure_max = f;
        s.best_threshold = p.threshold;
      }
    }
    SaliencyScore pooled;
    detail::fill_curves(pooled_, cfg_, pooled);
    s.roc_curve = pooled.roc_curve;
    if (cfg_.auc_mode == AucMode::Pooled) {
      s.auc = pooled.auc;
      s.degenerate = pooled.degenerate;
    } else {
      s.auc = auc_images_ ? auc_sum_ / double(auc_images_) : 0.0;
      s.degenerate = auc_images_ < images_;
    }
    s.mae = mae_sum_ / n;
    return s;
  }

  /// Mean over images of the per-image maximum F.
  double mean_image_max_f() const { return images_ ? max_f_sum_ / double(images_) : 0.0; }

 private:
  MetricConfig cfg_;
  std::vector<double> precision_sum_, recall_sum_;
  ThresholdCounts pooled_;
  double auc_sum_ = 0.0, mae_sum_ = 0.0, max_f_sum_ = 0.0;
  std::size_t auc_images_ = 0, images_ = 0;
};

}  // namespace sdslab
