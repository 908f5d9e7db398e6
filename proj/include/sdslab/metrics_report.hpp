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
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdslab/mask.hpp"
#include "sdslab/metrics.hpp"

namespace sdslab {

namespace detail {

inline std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline nlohmann::json or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace detail

inline nlohmann::json to_json(const SaliencyScore& s, const MetricConfig& cfg) {
  nlohmann::json pr = nlohmann::json::array(), roc = nlohmann::json::array();
  for (const auto& p : s.pr_curve) pr.push_back({p.threshold, p.precision, p.recall});
  for (const auto& p : s.roc_curve) roc.push_back({p.fpr, p.tpr});
  return {{"f_measure_max", s.f_measure_max},
          {"best_threshold", s.best_threshold},
          {"auc", s.auc},
          {"mae", s.mae},
          {"degenerate", s.degenerate},
          {"beta_squared", cfg.beta_squared},
          {"num_thresholds", cfg.num_thresholds},
          {"auc_mode", cfg.auc_mode == AucMode::Pooled ? "pooled" : "per_image"},
          {"pr_curve", std::move(pr)},
          {"roc_curve", std::move(roc)}};
}

/// One row in the column order Fm, AUC, MAE.
inline std::string saliency_csv(const SaliencyScore& s) {
  return "Fm,AUC,MAE\n" + detail::fixed(s.f_measure_max, 3) + "," + detail::fixed(s.auc, 3) + "," +
         detail::fixed(s.mae, 3) + "\n";
}

/// Class 0 is background; per-class IoU is null where the class never occurs.
inline nlohmann::json to_json(const SegmentationScores& s, const CategoryTaxonomy& tax) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < s.per_class_iou.size(); ++c) {
    per_class.push_back({{"category", c},
                         {"name", tax.name(c)},
                         {"iou", detail::or_null(s.per_class_iou[c])},
                         {"accuracy", detail::or_null(s.per_class_acc[c])}});
  }
  return {{"pixel_acc", s.pixel_acc}, {"mean_acc", s.mean_acc}, {"miou", s.miou}, {"per_class", per_class}};
}

/// Summary row (Pixel Acc., Mean Acc., mIoU), a blank line, then per-class
/// IoU with one column per class.
inline std::string segmentation_csv(const SegmentationScores& s, const CategoryTaxonomy& tax) {
  std::ostringstream os;
  os << "Pixel Acc.,Mean Acc.,mIoU\n"
     << detail::fixed(s.pixel_acc, 3) << ',' << detail::fixed(s.mean_acc, 3) << ',' << detail::fixed(s.miou, 3)
     << "\n\n";
  for (std::size_t c = 0; c < s.per_class_iou.size(); ++c) os << (c ? "," : "") << tax.name(c);
  os << '\n';
  for (std::size_t c = 0; c < s.per_class_iou.size(); ++c) os << (c ? "," : "") << detail::fixed(s.per_class_iou[c], 2);
  os << '\n';
  return os.str();
}

}  // namespace sdslab
