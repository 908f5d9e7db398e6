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

// Text renderings of the dataset statistics: CSV tables (fractions rounded to
// two decimals), JSON at full precision, and an SVG grouped bar chart.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdslab/dataset_stats.hpp"
#include "sdslab/mask.hpp"

namespace sdslab {

namespace detail {

inline std::string fixed2(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline nlohmann::json nan_as_null(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

}  // namespace detail

/// Distribution table, one column per category. The Rank-k(%) rows are
/// relative to all appearances of the category, as in the published table.
inline std::string distribution_csv(const CategoryDistribution& d, const CategoryTaxonomy& tax) {
  detail::require(d.num_categories() == tax.size(), "distribution_csv: taxonomy size mismatch");
  std::ostringstream os;
  auto row = [&](const std::string& label, auto&& cell) {
    os << label;
    for (std::size_t c = 1; c <= d.num_categories(); ++c) os << ',' << cell(d.at(c));
    os << '\n';
  };
  os << "categories";
  for (const auto& n : tax.names()) os << ',' << n;
  os << '\n';
  row("overall", [](const CategoryCounts& c) { return std::to_string(c.overall); });
  row("salient", [](const CategoryCounts& c) { return std::to_string(c.salient); });
  row("salient alone", [](const CategoryCounts& c) { return std::to_string(c.salient_alone); });
  row("Distrib", [](const CategoryCounts& c) { return detail::fixed2(c.distrib()); });
  for (std::size_t k = 1; k <= 3; ++k) {
    const std::string name = "Rank-" + std::to_string(k);
    row(name, [k](const CategoryCounts& c) { return std::to_string(c.rank_count[k - 1]); });
    row(name + "(%)", [k](const CategoryCounts& c) { return detail::fixed2(c.rank_frac_overall(k)); });
  }
  return os.str();
}

inline nlohmann::json to_json(const CategoryDistribution& d, const CategoryTaxonomy& tax) {
  nlohmann::json cats = nlohmann::json::array();
  for (std::size_t c = 1; c <= d.num_categories(); ++c) {
    const auto& k = d.at(c);
    cats.push_back({{"category", c},
                    {"name", tax.name(c)},
                    {"overall", k.overall},
                    {"salient", k.salient},
                    {"salient_alone", k.salient_alone},
                    {"distrib", k.distrib()},
                    {"rank_count", {k.rank_count[0], k.rank_count[1], k.rank_count[2]}},
                    {"rank_frac", {k.rank_frac(1), k.rank_frac(2), k.rank_frac(3)}},
                    {"rank_frac_overall",
                     {k.rank_frac_overall(1), k.rank_frac_overall(2), k.rank_frac_overall(3)}}});
  }
  return {{"images", d.num_images()}, {"categories", std::move(cats)}};
}

inline std::string cooccurrence_counts_csv(const CooccurrenceMatrix& m, const CategoryTaxonomy& tax) {
  std::ostringstream os;
  os << "row\\col";
  for (const auto& n : tax.names()) os << ',' << n;
  os << '\n';
  for (std::size_t a = 1; a <= m.num_categories(); ++a) {
    os << tax.name(a);
    for (std::size_t b = 1; b <= m.num_categories(); ++b) os << ',' << m.count(a, b);
    os << '\n';
  }
  return os.str();
}

/// P(row ranked above column); "-" where the pair never co-occurs.
inline std::string precedence_csv(const CooccurrenceMatrix& m, const CategoryTaxonomy& tax) {
  std::ostringstream os;
  os << "row\\col";
  for (const auto& n : tax.names()) os << ',' << n;
  os << '\n';
  for (std::size_t a = 1; a <= m.num_categories(); ++a) {
    os << tax.name(a);
    for (std::size_t b = 1; b <= m.num_categories(); ++b) {
      os << ',' << (a == b ? std::string("-") : detail::fixed2(m.precedence(a, b)));
    }
    os << '\n';
  }
  return os.str();
}

inline std::string case_study_csv(const CaseStudy& cs, const CategoryTaxonomy& tax) {
  std::ostringstream os;
  os << "focus,category,count," << tax.name(cs.focus) << "_higher,category_higher\n";
  for (const auto& r : cs.rows) {
    os << tax.name(cs.focus) << ',' << tax.name(r.category) << ',' << r.count << ','
       << detail::fixed2(r.focus_higher) << ',' << detail::fixed2(r.other_higher) << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const CooccurrenceMatrix& m, const CategoryTaxonomy& tax) {
  const std::size_t n = m.num_categories();
  nlohmann::json counts = nlohmann::json::array(), prec = nlohmann::json::array(),
                 ties = nlohmann::json::array();
  for (std::size_t a = 1; a <= n; ++a) {
    nlohmann::json rc = nlohmann::json::array(), rp = nlohmann::json::array(),
                   rt = nlohmann::json::array();
    for (std::size_t b = 1; b <= n; ++b) {
      rc.push_back(m.count(a, b));
      rp.push_back(detail::nan_as_null(m.precedence(a, b)));
      rt.push_back(m.tied(a, b));
    }
    counts.push_back(std::move(rc));
    prec.push_back(std::move(rp));
    ties.push_back(std::move(rt));
  }
  return {{"categories", tax.names()}, {"counts", counts}, {"precedence", prec}, {"ties", ties}};
}

inline nlohmann::json to_json(const CaseStudy& cs, const CategoryTaxonomy& tax) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : cs.rows) {
    rows.push_back({{"category", tax.name(r.category)},
                    {"count", r.count},
                    {"focus_higher", detail::nan_as_null(r.focus_higher)},
                    {"category_higher", detail::nan_as_null(r.other_higher)}});
  }
  return {{"focus", tax.name(cs.focus)}, {"rows", std::move(rows)}};
}

/// Three stacked panels of rank-1/2/3 bars per category: absolute counts,
/// counts relative to salient appearances, and counts relative to all
/// appearances on a log axis.
inline std::string distribution_svg(const CategoryDistribution& d, const CategoryTaxonomy& tax) {
  const std::size_t n = d.num_categories();
  const double panel_w = 40.0 + 36.0 * double(n), panel_h = 180.0, gap = 60.0;
  const double left = 50.0, top = 30.0;
  const char* colors[3] = {"#1f4e9c", "#2e9c3a", "#e6c229"};
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  const double total_h = top + 3.0 * (panel_h + gap);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + panel_w + 20.0 << "\" height=\""
     << total_h << "\" font-family=\"sans-serif\" font-size=\"10\">\n";

  std::size_t max_count = 1;
  for (std::size_t c = 1; c <= n; ++c) {
    for (auto v : d.at(c).rank_count) max_count = std::max(max_count, v);
  }

  const char* titles[3] = {"count", "fraction of salient appearances",
                           "fraction of all appearances (log)"};
  for (int panel = 0; panel < 3; ++panel) {
    const double y0 = top + panel * (panel_h + gap);
    const double base = y0 + panel_h;
    os << "<g class=\"panel\">\n";
    os << "<text x=\"" << left << "\" y=\"" << y0 - 8.0 << "\">" << titles[panel] << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << base << "\" x2=\"" << left + panel_w << "\" y2=\""
       << base << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y0 << "\" x2=\"" << left << "\" y2=\"" << base
       << "\" stroke=\"black\"/>\n";
    for (std::size_t c = 1; c <= n; ++c) {
      const auto& k = d.at(c);
      const double gx = left + 10.0 + 36.0 * double(c - 1);
      for (std::size_t r = 0; r < 3; ++r) {
        double h = 0.0;
        if (panel == 0) {
          h = panel_h * double(k.rank_count[r]) / double(max_count);
        } else if (panel == 1) {
          h = panel_h * k.rank_frac(r + 1);
        } else {
          const double v = k.rank_frac_overall(r + 1);
          // Axis spans [0.01, 1].
          if (v > 0.0) h = panel_h * std::clamp((std::log10(v) + 2.0) / 2.0, 0.0, 1.0);
        }
        if (h <= 0.0) continue;
        os << "<rect x=\"" << gx + 9.0 * double(r) << "\" y=\"" << base - h << "\" width=\"8\" height=\""
           << h << "\" fill=\"" << colors[r] << "\"/>\n";
      }
      os << "<text x=\"" << gx + 13.0 << "\" y=\"" << base + 12.0
         << "\" text-anchor=\"middle\">" << tax.name(c) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sdslab
