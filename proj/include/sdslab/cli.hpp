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

// Command-line front end. Exit codes: 0 success, 1 validation or domain
// error, 2 I/O error.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdslab/sdslab.hpp"

namespace sdslab::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kDomainError = 1, kIoError = 2 };

struct RankedDataset {
  CategoryTaxonomy taxonomy;
  std::vector<RankTable> tables;
  std::vector<AnnotatedMask> masks;
};

/// Ranks every record of a manifest, one image per task.
inline RankedDataset rank_manifest(const io::DatasetManifest& m, const RankConfig& cfg) {
  const CategoryTaxonomy tax = m.taxonomy();
  auto ranked = parallel_map(m.records.size(), [&](std::size_t i) {
    const auto& r = m.records[i];
    if (r.semantic.empty() || r.saliency.empty()) {
      throw DomainError("record '" + r.id + "' lacks a semantic or saliency path");
    }
    LabelMask sem = io::load_semantic_mask(m.resolve(r.semantic), tax.size());
    const SaliencyMap sal = io::load_saliency_map(m.resolve(r.saliency));
    try {
      RankTable t = semantic_rank(sem, sal, cfg, r.id);
      return std::make_pair(std::move(t), AnnotatedMask{r.id, std::move(sem)});
    } catch (const DomainError& e) {
      throw DomainError(r.id + ": " + e.what());
    }
  });
  RankedDataset out{tax, {}, {}};
  for (auto& [t, a] : ranked) {
    out.tables.push_back(std::move(t));
    out.masks.push_back(std::move(a));
  }
  return out;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    io::write_text(out_path, text);
  }
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

inline std::string rank_tables_csv(const std::vector<RankTable>& tables, const CategoryTaxonomy& tax) {
  std::ostringstream os;
  os.precision(17);
  os << "image,category,name,rank_value,coverage,rank_position\n";
  for (const auto& t : tables) {
    for (const auto& e : t.entries) {
      os << t.image << ',' << e.category << ',' << tax.name(e.category) << ',' << e.rank_value << ','
         << e.coverage << ',';
      if (e.rank_position) os << *e.rank_position;
      os << '\n';
    }
  }
  return os.str();
}

struct Common {
  double tau = RankConfig{}.coverage_threshold;
  double floor = RankConfig{}.saliency_floor;
  double beta2 = MetricConfig{}.beta_squared;
  std::size_t thresholds = MetricConfig{}.num_thresholds;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";

  RankConfig rank_config() const {
    RankConfig c;
    c.coverage_threshold = tau;
    c.saliency_floor = floor;
    return c;
  }
};

inline void add_rank_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--tau", c.tau, "coverage threshold for a valid overlap")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--floor", c.floor, "saliency values at or below this do not count as overlap");
}

inline void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "report format")->check(CLI::IsMember({"json", "csv"}));
}

inline net::Tensor4 random_input(std::size_t size, std::uint64_t seed) {
  net::Tensor4 x({1, 3, size, size});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : x.data()) v = u(rng);
  return x;
}

inline std::vector<net::TrainingSample> load_training_set(const io::DatasetManifest& m) {
  const auto train = m.subset(io::Split::Train);
  const auto& records = train.records.empty() ? m.records : train.records;
  const std::size_t c = m.taxonomy().size();
  std::vector<net::TrainingSample> out;
  for (const auto& r : records) {
    if (r.image.empty()) throw DomainError("record '" + r.id + "' has no image for training");
    out.push_back({io::load_rgb_image(m.resolve(r.image)), io::load_semantic_mask(m.resolve(r.semantic), c),
                   io::binarize(io::load_saliency_map(m.resolve(r.saliency)))});
  }
  return out;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"sdslab: joint semantic segmentation and saliency laboratory"};
  app.require_subcommand(1);
  Common c;

  // rank
  std::string rank_target, rank_manifest_path = "manifest.json", rank_sem, rank_sal;
  auto* rank = app.add_subcommand("rank", "rank the semantic categories of one image or a whole manifest");
  rank->add_option("target", rank_target, "manifest (.json) or image id");
  rank->add_option("--manifest", rank_manifest_path, "manifest used to resolve an image id");
  rank->add_option("--semantic", rank_sem, "semantic mask PNG (with --saliency)");
  rank->add_option("--saliency", rank_sal, "saliency map PNG (with --semantic)");
  add_rank_flags(rank, c);
  add_format(rank, c);
  rank->add_option("--out", c.out, "output file (default stdout)");

  // stats
  std::string stats_manifest;
  auto* stats = app.add_subcommand("stats", "category distribution table and chart");
  stats->add_option("manifest", stats_manifest)->required();
  add_rank_flags(stats, c);
  std::string table_format = "csv";  // stats and cooccur default to tables
  stats->add_option("--format", table_format)->check(CLI::IsMember({"json", "csv"}));
  stats->add_option("--out", c.out, "output directory (default: table to stdout, no chart)");

  // cooccur
  std::string co_manifest, focus;
  std::size_t top = 7;
  auto* co = app.add_subcommand("cooccur", "salient co-occurrence and precedence matrices");
  co->add_option("manifest", co_manifest)->required();
  co->add_option("--focus", focus, "category name for a focused case study");
  co->add_option("--top", top, "rows in the case study");
  add_rank_flags(co, c);
  co->add_option("--format", table_format)->check(CLI::IsMember({"json", "csv"}));
  co->add_option("--out", c.out, "output directory (default stdout)");

  // eval-sal / eval-sem
  std::string pred_manifest, gt_manifest, auc_mode = "per-image";
  double gt_threshold = 0.5;
  auto* esal = app.add_subcommand("eval-sal", "saliency metrics (F-measure, AUC, MAE)");
  esal->add_option("pred", pred_manifest, "manifest of predicted saliency maps")->required();
  esal->add_option("gt", gt_manifest, "manifest of ground-truth saliency maps")->required();
  esal->add_option("--beta2", c.beta2, "beta squared of the F-measure");
  esal->add_option("--thresholds", c.thresholds, "number of thresholds over [0, 1]");
  esal->add_option("--gt-threshold", gt_threshold, "binarisation threshold of the ground truth");
  esal->add_option("--auc-mode", auc_mode)->check(CLI::IsMember({"per-image", "pooled"}));
  add_format(esal, c);
  esal->add_option("--out", c.out, "output file (default stdout)");

  auto* esem = app.add_subcommand("eval-sem", "segmentation metrics (pixel/mean accuracy, IoU)");
  esem->add_option("pred", pred_manifest, "manifest of predicted semantic masks")->required();
  esem->add_option("gt", gt_manifest, "manifest of ground-truth semantic masks")->required();
  add_format(esem, c);
  esem->add_option("--out", c.out, "output file (default stdout)");

  // train
  std::string train_config;
  auto* tr = app.add_subcommand("train", "train one network variant with gradient descent");
  tr->add_option("config", train_config, "key = value config file")->required();
  tr->add_option("--seed", c.seed, "overrides the config seed");
  tr->add_option("--out", c.out, "output directory")->required();

  // gradcheck
  std::string gc_config, gc_variant;
  std::size_t gc_size = 16;
  double gc_tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "compare backprop with central finite differences");
  gc->add_option("--config", gc_config, "key = value config file");
  gc->add_option("--variant", gc_variant, "v0..v4 (overrides the config)");
  gc->add_option("--size", gc_size, "input height and width (multiple of 8)");
  gc->add_option("--tol", gc_tol, "maximum relative error");
  gc->add_option("--seed", c.seed, "initialisation and input seed");

  // synth
  std::string synth_spec;
  std::size_t synth_count = 10, synth_size = 32, synth_categories = 3, synth_train = 0;
  bool synth_train_set = false;
  auto* sy = app.add_subcommand("synth", "write a synthetic dataset with planted ranks");
  sy->add_option("spec", synth_spec, "scene spec JSON (one scene or a list); random scenes if omitted");
  sy->add_option("--count", synth_count, "number of random scenes");
  sy->add_option("--size", synth_size, "canvas width and height");
  sy->add_option("--categories", synth_categories, "number of foreground categories");
  sy->add_option("--seed", c.seed);
  auto* train_opt = sy->add_option("--train-count", synth_train, "records assigned to the train split");
  add_rank_flags(sy, c);
  sy->add_option("--out", c.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kDomainError;
  }
  synth_train_set = train_opt->count() > 0;

  if (*stats || *co) c.format = table_format;
  try {
    if (*rank) {
      const RankConfig cfg = c.rank_config();
      std::vector<RankTable> tables;
      CategoryTaxonomy tax = CategoryTaxonomy::voc();
      if (!rank_sem.empty() || !rank_sal.empty()) {
        if (rank_sem.empty() || rank_sal.empty()) throw DomainError("rank: --semantic and --saliency go together");
        tables.push_back(semantic_rank(io::load_semantic_mask(rank_sem, tax.size()),
                                       io::load_saliency_map(rank_sal), cfg,
                                       rank_target.empty() ? fs::path(rank_sem).stem().string() : rank_target));
      } else if (fs::path(rank_target).extension() == ".json" && fs::exists(rank_target)) {
        const auto m = io::load_manifest(rank_target);
        auto ranked = rank_manifest(m, cfg);
        tax = ranked.taxonomy;
        tables = std::move(ranked.tables);
      } else {
        if (rank_target.empty()) throw DomainError("rank: give a manifest, an image id, or --semantic/--saliency");
        auto m = io::load_manifest(rank_manifest_path);
        m.records = {m.find(rank_target)};
        auto ranked = rank_manifest(m, cfg);
        tax = ranked.taxonomy;
        tables = std::move(ranked.tables);
      }
      if (c.format == "csv") {
        emit(rank_tables_csv(tables, tax), c.out, out);
      } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& t : tables) j.push_back(to_json(t, tax));
        emit((tables.size() == 1 ? j[0] : j).dump(2) + "\n", c.out, out);
      }
    } else if (*stats) {
      const auto m = io::load_manifest(stats_manifest);
      const auto ranked = rank_manifest(m, c.rank_config());
      const auto dist = distribution(ranked.tables, ranked.masks, ranked.taxonomy.size());
      const std::string report = c.format == "csv" ? distribution_csv(dist, ranked.taxonomy)
                                                   : to_json(dist, ranked.taxonomy).dump(2) + "\n";
      if (c.out.empty()) {
        out << report;
      } else {
        ensure_dir(c.out);
        io::write_text(fs::path(c.out) / (c.format == "csv" ? "table2.csv" : "stats.json"), report);
        io::write_text(fs::path(c.out) / "fig3.svg", distribution_svg(dist, ranked.taxonomy));
      }
    } else if (*co) {
      const auto m = io::load_manifest(co_manifest);
      const auto ranked = rank_manifest(m, c.rank_config());
      const auto& tax = ranked.taxonomy;
      const auto matrix = cooccurrence(ranked.tables, tax.size(), c.rank_config().tie_epsilon);
      std::optional<CaseStudy> cs;
      if (!focus.empty()) cs = case_study(matrix, tax.index_of(focus), top);
      if (c.format == "json") {
        nlohmann::json j = to_json(matrix, tax);
        if (cs) j["case_study"] = to_json(*cs, tax);
        if (c.out.empty()) {
          out << j.dump(2) << '\n';
        } else {
          ensure_dir(c.out);
          io::write_text(fs::path(c.out) / "cooccurrence.json", j.dump(2) + "\n");
        }
      } else if (c.out.empty()) {
        out << cooccurrence_counts_csv(matrix, tax) << '\n' << precedence_csv(matrix, tax);
        if (cs) out << '\n' << case_study_csv(*cs, tax);
      } else {
        ensure_dir(c.out);
        io::write_text(fs::path(c.out) / "table3_counts.csv", cooccurrence_counts_csv(matrix, tax));
        io::write_text(fs::path(c.out) / "table3_precedence.csv", precedence_csv(matrix, tax));
        if (cs) io::write_text(fs::path(c.out) / "table4_case_study.csv", case_study_csv(*cs, tax));
      }
    } else if (*esal) {
      MetricConfig mc;
      mc.beta_squared = c.beta2;
      mc.num_thresholds = c.thresholds;
      mc.auc_mode = auc_mode == "pooled" ? AucMode::Pooled : AucMode::PerImage;
      mc.validate();
      const auto pm = io::load_manifest(pred_manifest);
      const auto gm = io::load_manifest(gt_manifest);
      const auto pairs = io::join_by_id(pm, gm);
      auto parts = parallel_map(pairs.size(), [&](std::size_t i) {
        SaliencyAccumulator acc(mc);
        const auto pred = io::load_saliency_map(pm.resolve(pairs[i].first->saliency));
        const auto gt = io::binarize(io::load_saliency_map(gm.resolve(pairs[i].second->saliency)), gt_threshold);
        try {
          acc.add(pred, gt);
        } catch (const DomainError& e) {
          throw DomainError(pairs[i].first->id + ": " + e.what());
        }
        return acc;
      });
      SaliencyAccumulator total(mc);
      for (const auto& p : parts) total += p;
      const SaliencyScore score = total.result();
      if (c.format == "csv") {
        emit(saliency_csv(score), c.out, out);
      } else {
        nlohmann::json j = to_json(score, mc);
        j["images"] = total.num_images();
        j["mean_image_max_f"] = total.mean_image_max_f();
        emit(j.dump(2) + "\n", c.out, out);
      }
    } else if (*esem) {
      const auto pm = io::load_manifest(pred_manifest);
      const auto gm = io::load_manifest(gt_manifest);
      const auto tax = gm.taxonomy();
      const auto pairs = io::join_by_id(pm, gm);
      auto parts = parallel_map(pairs.size(), [&](std::size_t i) {
        const auto pred = io::load_semantic_mask(pm.resolve(pairs[i].first->semantic), tax.size());
        const auto gt = io::load_semantic_mask(gm.resolve(pairs[i].second->semantic), tax.size());
        try {
          return confusion(pred, gt);
        } catch (const DomainError& e) {
          throw DomainError(pairs[i].first->id + ": " + e.what());
        }
      });
      ConfusionMatrix cm(tax.size() + 1);
      for (const auto& p : parts) cm += p;
      const auto scores = segmentation_scores(cm);
      emit(c.format == "csv" ? segmentation_csv(scores, tax) : to_json(scores, tax).dump(2) + "\n", c.out, out);
    } else if (*tr) {
      auto rc = net::RunConfig::from(net::load_key_values(train_config));
      if (tr->count("--seed")) rc.hyper.seed = c.seed;
      std::vector<net::TrainingSample> data;
      if (rc.manifest.empty()) {
        data.push_back(io::synthetic_sample(rc.image_size, rc.num_categories, rc.hyper.seed));
      } else {
        const fs::path mp = fs::path(train_config).parent_path() / rc.manifest;
        const auto m = io::load_manifest(fs::path(rc.manifest).is_absolute() ? fs::path(rc.manifest) : mp);
        rc.num_categories = m.taxonomy().size();
        data = load_training_set(m);
      }
      const auto vc = rc.variant_config();
      const auto result = net::train(vc, data, rc.hyper);
      ensure_dir(c.out);
      net::save_checkpoint(fs::path(c.out) / "params", vc, result.params);
      io::write_text(fs::path(c.out) / "loss.csv", net::loss_trace_csv(result.trace));
      if (!result.trace.empty()) {
        out << "variant=" << net::to_string(vc.variant) << " steps=" << result.trace.size()
            << " initial_loss=" << result.trace.front().total() << " final_loss=" << result.trace.back().total()
            << '\n';
      }
    } else if (*gc) {
      net::RunConfig rc;
      if (!gc_config.empty()) rc = net::RunConfig::from(net::load_key_values(gc_config));
      if (!gc_variant.empty()) rc.variant = net::parse_variant(gc_variant);
      if (gc->count("--seed") || gc_config.empty()) rc.hyper.seed = c.seed;
      detail::require(gc_size > 0 && gc_size % 8 == 0, "gradcheck: --size must be a positive multiple of 8");
      const net::Network network(rc.variant_config());
      const auto sample = io::synthetic_sample(gc_size, rc.num_categories, rc.hyper.seed);
      const auto x = random_input(gc_size, rc.hyper.seed);
      const auto sem = net::DenseLabels::from(net::downsample_labels(sample.semantic, gc_size / 8, gc_size / 8));
      const auto sal = net::DenseLabels::from(net::downsample_labels(sample.saliency, gc_size / 8, gc_size / 8));
      const auto report = net::gradient_check(network, network.init_params(rc.hyper.seed), x, sem, sal);
      const bool ok = report.passed(gc_tol);
      out << (ok ? "PASS" : "FAIL") << " variant=" << net::to_string(rc.variant)
          << " max_rel_err=" << report.max_rel_err << " checked=" << report.checked
          << " reduced_step=" << report.shrunk << " skipped=" << report.skipped
          << " worst_layer=" << report.worst_layer << '\n';
      return ok ? kOk : kDomainError;
    } else if (*sy) {
      std::vector<io::SyntheticSceneSpec> specs;
      if (!synth_spec.empty()) {
        std::ifstream in(synth_spec);
        if (!in) throw IoError("cannot open " + synth_spec);
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::exception& e) {
          throw IoError(synth_spec + ": " + e.what());
        }
        if (j.is_array()) {
          for (const auto& s : j) specs.push_back(io::scene_spec_from_json(s));
        } else {
          specs.push_back(io::scene_spec_from_json(j));
        }
      } else {
        const std::size_t regions = std::min<std::size_t>(synth_categories, 6);
        for (std::size_t i = 0; i < synth_count; ++i) {
          specs.push_back(io::random_scene_spec(synth_size, synth_size, synth_categories, std::min<std::size_t>(2, regions),
                                                regions, c.seed * 1000003ULL + i));
        }
      }
      ensure_dir(c.out);
      io::DatasetManifest m;
      m.base_dir = c.out;
      const std::size_t cats = specs.empty() ? synth_categories : specs.front().num_categories;
      m.categories = CategoryTaxonomy::numbered(cats).names();
      const auto tax = CategoryTaxonomy::numbered(cats);
      for (std::size_t i = 0; i < specs.size(); ++i) {
        detail::require(specs[i].num_categories == cats, "synth: all scenes must share one category count");
        char id[32];
        std::snprintf(id, sizeof id, "scene%04zu", i);
        const auto scene = io::generate_synthetic(specs[i], c.rank_config(), id);
        const std::string base = id;
        io::save_semantic_mask(fs::path(c.out) / (base + "_sem.png"), scene.semantic);
        io::save_saliency_map(fs::path(c.out) / (base + "_sal.png"), scene.saliency);
        io::save_rgb_image(fs::path(c.out) / (base + "_img.png"), io::render_image(scene.semantic, specs[i].seed));
        io::write_text(fs::path(c.out) / (base + "_expected.json"), to_json(scene.expected, tax).dump(2) + "\n");
        m.records.push_back({base, base + "_sem.png", base + "_sal.png", base + "_img.png", std::nullopt});
      }
      io::assign_split(m, c.seed, synth_train_set ? synth_train : m.records.size() / 2);
      io::save_manifest(fs::path(c.out) / "manifest.json", m);
      out << "wrote " << m.records.size() << " scenes to " << c.out << '\n';
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kOk;
}

}  // namespace sdslab::cli
