#pragma once

// Experiment harness behind the `gprda` command line: configuration loading,
// the pipeline commands and their run manifests.
//
// Output layout under the configured output directory:
//   source/, target/             datasets (target labels.csv holds case ids only)
//   truth/target_truth.csv       specimen ground truth, read only by evaluation
//   sobol/                       sobol.csv, sobol.svg, order.json
//   train/<approach>/            checkpoint.json, weights.f64, report.csv, predictions.csv, scan_predictions.csv
//   hier/<approach>/             audit.json, predictions.csv
//   eval/                        <parameter>.csv, <parameter>.svg, seeds.csv
//   manifests/<command>.json     config hash, versions, file inventory, timings

#include <Eigen/Core>
#include <fftw3.h>
#include <spdlog/spdlog.h>
#include <spdlog/version.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gprda/dataset.hpp"
#include "gprda/error.hpp"
#include "gprda/fdtd.hpp"
#include "gprda/hierarchy.hpp"
#include "gprda/io.hpp"
#include "gprda/metrics.hpp"
#include "gprda/models.hpp"
#include "gprda/params.hpp"
#include "gprda/sobol.hpp"
#include "gprda/train.hpp"

namespace gprda::harness {

namespace fs = std::filesystem;
using io::Json;

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& flat_approaches() {
  static const std::vector<std::string> v{"cnn", "dann", "phydann1", "phydann2"};
  return v;
}

inline const std::vector<std::string>& hier_approaches() {
  static const std::vector<std::string> v{"hierdann", "hierphydann1", "hierphydann2"};
  return v;
}

inline bool is_hier(const std::string& a) {
  const auto& h = hier_approaches();
  return std::find(h.begin(), h.end(), a) != h.end();
}

inline ModelKind approach_model(const std::string& a) {
  if (a == "cnn") return ModelKind::cnn;
  if (a == "dann" || a == "hierdann") return ModelKind::dann;
  if (a == "phydann1" || a == "hierphydann1") return ModelKind::phydann1;
  if (a == "phydann2" || a == "hierphydann2") return ModelKind::phydann2;
  throw ConfigError("unknown approach '" + a + "'");
}

struct ExperimentConfig {
  fs::path config_path;
  fs::path output_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fdtd::LayerStack stack;
  ParameterSpace grid;
  fdtd::RadarConfig source_radar;
  fdtd::RadarConfig target_radar;
  std::vector<Specimen> specimens;
  std::size_t scans_per_specimen = 25;
  std::size_t sobol_samples = 256;
  TrainConfig train;
  std::vector<std::string> approaches;
  std::vector<std::string> hier_order;  // empty: take the Sobol order
  bool hier_layered = false;
  std::size_t tolerance_steps = 0;
  std::vector<std::string> evaluate;    // parameters reported by eval
  std::vector<std::uint64_t> repeat_seeds;
  Json raw;

  std::uint64_t source_seed() const { return fdtd::derive_seed(seed, 100); }
  std::uint64_t target_seed() const { return fdtd::derive_seed(seed, 200); }
  std::uint64_t sobol_seed() const { return fdtd::derive_seed(seed, 300); }
};

namespace detail {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline fdtd::RadarConfig parse_radar(const Json& j, std::size_t trace_length) {
  fdtd::RadarConfig r;
  r.waveform = fdtd::parse_waveform(get_or<std::string>(j, "waveform", fdtd::to_string(r.waveform)));
  r.center_frequency = get_or(j, "center_frequency", r.center_frequency);
  r.time_window = get_or(j, "time_window", r.time_window);
  r.cells_per_min_wavelength = get_or(j, "cells_per_min_wavelength", r.cells_per_min_wavelength);
  r.courant_factor = get_or(j, "courant_factor", r.courant_factor);
  r.gain = get_or(j, "gain", r.gain);
  r.noise_std = get_or(j, "noise_std", r.noise_std);
  r.time_jitter = get_or(j, "time_jitter", r.time_jitter);
  r.trace_length = trace_length;
  r.validate();
  return r;
}

inline fdtd::LayerStack parse_stack(const Json& j) {
  fdtd::LayerStack s;
  s.air_gap = get_or(j, "air_gap", s.air_gap);
  s.bottom = fdtd::parse_bottom(get_or<std::string>(j, "bottom", fdtd::to_string(s.bottom)));
  for (const auto& l : j.at("layers")) {
    s.layers.push_back({l.at("permittivity").get<double>(), get_or(l, "conductivity", 0.0),
                        l.at("thickness").get<double>()});
  }
  s.validate();
  return s;
}

inline bool same_gap(const fdtd::RadarConfig& a, const fdtd::RadarConfig& b) {
  return a.waveform == b.waveform && a.center_frequency == b.center_frequency && a.gain == b.gain &&
         a.noise_std == b.noise_std && a.time_jitter == b.time_jitter;
}

}  // namespace detail

/// Parses the experiment JSON. Relative paths resolve against the config's
/// directory.
inline ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  ExperimentConfig c;
  c.config_path = fs::absolute(path);
  c.raw = io::read_json(path);
  const auto& j = c.raw;
  try {
    c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    c.workers = detail::get_or<std::size_t>(j, "workers", 1);
    c.output_dir = c.config_path.parent_path() / detail::get_or<std::string>(j, "output_dir", "out");
    const auto n = detail::get_or<std::size_t>(j, "trace_length", 1640);
    const auto& src = j.at("source");
    c.stack = detail::parse_stack(src.at("stack"));
    c.grid = parameter_space_from_json(src.at("grid"));
    for (const auto& p : c.grid.params) {
      if (!p.discrete()) throw ConfigError("source grid parameter '" + p.name + "' needs a step");
    }
    apply_parameters(c.stack, c.grid.names(), c.grid.grid_point(0)).validate();
    c.source_radar = detail::parse_radar(src.value("radar", Json::object()), n);
    const auto& tgt = j.at("target");
    c.target_radar = detail::parse_radar(tgt.value("radar", Json::object()), n);
    if (detail::same_gap(c.source_radar, c.target_radar)) {
      throw ConfigError("target radar must differ from the source radar in at least one gap setting");
    }
    c.scans_per_specimen = detail::get_or<std::size_t>(tgt, "scans_per_specimen", 25);
    for (const auto& s : tgt.at("specimens")) {
      Specimen sp;
      sp.case_id = s.at("case").get<std::string>();
      for (const auto& name : c.grid.names()) {
        if (!s.at("values").contains(name)) {
          throw ConfigError("specimen '" + sp.case_id + "' has no value for '" + name + "'");
        }
        sp.values.push_back(s.at("values").at(name).get<double>());
      }
      apply_parameters(c.stack, c.grid.names(), sp.values).validate();
      c.specimens.push_back(std::move(sp));
    }
    if (c.specimens.empty()) throw ConfigError("target: no specimens");
    if (j.contains("sobol")) c.sobol_samples = detail::get_or<std::size_t>(j.at("sobol"), "samples", 256);
    const auto tj = j.value("train", Json::object());
    c.train.epochs = detail::get_or(tj, "epochs", c.train.epochs);
    c.train.batch_size = detail::get_or(tj, "batch_size", c.train.batch_size);
    c.train.lr0 = detail::get_or(tj, "lr0", c.train.lr0);
    c.train.lr_decay = detail::get_or(tj, "lr_decay", c.train.lr_decay);
    c.train.optimizer.kind = nn::parse_optimizer(detail::get_or<std::string>(tj, "optimizer", "adam"));
    c.train.leaky_slope = detail::get_or(tj, "leaky_slope", c.train.leaky_slope);
    c.train.reconstruction_weight = detail::get_or(tj, "reconstruction_weight", c.train.reconstruction_weight);
    c.train.seed = c.seed;
    c.train.validate();
    c.approaches = detail::get_or(j, "approaches", std::vector<std::string>{"cnn", "dann", "hierdann", "phydann1",
                                                                           "hierphydann1", "phydann2",
                                                                           "hierphydann2"});
    for (const auto& a : c.approaches) approach_model(a);
    const auto hj = j.value("hierarchy", Json::object());
    if (hj.contains("order") && hj.at("order").is_array()) {
      c.hier_order = hj.at("order").get<std::vector<std::string>>();
      for (const auto& p : c.hier_order) c.grid.index_of(p);
    }
    c.hier_layered = detail::get_or(hj, "layered", false);
    c.tolerance_steps = detail::get_or<std::size_t>(hj, "tolerance_steps", 0);
    c.evaluate = detail::get_or(j, "evaluate", c.grid.names());
    for (const auto& p : c.evaluate) c.grid.index_of(p);
    if (j.contains("bench")) {
      c.repeat_seeds = detail::get_or(j.at("bench"), "repeat_seeds", std::vector<std::uint64_t>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return c;
}

/// Changes the master seed; dataset and training seeds follow it.
inline void set_seed(ExperimentConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.train.seed = seed;
}

inline std::string config_hash(const ExperimentConfig& c) {
  Json j = c.raw;
  j["seed"] = c.seed;
  return io::hex64(io::fnv1a(j.dump()));
}

// ---------------------------------------------------------------------------
// Run bookkeeping

class Run {
 public:
  Run(const ExperimentConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), t0_(std::chrono::steady_clock::now()) {}

  void add(const fs::path& p) { files_.push_back(p); }
  void add(const std::vector<fs::path>& ps) { files_.insert(files_.end(), ps.begin(), ps.end()); }
  void time(const std::string& step, double seconds) { timings_[step] = seconds; }

  /// Writes manifests/<command>.json and returns its path.
  fs::path finish() {
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    Json files = Json::array();
    std::set<fs::path> seen;
    for (const auto& f : files_) {
      if (!seen.insert(f).second) continue;
      std::ifstream in(f, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files.push_back({{"path", fs::relative(f, cfg_.output_dir).generic_string()},
                       {"bytes", fs::file_size(f)},
                       {"fnv1a", io::hex64(io::fnv1a(ss.str()))}});
    }
    Json timings = Json::object();
    for (const auto& [k, v] : timings_) timings[k] = v;
    timings["total"] = total;
    Json m{{"command", command_},
           {"config", cfg_.config_path.string()},
           {"config_hash", config_hash(cfg_)},
           {"seed", cfg_.seed},
           {"versions",
            {{"gprda", kVersion},
             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                           std::to_string(EIGEN_MINOR_VERSION)},
             {"fftw", std::string(fftw_version)},
             {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                            std::to_string(SPDLOG_VER_PATCH)},
             {"compiler", __VERSION__}}},
           {"files", files},
           {"timings_seconds", timings}};
    const auto path = cfg_.output_dir / "manifests" / (command_ + ".json");
    io::write_json(path, m);
    return path;
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<fs::path> files_;
  std::map<std::string, double> timings_;
};

template <typename Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline fs::path source_dir(const ExperimentConfig& c) { return c.output_dir / "source"; }
inline fs::path target_dir(const ExperimentConfig& c) { return c.output_dir / "target"; }
inline fs::path truth_file(const ExperimentConfig& c) { return c.output_dir / "truth" / "target_truth.csv"; }
inline fs::path sobol_dir(const ExperimentConfig& c) { return c.output_dir / "sobol"; }
inline fs::path approach_dir(const ExperimentConfig& c, const std::string& a) {
  return c.output_dir / (is_hier(a) ? "hier" : "train") / a;
}
inline fs::path eval_dir(const ExperimentConfig& c) { return c.output_dir / "eval"; }

inline void require(const fs::path& p) {
  if (!fs::exists(p)) throw DependencyError("missing upstream artifact " + p.string());
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_generate(const ExperimentConfig& c) {
  Run run(c, "generate");
  LabeledDataset source, target;
  run.time("source", timed([&] {
             source = generate_grid_dataset(c.grid, c.stack, c.source_radar, c.source_seed(), c.workers);
           }));
  spdlog::info("source: {} traces", source.size());
  run.add(write_dataset(source_dir(c), source,
                        {{"domain", "source"},
                         {"seed", c.source_seed()},
                         {"radar", to_json(c.source_radar)},
                         {"stack_template", to_json(c.stack)}}));
  run.time("target", timed([&] {
             target = generate_specimen_dataset(c.grid.names(), c.specimens, c.scans_per_specimen, c.stack,
                                                c.target_radar, c.target_seed(), c.workers);
           }));
  target.grid = c.grid;
  spdlog::info("target: {} scans over {} specimens", target.size(), c.specimens.size());
  run.add(write_dataset(target_dir(c), target,
                        {{"domain", "target"},
                         {"seed", c.target_seed()},
                         {"radar", to_json(c.target_radar)},
                         {"stack_template", to_json(c.stack)},
                         {"scans_per_specimen", c.scans_per_specimen}}));
  io::CsvTable truth;
  truth.header = {"case"};
  for (const auto& n : c.grid.names()) truth.header.push_back(n);
  for (const auto& s : c.specimens) {
    std::vector<std::string> row{s.case_id};
    for (double v : s.values) row.push_back(io::format_double(v));
    truth.rows.push_back(std::move(row));
  }
  io::write_csv(truth_file(c), truth);
  run.add(truth_file(c));
  run.finish();
}

inline SobolResult sobol_on_simulator(const ExperimentConfig& c, const SaltelliMatrices& mats) {
  const auto names = c.grid.names();
  SobolModel model = [&](const std::vector<double>& v) {
    return fdtd::simulate_ascan(apply_parameters(c.stack, names, v), c.source_radar, c.source_seed()).samples;
  };
  return first_order_indices(model, mats, names, {c.workers, 1e-9});
}

inline void cmd_sobol(const ExperimentConfig& c) {
  Run run(c, "sobol");
  SobolResult r;
  const auto mats = saltelli_matrices(c.sobol_samples, c.grid, c.sobol_seed());
  run.time("indices", timed([&] { r = sobol_on_simulator(c, mats); }));
  const double dt = c.source_radar.output_dt();
  io::write_csv(sobol_dir(c) / "sobol.csv", sobol_table(r, dt));
  io::write_text(sobol_dir(c) / "sobol.svg", sobol_svg(r, dt));
  Json means = Json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) means[r.names[i]] = r.means[i];
  io::write_json(sobol_dir(c) / "order.json", {{"ranking", rank_parameters(r)},
                                               {"layered_order", layered_order(r)},
                                               {"means", means},
                                               {"samples", r.n},
                                               {"evaluations", r.evaluations},
                                               {"degenerate", r.degenerate}});
  spdlog::info("sobol ranking: {}", Json(rank_parameters(r)).dump());
  run.add({sobol_dir(c) / "sobol.csv", sobol_dir(c) / "sobol.svg", sobol_dir(c) / "order.json"});
  run.finish();
}

namespace detail {

/// Long-format per-case aggregates: case, parameter, predicted, scan_std, scans.
inline io::CsvTable case_predictions(const LabeledDataset& target, const std::vector<std::string>& params,
                                     const std::vector<double>& per_scan) {
  io::CsvTable t;
  t.header = {"case", "parameter", "predicted", "scan_std", "scans"};
  const std::size_t m = params.size();
  for (const auto& c : target.cases()) {
    const auto rows = target.rows_of_case(c);
    for (std::size_t p = 0; p < m; ++p) {
      std::vector<double> v;
      for (auto r : rows) v.push_back(per_scan[r * m + p]);
      const auto a = aggregate(v);
      t.rows.push_back({c, params[p], io::format_double(a.mean), io::format_double(a.std), std::to_string(v.size())});
    }
  }
  return t;
}

}  // namespace detail

inline void cmd_train(const ExperimentConfig& c, const std::string& approach) {
  if (is_hier(approach)) throw ConfigError("approach '" + approach + "' is hierarchical; use the hier command");
  const auto kind = approach_model(approach);
  Run run(c, "train_" + approach);
  const auto source = read_dataset(source_dir(c));
  const auto target = read_dataset(target_dir(c));
  const auto params = source.parameters;
  const auto targets = make_targets(source, params);
  auto model = build_model(kind, source.trace_length, params.size(), {c.train.leaky_slope, c.train.seed});
  model.log_shapes();
  TrainReport report;
  run.time("train", timed([&] { report = train_model(model, source, &target, targets, c.train); }));
  if (!report.finite()) spdlog::warn("{}: non-finite loss encountered", approach);
  spdlog::info("{}: {} iterations in {:.1f} s, final regression loss {:.5f}", approach, report.iterations,
               report.wall_seconds, report.epochs.empty() ? 0.0 : report.epochs.back().regression);
  const auto dir = approach_dir(c, approach);
  save_checkpoint(dir, model, {{"approach", approach}, {"train", to_json(c.train)}, {"targets", params}});
  io::write_csv(dir / "report.csv", report_table(report));
  const auto per_scan = predict(model, target, targets.scaler);
  io::CsvTable scans;
  scans.header = {"case"};
  scans.header.insert(scans.header.end(), params.begin(), params.end());
  for (std::size_t r = 0; r < target.size(); ++r) {
    std::vector<std::string> row{target.case_ids[r]};
    for (std::size_t p = 0; p < params.size(); ++p) row.push_back(io::format_double(per_scan[r * params.size() + p]));
    scans.rows.push_back(std::move(row));
  }
  io::write_csv(dir / "scan_predictions.csv", scans);
  io::write_csv(dir / "predictions.csv", detail::case_predictions(target, params, per_scan));
  run.add({dir / "checkpoint.json", dir / "weights.f64", dir / "report.csv", dir / "scan_predictions.csv",
           dir / "predictions.csv"});
  run.finish();
}

/// Estimation order: configured, else read from the Sobol output.
inline std::vector<std::string> hierarchy_order(const ExperimentConfig& c) {
  if (!c.hier_order.empty()) return c.hier_order;
  const auto path = sobol_dir(c) / "order.json";
  require(path);
  const auto j = io::read_json(path);
  return j.at(c.hier_layered ? "layered_order" : "ranking").get<std::vector<std::string>>();
}

inline void cmd_hier(const ExperimentConfig& c, const std::string& approach) {
  if (!is_hier(approach)) throw ConfigError("approach '" + approach + "' is not hierarchical");
  Run run(c, "hier_" + approach);
  const auto source = read_dataset(source_dir(c));
  const auto target = read_dataset(target_dir(c));
  HierPlan plan{hierarchy_order(c), approach_model(approach), c.tolerance_steps};
  std::vector<CaseTrail> trails;
  run.time("hierarchy", timed([&] {
             trails = run_hierarchy(plan, source, target, c.train, {c.workers, {c.train.leaky_slope, c.train.seed}});
           }));
  const auto dir = approach_dir(c, approach);
  io::write_json(dir / "audit.json", to_json(trails, plan));
  io::CsvTable t;
  t.header = {"case", "parameter", "predicted", "scan_std", "scans"};
  for (const auto& tr : trails) {
    for (const auto& s : tr.stages) {
      t.rows.push_back({tr.case_id, s.parameter, io::format_double(s.aggregate), io::format_double(s.scan_std),
                        std::to_string(s.per_scan.size())});
    }
  }
  io::write_csv(dir / "predictions.csv", t);
  run.add({dir / "audit.json", dir / "predictions.csv"});
  run.finish();
}

/// Joins each approach's per-case predictions with the ground truth.
inline std::vector<EvalRow> collect_eval_rows(const ExperimentConfig& c) {
  require(truth_file(c));
  const auto truth = io::read_csv(truth_file(c));
  std::map<std::pair<std::string, std::string>, double> measured;
  for (const auto& row : truth.rows) {
    for (std::size_t k = 1; k < truth.header.size(); ++k) measured[{row[0], truth.header[k]}] = std::stod(row[k]);
  }
  std::vector<EvalRow> rows;
  for (const auto& a : c.approaches) {
    const auto path = approach_dir(c, a) / "predictions.csv";
    require(path);
    const auto t = io::read_csv(path);
    const auto ic = t.column("case"), ip = t.column("parameter"), iv = t.column("predicted"),
               is = t.column("scan_std"), in = t.column("scans");
    for (const auto& r : t.rows) {
      if (std::find(c.evaluate.begin(), c.evaluate.end(), r[ip]) == c.evaluate.end()) continue;
      const auto it = measured.find({r[ic], r[ip]});
      if (it == measured.end()) throw IoError("no ground truth for case " + r[ic] + ", " + r[ip]);
      rows.push_back({a, r[ic], r[ip], it->second, std::stod(r[iv]), std::stod(r[is]),
                      static_cast<std::size_t>(std::stoul(r[in]))});
    }
  }
  // Parameters in evaluation order, approaches in configured order.
  std::stable_sort(rows.begin(), rows.end(), [&](const EvalRow& x, const EvalRow& y) {
    auto px = std::find(c.evaluate.begin(), c.evaluate.end(), x.parameter) - c.evaluate.begin();
    auto py = std::find(c.evaluate.begin(), c.evaluate.end(), y.parameter) - c.evaluate.begin();
    return px < py;
  });
  return rows;
}

inline std::vector<MetricRow> cmd_eval(const ExperimentConfig& c) {
  Run run(c, "eval");
  const auto rows = collect_eval_rows(c);
  run.add(emit_report(eval_dir(c), rows));
  const auto metrics = compute_metrics(rows);
  for (const auto& m : metrics) {
    spdlog::info("{:<13} {:<16} R {:>9} bias {:>10.4g} rmse {:>10.4g} ubrmse {:>10.4g}", m.approach, m.parameter,
                 m.r ? io::format_double(std::round(*m.r * 1e4) / 1e4) : std::string(kUndefined), m.bias, m.rmse,
                 m.ubrmse);
  }
  run.finish();
  return metrics;
}

inline void run_approaches(const ExperimentConfig& c, Run& run) {
  for (const auto& a : c.approaches) {
    run.time(a, timed([&] {
               if (is_hier(a)) {
                 cmd_hier(c, a);
               } else {
                 cmd_train(c, a);
               }
             }));
  }
}

/// generate, sobol, every approach, eval; then the optional repeat seeds,
/// which retrain on the same datasets and are summarized in eval/seeds.csv.
inline std::vector<MetricRow> cmd_bench(const ExperimentConfig& c) {
  Run run(c, "bench");
  run.time("generate", timed([&] { cmd_generate(c); }));
  run.time("sobol", timed([&] { cmd_sobol(c); }));
  run_approaches(c, run);
  std::vector<MetricRow> metrics;
  run.time("eval", timed([&] { metrics = cmd_eval(c); }));
  run.add(eval_dir(c) / "seeds.csv");
  io::CsvTable seeds;
  seeds.header = {"seed", "approach", "parameter", "R", "bias", "rmse", "ubrmse", "n_cases"};
  auto append = [&](std::uint64_t seed, const std::vector<MetricRow>& ms) {
    for (const auto& row : metric_table(ms).rows) {
      std::vector<std::string> r{std::to_string(seed)};
      r.insert(r.end(), row.begin(), row.end());
      seeds.rows.push_back(std::move(r));
    }
  };
  append(c.train.seed, metrics);
  for (auto s : c.repeat_seeds) {
    if (s == c.train.seed) continue;
    auto rc = c;
    rc.train.seed = s;
    rc.output_dir = c.output_dir / "seeds" / std::to_string(s);
    fs::create_directories(rc.output_dir);
    for (const auto& sub : {"source", "target", "truth", "sobol"}) {
      fs::remove_all(rc.output_dir / sub);
      fs::copy(c.output_dir / sub, rc.output_dir / sub, fs::copy_options::recursive);
    }
    spdlog::info("repeat with training seed {}", s);
    run.time("seed_" + std::to_string(s), timed([&] {
               run_approaches(rc, run);
               append(s, cmd_eval(rc));
             }));
  }
  io::write_csv(eval_dir(c) / "seeds.csv", seeds);
  run.finish();
  return metrics;
}

}  // namespace gprda::harness
