#pragma once

// Labeled trace datasets: generation from the FDTD solver and on-disk form.
//
// On disk a dataset is a directory holding
//   manifest.json  parameters, grid, radar, seed, trace length, dt
//   traces.f32     little-endian binary32, row-major [trace x sample]
//   labels.csv     one column per parameter (plus "case" for target sets)

#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/fdtd.hpp"
#include "gprda/io.hpp"
#include "gprda/parallel.hpp"
#include "gprda/params.hpp"
#include "gprda/signal.hpp"

namespace gprda {

inline constexpr const char* kPreprocessing = "normalized_envelope";

struct LabeledDataset {
  std::vector<std::string> parameters;  // label columns
  ParameterSpace grid;                  // generating grid; narrowed by pruning
  std::size_t trace_length = 0;
  double dt = 0.0;
  std::vector<double> traces;           // preprocessed, [size() x trace_length]
  std::vector<double> labels;           // physical units, [size() x parameters.size()]; empty if unlabeled
  std::vector<std::string> case_ids;    // per row; empty for source sets
  std::vector<std::size_t> row_ids;     // index of each row in the originally generated set

  std::size_t size() const { return trace_length == 0 ? 0 : traces.size() / trace_length; }
  bool labeled() const { return !labels.empty(); }

  std::span<const double> trace(std::size_t i) const {
    return {traces.data() + i * trace_length, trace_length};
  }
  double label(std::size_t i, std::size_t p) const { return labels[i * parameters.size() + p]; }

  std::size_t parameter_index(const std::string& name) const {
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      if (parameters[i] == name) return i;
    }
    throw ConfigError("dataset has no parameter '" + name + "'");
  }

  /// Rows in the given order; traces are copied unchanged.
  LabeledDataset select(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.parameters = parameters;
    out.grid = grid;
    out.trace_length = trace_length;
    out.dt = dt;
    out.traces.reserve(rows.size() * trace_length);
    for (auto r : rows) {
      auto t = trace(r);
      out.traces.insert(out.traces.end(), t.begin(), t.end());
      if (labeled()) {
        for (std::size_t p = 0; p < parameters.size(); ++p) out.labels.push_back(label(r, p));
      }
      if (!case_ids.empty()) out.case_ids.push_back(case_ids[r]);
      out.row_ids.push_back(row_ids.empty() ? r : row_ids[r]);
    }
    return out;
  }

  /// Distinct case ids in first-appearance order.
  std::vector<std::string> cases() const {
    std::vector<std::string> out;
    for (const auto& c : case_ids) {
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
  }

  std::vector<std::size_t> rows_of_case(const std::string& c) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < case_ids.size(); ++i) {
      if (case_ids[i] == c) rows.push_back(i);
    }
    return rows;
  }
};

/// One trace per point of the Cartesian grid, labels in physical units.
inline LabeledDataset generate_grid_dataset(const ParameterSpace& space, const fdtd::LayerStack& stack_template,
                                            const fdtd::RadarConfig& radar, std::uint64_t seed,
                                            std::size_t workers = 1) {
  space.validate();
  for (const auto& p : space.params) {
    if (!p.discrete()) throw ConfigError("grid dataset: parameter '" + p.name + "' needs a step");
  }
  const std::size_t count = space.cartesian_count();
  if (count == 0) throw ConfigError("grid dataset: empty parameter grid");
  LabeledDataset ds;
  ds.parameters = space.names();
  ds.grid = space;
  ds.trace_length = radar.trace_length;
  ds.dt = radar.output_dt();
  ds.traces.assign(count * radar.trace_length, 0.0);
  ds.labels.assign(count * space.size(), 0.0);
  ds.row_ids.resize(count);
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
  parallel_for(count, workers, [&](std::size_t i) {
    const auto values = space.grid_point(i);
    const auto stack = apply_parameters(stack_template, ds.parameters, values);
    const auto raw = fdtd::simulate_ascan(stack, radar, fdtd::derive_seed(seed, i));
    const auto x = preprocess_trace(raw.samples);
    std::copy(x.begin(), x.end(), ds.traces.begin() + static_cast<std::ptrdiff_t>(i * radar.trace_length));
    std::copy(values.begin(), values.end(), ds.labels.begin() + static_cast<std::ptrdiff_t>(i * space.size()));
  });
  return ds;
}

/// A held-out parameter tuple scanned repeatedly under the target radar.
struct Specimen {
  std::string case_id;
  std::vector<double> values;  // aligned with the parameter names
};

/// Unlabeled target set: `scans` traces per specimen, each with its own noise
/// and jitter draw. Ground truth stays with the caller.
inline LabeledDataset generate_specimen_dataset(const std::vector<std::string>& parameters,
                                                const std::vector<Specimen>& specimens, std::size_t scans,
                                                const fdtd::LayerStack& stack_template,
                                                const fdtd::RadarConfig& radar, std::uint64_t seed,
                                                std::size_t workers = 1) {
  if (specimens.empty() || scans == 0) throw ConfigError("target dataset: no specimens or scans");
  LabeledDataset ds;
  ds.parameters = parameters;
  ds.trace_length = radar.trace_length;
  ds.dt = radar.output_dt();
  const std::size_t n = specimens.size() * scans;
  ds.traces.assign(n * radar.trace_length, 0.0);
  ds.case_ids.resize(n);
  ds.row_ids.resize(n);
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
  parallel_for(specimens.size(), workers, [&](std::size_t s) {
    const auto& sp = specimens[s];
    if (sp.values.size() != parameters.size()) {
      throw ConfigError("specimen '" + sp.case_id + "' has the wrong number of values");
    }
    const auto field = fdtd::simulate_field(apply_parameters(stack_template, parameters, sp.values), radar);
    for (std::size_t k = 0; k < scans; ++k) {
      const std::size_t row = s * scans + k;
      const auto raw = fdtd::record_trace(field, radar, fdtd::derive_seed(seed, row));
      const auto x = preprocess_trace(raw.samples);
      std::copy(x.begin(), x.end(), ds.traces.begin() + static_cast<std::ptrdiff_t>(row * radar.trace_length));
      ds.case_ids[row] = sp.case_id;
    }
  });
  return ds;
}

// ---------------------------------------------------------------------------
// Serialization

inline io::Json to_json(const ParameterSpace& space) {
  io::Json j = io::Json::array();
  for (const auto& p : space.params) {
    io::Json e{{"name", p.name}, {"min", p.min}, {"max", p.max}};
    if (p.step) e["step"] = *p.step;
    j.push_back(e);
  }
  return j;
}

inline ParameterSpace parameter_space_from_json(const io::Json& j) {
  ParameterSpace s;
  try {
    for (const auto& e : j) {
      ParameterRange r;
      r.name = e.at("name").get<std::string>();
      r.min = e.at("min").get<double>();
      r.max = e.at("max").get<double>();
      if (e.contains("step")) r.step = e.at("step").get<double>();
      s.params.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parameter space: ") + e.what());
  }
  s.validate();
  return s;
}

inline io::Json to_json(const fdtd::RadarConfig& r) {
  return {{"waveform", fdtd::to_string(r.waveform)},
          {"center_frequency", r.center_frequency},
          {"time_window", r.time_window},
          {"cells_per_min_wavelength", r.cells_per_min_wavelength},
          {"courant_factor", r.courant_factor},
          {"gain", r.gain},
          {"noise_std", r.noise_std},
          {"time_jitter", r.time_jitter},
          {"trace_length", r.trace_length}};
}

inline io::Json to_json(const fdtd::LayerStack& s) {
  io::Json layers = io::Json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"permittivity", l.relative_permittivity},
                      {"conductivity", l.conductivity},
                      {"thickness", l.thickness}});
  }
  return {{"air_gap", s.air_gap}, {"bottom", fdtd::to_string(s.bottom)}, {"layers", layers}};
}

/// Writes manifest.json, traces.f32 and labels.csv into `dir`. `extra` is
/// merged into the manifest.
inline std::vector<std::filesystem::path> write_dataset(const std::filesystem::path& dir, const LabeledDataset& ds,
                                                        const io::Json& extra = io::Json::object()) {
  std::filesystem::create_directories(dir);
  io::Json m = io::Json::object();
  m["n_traces"] = ds.size();
  m["trace_length"] = ds.trace_length;
  m["dt"] = ds.dt;
  m["parameters"] = ds.parameters;
  m["grid"] = to_json(ds.grid);
  m["labeled"] = ds.labeled();
  m["preprocessing"] = kPreprocessing;
  m["traces_file"] = "traces.f32";
  m["traces_format"] = "f32le row-major [trace x sample]";
  m["labels_file"] = "labels.csv";
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  io::write_json(dir / "manifest.json", m);
  io::write_f32(dir / "traces.f32", ds.traces);

  io::CsvTable t;
  if (!ds.case_ids.empty()) t.header.push_back("case");
  if (ds.labeled()) t.header.insert(t.header.end(), ds.parameters.begin(), ds.parameters.end());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<std::string> row;
    if (!ds.case_ids.empty()) row.push_back(ds.case_ids[i]);
    if (ds.labeled()) {
      for (std::size_t p = 0; p < ds.parameters.size(); ++p) row.push_back(io::format_double(ds.label(i, p)));
    }
    t.rows.push_back(std::move(row));
  }
  io::write_csv(dir / "labels.csv", t);
  return {dir / "manifest.json", dir / "traces.f32", dir / "labels.csv"};
}

inline LabeledDataset read_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw DependencyError("missing dataset manifest " + (dir / "manifest.json").string());
  }
  const auto m = io::read_json(dir / "manifest.json");
  LabeledDataset ds;
  ds.parameters = m.at("parameters").get<std::vector<std::string>>();
  if (m.contains("grid") && !m.at("grid").empty()) ds.grid = parameter_space_from_json(m.at("grid"));
  ds.trace_length = m.at("trace_length").get<std::size_t>();
  ds.dt = m.at("dt").get<double>();
  ds.traces = io::read_f32(dir / m.at("traces_file").get<std::string>());
  const auto n = m.at("n_traces").get<std::size_t>();
  if (ds.traces.size() != n * ds.trace_length) {
    throw IoError("dataset " + dir.string() + ": trace file size does not match manifest");
  }
  const auto t = io::read_csv(dir / m.at("labels_file").get<std::string>());
  if (t.rows.size() != n) throw IoError("dataset " + dir.string() + ": label rows do not match manifest");
  const bool has_case = !t.header.empty() && t.header.front() == "case";
  const bool labeled = m.value("labeled", true);
  for (const auto& row : t.rows) {
    std::size_t c = 0;
    if (has_case) ds.case_ids.push_back(row.at(c++));
    if (labeled) {
      for (std::size_t p = 0; p < ds.parameters.size(); ++p) ds.labels.push_back(std::stod(row.at(c++)));
    }
  }
  ds.row_ids.resize(n);
  std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
  return ds;
}

}  // namespace gprda
