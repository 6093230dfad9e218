#pragma once

// Evaluation metrics over per-case aggregated predictions and the
// comparison tables / scatter plots written from them.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "gprda/error.hpp"
#include "gprda/io.hpp"
#include "gprda/svg.hpp"

namespace gprda {

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline Aggregate aggregate(std::span<const double> v) {
  if (v.empty()) throw DegenerateInputError("aggregate: no estimates");
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - mean) * (x - mean);
  return {mean, std::sqrt(q / static_cast<double>(v.size()))};
}

namespace detail {

inline void check_pair(std::span<const double> measured, std::span<const double> predicted, std::size_t min_n) {
  if (measured.size() != predicted.size()) throw ShapeError("metrics: measured and predicted lengths differ");
  if (measured.size() < min_n) {
    throw DegenerateInputError("metrics: need at least " + std::to_string(min_n) + " points");
  }
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Pearson correlation. Throws DegenerateInputError for fewer than two points
/// or a constant series.
inline double pearson_r(std::span<const double> measured, std::span<const double> predicted) {
  detail::check_pair(measured, predicted, 2);
  const double mm = detail::mean(measured), mp = detail::mean(predicted);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double a = measured[i] - mm, b = predicted[i] - mp;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (!(sxx > 0.0)) throw DegenerateInputError("pearson_r: measured values are constant");
  if (!(syy > 0.0)) throw DegenerateInputError("pearson_r: predicted values are constant");
  return sxy / std::sqrt(sxx * syy);
}

/// Mean of (predicted - measured).
inline double bias(std::span<const double> measured, std::span<const double> predicted) {
  detail::check_pair(measured, predicted, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) s += predicted[i] - measured[i];
  return s / static_cast<double>(measured.size());
}

inline double rmse(std::span<const double> measured, std::span<const double> predicted) {
  detail::check_pair(measured, predicted, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double d = predicted[i] - measured[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(measured.size()));
}

/// sqrt(RMSE^2 - Bias^2), radicand clamped at zero.
inline double ubrmse(std::span<const double> measured, std::span<const double> predicted) {
  const double r = rmse(measured, predicted), b = bias(measured, predicted);
  double rad = r * r - b * b;
  if (rad < 0.0) {
    if (rad < -1e-12) spdlog::warn("ubrmse: negative radicand {} clamped to 0", rad);
    rad = 0.0;
  }
  return std::sqrt(rad);
}

/// One aggregated prediction for one case.
struct EvalRow {
  std::string approach;
  std::string case_id;
  std::string parameter;
  double measured = 0.0;
  double predicted = 0.0;  // mean over the case's scans
  double scan_std = 0.0;
  std::size_t scans = 0;
};

struct MetricRow {
  std::string approach;
  std::string parameter;
  std::optional<double> r;  // empty when undefined
  double bias = 0.0;
  double rmse = 0.0;
  double ubrmse = 0.0;
  std::size_t n_cases = 0;
};

/// Metrics per (approach, parameter), in first-appearance order.
inline std::vector<MetricRow> compute_metrics(const std::vector<EvalRow>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::string, std::string> k{r.approach, r.parameter};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::vector<MetricRow> out;
  for (const auto& [approach, parameter] : keys) {
    std::vector<double> m, p;
    for (const auto& r : rows) {
      if (r.approach == approach && r.parameter == parameter) {
        m.push_back(r.measured);
        p.push_back(r.predicted);
      }
    }
    MetricRow row{approach, parameter, std::nullopt, bias(m, p), rmse(m, p), ubrmse(m, p), m.size()};
    try {
      row.r = pearson_r(m, p);
    } catch (const DegenerateInputError&) {
    }
    out.push_back(row);
  }
  return out;
}

inline constexpr const char* kUndefined = "undefined";

inline io::CsvTable metric_table(const std::vector<MetricRow>& rows) {
  io::CsvTable t;
  t.header = {"approach", "parameter", "R", "bias", "rmse", "ubrmse", "n_cases"};
  for (const auto& r : rows) {
    t.rows.push_back({r.approach, r.parameter, r.r ? io::format_double(*r.r) : kUndefined, io::format_double(r.bias),
                      io::format_double(r.rmse), io::format_double(r.ubrmse), std::to_string(r.n_cases)});
  }
  return t;
}

/// Writes <parameter>.csv and <parameter>.svg per parameter into `dir` and
/// returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir,
                                                      const std::vector<EvalRow>& rows) {
  if (rows.empty()) throw DegenerateInputError("emit_report: no evaluation rows");
  const auto metrics = compute_metrics(rows);
  std::vector<std::string> params;
  for (const auto& m : metrics) {
    if (std::find(params.begin(), params.end(), m.parameter) == params.end()) params.push_back(m.parameter);
  }
  std::vector<std::filesystem::path> written;
  for (const auto& p : params) {
    std::vector<MetricRow> sel;
    for (const auto& m : metrics) {
      if (m.parameter == p) sel.push_back(m);
    }
    io::write_csv(dir / (p + ".csv"), metric_table(sel));
    written.push_back(dir / (p + ".csv"));
    std::vector<svg::Series> series;
    for (const auto& m : sel) {
      svg::Series s;
      s.label = m.approach;
      for (const auto& r : rows) {
        if (r.approach == m.approach && r.parameter == p) {
          s.x.push_back(r.measured);
          s.y.push_back(r.predicted);
        }
      }
      series.push_back(std::move(s));
    }
    io::write_text(dir / (p + ".svg"), svg::scatter_plot(series, p, "measured", "predicted"));
    written.push_back(dir / (p + ".svg"));
  }
  return written;
}

}  // namespace gprda
