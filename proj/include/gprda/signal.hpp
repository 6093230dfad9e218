#pragma once

// Trace preprocessing: analytic-signal envelope, peak normalization and
// min-max label scaling.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "gprda/error.hpp"

namespace gprda {

/// A uniformly sampled radar trace.
struct AScan {
  std::vector<double> samples;
  double dt = 0.0;  // seconds

  std::size_t size() const { return samples.size(); }
};

namespace detail {

// The FFTW planner is not re-entrant; execution with a private plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n)
      : data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* get() const { return data_; }

 private:
  fftw_complex* data_;
};

class FftwPlan {
 public:
  FftwPlan(int n, fftw_complex* in, fftw_complex* out, int sign) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace detail

/// Magnitude of the analytic signal |IDFT(DFT(x) * 2U)|.
///
/// The DFT length equals the trace length. The DC bin and, for even lengths,
/// the Nyquist bin keep weight 1; positive frequencies are doubled and
/// negative ones dropped.
inline std::vector<double> envelope(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateInputError("envelope: trace needs at least 2 samples");
  detail::FftwBuffer buf(n);
  fftw_complex* a = buf.get();
  detail::FftwPlan forward(static_cast<int>(n), a, a, FFTW_FORWARD);
  detail::FftwPlan backward(static_cast<int>(n), a, a, FFTW_BACKWARD);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][0] = x[i];
    a[i][1] = 0.0;
  }
  forward.execute();
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    double w;
    if (n % 2 == 0 && k == half) {
      w = 1.0;
    } else if (k <= (n - 1) / 2) {
      w = 2.0;
    } else {
      w = 0.0;
    }
    a[k][0] *= w;
    a[k][1] *= w;
  }
  backward.execute();
  std::vector<double> env(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::hypot(a[i][0], a[i][1]) * inv_n;
  return env;
}

inline AScan envelope(const AScan& trace) { return {envelope(trace.samples), trace.dt}; }

/// env / max(env). Throws on an all-zero (or non-positive) envelope.
inline std::vector<double> normalize_signal(std::span<const double> env) {
  if (env.empty()) throw DegenerateInputError("normalize_signal: empty input");
  const double peak = *std::max_element(env.begin(), env.end());
  if (!(peak > 0.0)) throw DegenerateInputError("normalize_signal: envelope maximum is not positive");
  std::vector<double> out(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) out[i] = env[i] / peak;
  return out;
}

inline AScan normalize_signal(const AScan& env) { return {normalize_signal(env.samples), env.dt}; }

/// The network input: normalized envelope of a raw trace.
inline std::vector<double> preprocess_trace(std::span<const double> raw) {
  return normalize_signal(envelope(raw));
}

struct ValueRange {
  double min = 0.0;
  double max = 1.0;
};

/// Per-parameter min-max scaling to [0, 1]. Ranges come from the declared
/// generating grid, never from the sample, so pruned subsets share scaling.
class LabelScaler {
 public:
  LabelScaler() = default;
  explicit LabelScaler(std::vector<ValueRange> ranges) : ranges_(std::move(ranges)) {
    for (std::size_t p = 0; p < ranges_.size(); ++p) {
      if (!(ranges_[p].max > ranges_[p].min)) {
        throw DegenerateInputError("LabelScaler: parameter " + std::to_string(p) +
                                   " has max <= min");
      }
    }
  }

  std::size_t size() const { return ranges_.size(); }
  const ValueRange& range(std::size_t p) const { return ranges_.at(p); }

  double apply(std::size_t p, double y) const {
    const auto& r = ranges_.at(p);
    return (y - r.min) / (r.max - r.min);
  }
  double invert(std::size_t p, double y_scaled) const {
    const auto& r = ranges_.at(p);
    return r.min + y_scaled * (r.max - r.min);
  }

  // Row-major [rows x size()] helpers.
  std::vector<double> apply_rows(std::span<const double> y) const {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = apply(i % size(), y[i]);
    return out;
  }
  std::vector<double> invert_rows(std::span<const double> y) const {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = invert(i % size(), y[i]);
    return out;
  }

  LabelScaler subset(std::span<const std::size_t> params) const {
    std::vector<ValueRange> r;
    for (auto p : params) r.push_back(ranges_.at(p));
    return LabelScaler(std::move(r));
  }

 private:
  std::vector<ValueRange> ranges_;
};

/// Builds a scaler from declared ranges. `labels` is accepted for interface
/// symmetry and only checked for width.
inline LabelScaler fit_label_scaler(std::span<const double> labels, std::vector<ValueRange> declared) {
  if (!declared.empty() && labels.size() % declared.size() != 0) {
    throw ShapeError("fit_label_scaler: label matrix width does not match declared ranges");
  }
  return LabelScaler(std::move(declared));
}

}  // namespace gprda
