#pragma once

// Independent reference implementations and helpers shared by the unit and
// acceptance tests.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "gprda/dataset.hpp"
#include "gprda/nn/ops.hpp"
#include "gprda/nn/optim.hpp"
#include "gprda/nn/tensor.hpp"

namespace oracle {

/// Analytic-signal magnitude with a quadratic-time DFT.
inline std::vector<double> envelope_bruteforce(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> X(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      s += x[t] * std::complex<double>(std::cos(a), std::sin(a));
    }
    X[k] = s;
  }
  for (std::size_t k = 1; k < n; ++k) {
    const bool nyquist = n % 2 == 0 && k == n / 2;
    if (nyquist) continue;
    X[k] *= (k < (n + 1) / 2) ? 2.0 : 0.0;
  }
  std::vector<double> env(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::complex<double> s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      s += X[k] * std::complex<double>(std::cos(a), std::sin(a));
    }
    env[t] = std::abs(s) / static_cast<double>(n);
  }
  return env;
}

/// Closed-form first-order indices of the Ishigami function.
struct Ishigami {
  double a = 7.0, b = 0.1;
  double operator()(const std::vector<double>& x) const {
    return std::sin(x[0]) + a * std::sin(x[1]) * std::sin(x[1]) + b * std::pow(x[2], 4) * std::sin(x[0]);
  }
  double variance() const {
    const double pi4 = std::pow(std::numbers::pi, 4), pi8 = pi4 * pi4;
    return a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
  }
  double v1() const {
    const double pi4 = std::pow(std::numbers::pi, 4);
    return 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  }
  double v2() const { return a * a / 8.0; }
  double s1() const { return v1() / variance(); }
  double s2() const { return v2() / variance(); }
};

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * gprda::nn::uniform01(rng);
  return v;
}

/// sum_i w_i out_i as a differentiable scalar.
inline gprda::nn::Tensor weighted_sum(const gprda::nn::Tensor& x, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x.values()[i];
  return gprda::nn::make_result({1}, {s}, {x}, [w](gprda::nn::Node& self) {
    double* g = gprda::nn::parent_grad(self, 0);
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += w[i] * self.grad[0];
  });
}

using Op = std::function<gprda::nn::Tensor(const std::vector<gprda::nn::Tensor>&)>;

/// Largest norm-wise relative error between analytic and central-difference
/// gradients over all inputs of `op`, contracted with random output weights.
inline double gradient_error(const Op& op, std::vector<gprda::nn::Tensor> inputs, std::mt19937_64& rng,
                             double h = 1e-6) {
  using gprda::nn::Tensor;
  const auto out0 = op(inputs);
  const auto w = random_vector(out0.size(), rng);
  for (auto& t : inputs) t.zero_grad();
  weighted_sum(op(inputs), w).backward();
  double worst = 0.0;
  for (auto& t : inputs) {
    if (!t.requires_grad()) continue;
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    if (analytic.empty()) analytic.assign(t.size(), 0.0);
    std::vector<double> numeric(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto v = t.mutable_values();
      const double keep = v[i];
      v[i] = keep + h;
      double fp, fm;
      {
        gprda::nn::NoGradGuard g;
        fp = weighted_sum(op(inputs), w).item();
        v[i] = keep - h;
        fm = weighted_sum(op(inputs), w).item();
      }
      v[i] = keep;
      numeric[i] = (fp - fm) / (2.0 * h);
    }
    double diff = 0.0, na = 0.0, nn_ = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn_ += numeric[i] * numeric[i];
    }
    const double scale = std::max({std::sqrt(na), std::sqrt(nn_), 1e-12});
    worst = std::max(worst, std::sqrt(diff) / scale);
  }
  return worst;
}

inline gprda::nn::Tensor random_tensor(gprda::nn::Shape s, std::mt19937_64& rng, bool grad = true) {
  const auto n = gprda::nn::numel(s);
  return gprda::nn::Tensor::from(std::move(s), random_vector(n, rng), grad);
}

/// Values bounded away from zero so finite differences never cross the kink.
inline gprda::nn::Tensor kink_free_tensor(gprda::nn::Shape s, std::mt19937_64& rng) {
  auto v = random_vector(gprda::nn::numel(s), rng);
  for (auto& x : v) x = x >= 0.0 ? x + 0.05 : x - 0.05;
  return gprda::nn::Tensor::from(std::move(s), std::move(v), true);
}

/// Cheap synthetic regression set: each trace is a pulse whose delay follows
/// parameter a and whose height follows parameter b. `width` is the pulse
/// width as a fraction of the trace.
inline gprda::LabeledDataset toy_dataset(std::size_t n_a, std::size_t n_b, std::size_t length, double shift = 0.0,
                                         double gain = 1.0, double width = 0.03) {
  gprda::LabeledDataset ds;
  ds.parameters = {"a", "b"};
  ds.grid.params = {{"a", 0.0, 1.0, 1.0 / static_cast<double>(n_a - 1)},
                    {"b", 0.0, 1.0, 1.0 / static_cast<double>(n_b - 1)}};
  ds.trace_length = length;
  ds.dt = 1.0;
  for (std::size_t i = 0; i < ds.grid.cartesian_count(); ++i) {
    const auto p = ds.grid.grid_point(i);
    for (std::size_t t = 0; t < length; ++t) {
      const double center = (0.2 + 0.6 * p[0] + shift) * static_cast<double>(length);
      const double z = (static_cast<double>(t) - center) / (width * static_cast<double>(length));
      ds.traces.push_back(gain * (0.3 + 0.7 * (1.0 - 0.6 * p[1])) * std::exp(-z * z));
    }
    ds.labels.insert(ds.labels.end(), p.begin(), p.end());
    ds.row_ids.push_back(i);
  }
  return ds;
}

/// Unlabeled copy with one case id per row group of `per_case`.
inline gprda::LabeledDataset as_target(gprda::LabeledDataset ds, std::size_t per_case) {
  ds.labels.clear();
  ds.case_ids.clear();
  for (std::size_t i = 0; i < ds.size(); ++i) ds.case_ids.push_back("c" + std::to_string(i / per_case));
  return ds;
}

}  // namespace oracle

namespace oracle {

struct EchoPeak {
  double delay = 0.0;      // peak time minus the source pulse center, s
  double amplitude = 0.0;  // envelope peak
};

/// Strongest envelope peak after the ground return has passed, refined with
/// a parabola through the three samples around the maximum.
inline EchoPeak plate_echo(const gprda::AScan& trace, const gprda::fdtd::LayerStack& stack,
                           const gprda::fdtd::RadarConfig& radar) {
  using namespace gprda::fdtd;
  const auto env = gprda::envelope(trace.samples);
  const double tc = pulse_center(radar.center_frequency);
  const double t0 = tc + 2.0 * stack.air_gap / kSpeedOfLight + pulse_half_width(radar.center_frequency);
  std::size_t best = static_cast<std::size_t>(t0 / trace.dt);
  for (std::size_t i = best; i < env.size(); ++i) {
    if (env[i] > env[best]) best = i;
  }
  double frac = 0.0;
  if (best > 0 && best + 1 < env.size()) {
    const double y0 = env[best - 1], y1 = env[best], y2 = env[best + 1];
    const double den = y0 - 2.0 * y1 + y2;
    if (den != 0.0) frac = 0.5 * (y0 - y2) / den;
  }
  return {(static_cast<double>(best) + frac) * trace.dt - tc, env[best]};
}

}  // namespace oracle
