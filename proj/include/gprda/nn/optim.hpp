#pragma once

// Trainable parameter storage, initialization, optimizers and schedules.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/nn/tensor.hpp"

namespace gprda::nn {

struct Parameter {
  std::string name;
  std::string group;  // "extractor", "estimator", "discriminator", "reconstructor"
  Tensor tensor;
  std::vector<double> m;  // first moment (Adam) or velocity (SGD momentum); lazily sized
  std::vector<double> v;  // second moment (Adam)
};

class ParameterStore {
 public:
  Tensor add(const std::string& name, const std::string& group, Shape shape) {
    for (const auto& p : params_) {
      if (p.name == name) throw ConfigError("duplicate parameter name '" + name + "'");
    }
    params_.push_back({name, group, Tensor::zeros(std::move(shape), true), {}, {}});
    return params_.back().tensor;
  }

  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

  const Parameter& at(const std::string& name) const {
    for (const auto& p : params_) {
      if (p.name == name) return p;
    }
    throw ConfigError("no parameter named '" + name + "'");
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

  /// Multiplies the accumulated gradients of one group by `factor`.
  void scale_group_grads(const std::string& group, double factor) {
    for (auto& p : params_) {
      if (p.group != group) continue;
      auto& g = p.tensor.node().grad;
      for (double& x : g) x *= factor;
    }
  }

  /// All values of a group (or all parameters when group is empty), in
  /// declaration order.
  std::vector<double> flat_values(const std::string& group = {}) const {
    std::vector<double> out;
    for (const auto& p : params_) {
      if (!group.empty() && p.group != group) continue;
      out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
    }
    return out;
  }

 private:
  std::vector<Parameter> params_;
};

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Kaiming-uniform fan-in initialization for a leaky rectifier of the given
/// slope: U(-b, b) with b = sqrt(6 / ((1 + slope^2) fan_in)).
inline void kaiming_uniform(Tensor& w, std::size_t fan_in, double slope, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / ((1.0 + slope * slope) * static_cast<double>(fan_in)));
  for (double& x : w.mutable_values()) x = (2.0 * uniform01(rng) - 1.0) * bound;
}

enum class OptimizerKind { adam, sgd };

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + s + "' (expected adam or sgd)");
}

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg = {}) : cfg_(cfg) {}

  /// One update of every parameter that holds a gradient.
  void step(ParameterStore& store, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& p : store.params()) {
      const auto& g = p.tensor.node().grad;
      if (g.empty()) continue;
      auto w = p.tensor.mutable_values();
      if (g.size() != w.size()) throw ShapeError("optimizer: gradient shape mismatch for " + p.name);
      if (cfg_.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
        continue;
      }
      if (p.m.size() != w.size()) {
        p.m.assign(w.size(), 0.0);
        p.v.assign(w.size(), 0.0);
      }
      const double b1 = cfg_.beta1, b2 = cfg_.beta2, eps = cfg_.epsilon;
      double* m = p.m.data();
      double* v = p.v.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      }
    }
  }

  std::uint64_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::uint64_t t_ = 0;
};

/// lr0 * decay^epoch
inline double lr_schedule(double lr0, double decay, std::size_t epoch) {
  return lr0 * std::pow(decay, static_cast<double>(epoch));
}

/// Adaptation weight 2 / (1 + exp(-10 p)) - 1 with p = iteration / total.
inline double lambda_schedule(std::size_t iteration, std::size_t total) {
  if (total == 0) throw ConfigError("lambda_schedule: total must be > 0");
  if (iteration > total) throw ConfigError("lambda_schedule: iteration exceeds total");
  const double p = static_cast<double>(iteration) / static_cast<double>(total);
  return 2.0 / (1.0 + std::exp(-10.0 * p)) - 1.0;
}

}  // namespace gprda::nn
