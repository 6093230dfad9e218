#pragma once

// First-order Sobol sensitivity indices of a vector-valued model and the
// parameter orderings derived from them.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/io.hpp"
#include "gprda/nn/optim.hpp"
#include "gprda/parallel.hpp"
#include "gprda/params.hpp"
#include "gprda/svg.hpp"

namespace gprda {

/// Row-major [n x m] sample matrices. mixed[i] is A with column i taken from B.
struct SaltelliMatrices {
  std::size_t n = 0, m = 0;
  std::vector<double> a, b;
  std::vector<std::vector<double>> mixed;

  std::vector<double> row(const std::vector<double>& mat, std::size_t j) const {
    return {mat.begin() + static_cast<std::ptrdiff_t>(j * m), mat.begin() + static_cast<std::ptrdiff_t>((j + 1) * m)};
  }
};

/// Independent uniform draws for A and B. Parameters with a step are drawn
/// uniformly from their grid values, continuous ones from [min, max].
inline SaltelliMatrices saltelli_matrices(std::size_t n, const ParameterSpace& space, std::uint64_t seed) {
  if (n < 2) throw ConfigError("saltelli_matrices: N must be >= 2");
  space.validate();
  SaltelliMatrices s;
  s.n = n;
  s.m = space.size();
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> grids;
  for (const auto& p : space.params) grids.push_back(p.discrete() ? p.grid_values() : std::vector<double>{});
  auto draw = [&](std::vector<double>& mat) {
    mat.resize(n * s.m);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < s.m; ++i) {
        const double u = nn::uniform01(rng);
        const auto& p = space.params[i];
        if (grids[i].empty()) {
          mat[j * s.m + i] = p.min + u * (p.max - p.min);
        } else {
          const auto k = std::min(static_cast<std::size_t>(u * static_cast<double>(grids[i].size())),
                                  grids[i].size() - 1);
          mat[j * s.m + i] = grids[i][k];
        }
      }
    }
  };
  draw(s.a);
  draw(s.b);
  for (std::size_t i = 0; i < s.m; ++i) {
    auto c = s.a;
    for (std::size_t j = 0; j < n; ++j) c[j * s.m + i] = s.b[j * s.m + i];
    s.mixed.push_back(std::move(c));
  }
  return s;
}

struct SobolResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> indices;  // [parameter][output sample]
  std::vector<double> means;                 // mean over output samples, masked ones count as 0
  std::vector<bool> valid;                   // output variance above threshold
  std::size_t n = 0;
  std::size_t evaluations = 0;               // distinct model calls after memoization
  bool degenerate = false;                   // no output sample had usable variance
};

using SobolModel = std::function<std::vector<double>(const std::vector<double>&)>;

struct SobolOptions {
  std::size_t workers = 1;
  double relative_variance_floor = 1e-9;  // relative to the largest output variance
};

/// V_i(t) = mean_j (f(B)_j - f0)(f(mixed_i)_j - f(A)_j), S_i = V_i / V with f0
/// and V the pooled mean and variance over A and B.
inline SobolResult first_order_indices(const SobolModel& model, const SaltelliMatrices& s,
                                       const std::vector<std::string>& names, const SobolOptions& opt = {}) {
  if (names.size() != s.m) throw ConfigError("first_order_indices: name count does not match matrix width");
  // Memoize by parameter tuple; mixed rows repeat rows of A and B when
  // parameters are drawn from a grid.
  std::map<std::vector<double>, std::size_t> memo;
  std::vector<std::vector<double>> tuples;
  auto index_rows = [&](const std::vector<double>& mat) {
    std::vector<std::size_t> idx(s.n);
    for (std::size_t j = 0; j < s.n; ++j) {
      auto r = s.row(mat, j);
      auto [it, inserted] = memo.emplace(r, tuples.size());
      if (inserted) tuples.push_back(std::move(r));
      idx[j] = it->second;
    }
    return idx;
  };
  const auto ia = index_rows(s.a);
  const auto ib = index_rows(s.b);
  std::vector<std::vector<std::size_t>> imix;
  for (const auto& mm : s.mixed) imix.push_back(index_rows(mm));

  std::vector<std::vector<double>> out(tuples.size());
  parallel_for(tuples.size(), opt.workers, [&](std::size_t k) { out[k] = model(tuples[k]); });
  const std::size_t T = out.empty() ? 0 : out[0].size();
  for (const auto& o : out) {
    if (o.size() != T) throw ShapeError("first_order_indices: model output length varies between calls");
  }

  SobolResult r;
  r.names = names;
  r.n = s.n;
  r.evaluations = tuples.size();
  r.indices.assign(s.m, std::vector<double>(T, 0.0));
  r.valid.assign(T, false);
  std::vector<double> f0(T, 0.0), var(T, 0.0);
  const double inv_n = 1.0 / static_cast<double>(s.n);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) sum += out[ia[j]][t] + out[ib[j]][t];
    f0[t] = sum * 0.5 * inv_n;
    double v = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) {
      const double da = out[ia[j]][t] - f0[t], db = out[ib[j]][t] - f0[t];
      v += da * da + db * db;
    }
    var[t] = v * 0.5 * inv_n;
  }
  const double vmax = T ? *std::max_element(var.begin(), var.end()) : 0.0;
  r.degenerate = !(vmax > 0.0);
  const double floor = vmax * opt.relative_variance_floor;
  for (std::size_t t = 0; t < T; ++t) {
    if (r.degenerate || !(var[t] > floor)) continue;
    r.valid[t] = true;
    for (std::size_t i = 0; i < s.m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        acc += (out[ib[j]][t] - f0[t]) * (out[imix[i][j]][t] - out[ia[j]][t]);
      }
      r.indices[i][t] = acc * inv_n / var[t];
    }
  }
  r.means.assign(s.m, 0.0);
  for (std::size_t i = 0; i < s.m; ++i) {
    if (T) r.means[i] = std::accumulate(r.indices[i].begin(), r.indices[i].end(), 0.0) / static_cast<double>(T);
  }
  return r;
}

/// Names by descending mean index; ties keep declared order.
inline std::vector<std::string> rank_parameters(const SobolResult& r) {
  std::vector<std::size_t> idx(r.names.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.means[a] > r.means[b]; });
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(r.names[i]);
  return out;
}

/// Order for layered stacks: layers by descending mean index of their
/// parameters, Sobol ranking inside each layer. Parameters without a layer
/// (air_gap) form their own group.
inline std::vector<std::string> layered_order(const SobolResult& r) {
  struct Group {
    std::size_t key;
    double total = 0.0;
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const auto b = parse_binding(r.names[i]);
    const std::size_t key = b.property == MaterialProperty::air_gap ? static_cast<std::size_t>(-1) : b.layer;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.key == key; });
    if (it == groups.end()) {
      groups.push_back({key, 0.0, {}});
      it = std::prev(groups.end());
    }
    it->total += r.means[i];
    it->members.push_back(i);
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    return a.total / static_cast<double>(a.members.size()) > b.total / static_cast<double>(b.members.size());
  });
  std::vector<std::string> out;
  for (auto& g : groups) {
    std::stable_sort(g.members.begin(), g.members.end(),
                     [&](std::size_t a, std::size_t b) { return r.means[a] > r.means[b]; });
    for (auto i : g.members) out.push_back(r.names[i]);
  }
  return out;
}

/// CSV with one row per output sample (time, S_<name>..., valid) and a final
/// row of means.
inline io::CsvTable sobol_table(const SobolResult& r, double dt) {
  io::CsvTable t;
  t.header.push_back("time");
  for (const auto& n : r.names) t.header.push_back("S_" + n);
  t.header.push_back("valid");
  const std::size_t T = r.valid.size();
  for (std::size_t k = 0; k < T; ++k) {
    std::vector<std::string> row{io::format_double(static_cast<double>(k) * dt)};
    for (const auto& s : r.indices) row.push_back(io::format_double(s[k]));
    row.push_back(r.valid[k] ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  std::vector<std::string> row{"mean"};
  for (double m : r.means) row.push_back(io::format_double(m));
  row.push_back("");
  t.rows.push_back(std::move(row));
  return t;
}

inline std::string sobol_svg(const SobolResult& r, double dt) {
  std::vector<svg::Series> series;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    svg::Series s;
    s.label = r.names[i] + " (mean " + io::format_double(std::round(r.means[i] * 1000.0) / 1000.0) + ")";
    for (std::size_t k = 0; k < r.indices[i].size(); ++k) {
      s.x.push_back(static_cast<double>(k) * dt * 1e9);
      s.y.push_back(r.indices[i][k]);
    }
    series.push_back(std::move(s));
  }
  return svg::line_plot(series, "First-order Sobol indices", "time (ns)", "S_i");
}

}  // namespace gprda
