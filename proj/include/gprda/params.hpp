#pragma once

// Material parameter spaces and their binding onto a layer stack.
//
// Parameter names have the form "<property>_<layer>", with property one of
// permittivity, conductivity or depth (layer thickness) and layer counted
// from 1 at the top, e.g. "permittivity_1". "air_gap" is also accepted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/fdtd.hpp"
#include "gprda/signal.hpp"

namespace gprda {

struct ParameterRange {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::optional<double> step;  // empty = continuous

  bool discrete() const { return step.has_value(); }

  /// Grid values min, min + step, ... up to max (inclusive within 1e-9 steps).
  std::vector<double> grid_values() const {
    if (!step) return {min, max};
    const double s = *step;
    const auto count = static_cast<std::size_t>(std::floor((max - min) / s + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = min + static_cast<double>(i) * s;
    return v;
  }
};

struct ParameterSpace {
  std::vector<ParameterRange> params;

  std::size_t size() const { return params.size(); }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& p : params) {
      if (!seen.insert(p.name).second) throw ConfigError("parameter space: duplicate name '" + p.name + "'");
      if (p.step) {
        if (!(*p.step > 0.0)) throw ConfigError("parameter '" + p.name + "': step must be > 0");
        if (!(p.max >= p.min)) throw ConfigError("parameter '" + p.name + "': max must be >= min");
      } else if (!(p.max > p.min)) {
        throw ConfigError("parameter '" + p.name + "': max must be > min");
      }
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& p : params) n.push_back(p.name);
    return n;
  }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i].name == name) return i;
    }
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }

  const ParameterRange& at(std::string_view name) const { return params[index_of(name)]; }

  std::size_t cartesian_count() const {
    std::size_t c = 1;
    for (const auto& p : params) c *= p.grid_values().size();
    return params.empty() ? 0 : c;
  }

  /// Grid point `index` in row-major order (last parameter varies fastest).
  std::vector<double> grid_point(std::size_t index) const {
    std::vector<double> v(params.size());
    for (std::size_t k = params.size(); k-- > 0;) {
      const auto g = params[k].grid_values();
      v[k] = g[index % g.size()];
      index /= g.size();
    }
    return v;
  }

  /// Declared ranges for label scaling.
  std::vector<ValueRange> ranges() const {
    std::vector<ValueRange> r;
    for (const auto& p : params) r.push_back({p.min, p.max});
    return r;
  }
};

enum class MaterialProperty { permittivity, conductivity, depth, air_gap };

struct ParameterBinding {
  MaterialProperty property;
  std::size_t layer = 0;  // 0-based; unused for air_gap
};

inline ParameterBinding parse_binding(std::string_view name) {
  if (name == "air_gap") return {MaterialProperty::air_gap, 0};
  const auto us = name.rfind('_');
  if (us == std::string_view::npos || us + 1 >= name.size()) {
    throw ConfigError("parameter name '" + std::string(name) + "' must look like <property>_<layer>");
  }
  const auto prop = name.substr(0, us);
  std::size_t layer = 0;
  for (char c : name.substr(us + 1)) {
    if (c < '0' || c > '9') throw ConfigError("parameter name '" + std::string(name) + "': bad layer index");
    layer = layer * 10 + static_cast<std::size_t>(c - '0');
  }
  if (layer == 0) throw ConfigError("parameter name '" + std::string(name) + "': layers count from 1");
  MaterialProperty p;
  if (prop == "permittivity") {
    p = MaterialProperty::permittivity;
  } else if (prop == "conductivity") {
    p = MaterialProperty::conductivity;
  } else if (prop == "depth") {
    p = MaterialProperty::depth;
  } else {
    throw ConfigError("parameter name '" + std::string(name) + "': unknown property");
  }
  return {p, layer - 1};
}

/// True for conductivity_<layer>; any other name, bound or not, is false.
inline bool is_conductivity(std::string_view name) { return name.starts_with("conductivity_"); }

/// Copy of `stack` with the named parameters set.
inline fdtd::LayerStack apply_parameters(fdtd::LayerStack stack, const std::vector<std::string>& names,
                                         const std::vector<double>& values) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto b = parse_binding(names[i]);
    if (b.property == MaterialProperty::air_gap) {
      stack.air_gap = values[i];
      continue;
    }
    if (b.layer >= stack.layers.size()) {
      throw ConfigError("parameter '" + names[i] + "' refers to a layer the stack does not have");
    }
    auto& l = stack.layers[b.layer];
    switch (b.property) {
      case MaterialProperty::permittivity: l.relative_permittivity = values[i]; break;
      case MaterialProperty::conductivity: l.conductivity = values[i]; break;
      case MaterialProperty::depth: l.thickness = values[i]; break;
      case MaterialProperty::air_gap: break;
    }
  }
  return stack;
}

}  // namespace gprda
