#pragma once

// One-dimensional Yee-grid FDTD over horizontally layered lossy dielectrics.
//
// Geometry (z grows downward): a few cells of air above the antenna closed by
// a first-order Mur boundary, the antenna (co-located source and receiver),
// `air_gap` metres of air, then the layers top first. The bottom is either a
// perfect conductor (metal plate) or a Mur boundary in the last layer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gprda/error.hpp"
#include "gprda/signal.hpp"

namespace gprda::fdtd {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double kEps0 = 1.0 / (kMu0 * kSpeedOfLight * kSpeedOfLight);

enum class WaveformKind { ricker, gaussian, gaussian_derivative };
enum class BottomBoundary { perfect_conductor, absorbing };

inline WaveformKind parse_waveform(std::string_view s) {
  if (s == "ricker") return WaveformKind::ricker;
  if (s == "gaussian") return WaveformKind::gaussian;
  if (s == "gaussian_derivative") return WaveformKind::gaussian_derivative;
  throw ConfigError("unknown waveform kind '" + std::string(s) + "'");
}

inline std::string to_string(WaveformKind k) {
  switch (k) {
    case WaveformKind::ricker: return "ricker";
    case WaveformKind::gaussian: return "gaussian";
    case WaveformKind::gaussian_derivative: return "gaussian_derivative";
  }
  throw ConfigError("unknown waveform kind");
}

inline BottomBoundary parse_bottom(std::string_view s) {
  if (s == "perfect_conductor") return BottomBoundary::perfect_conductor;
  if (s == "absorbing") return BottomBoundary::absorbing;
  throw ConfigError("unknown bottom boundary '" + std::string(s) + "'");
}

inline std::string to_string(BottomBoundary b) {
  return b == BottomBoundary::perfect_conductor ? "perfect_conductor" : "absorbing";
}

struct MaterialLayer {
  double relative_permittivity = 1.0;
  double conductivity = 0.0;  // S/m
  double thickness = 0.1;     // m
};

struct LayerStack {
  double air_gap = 0.0;  // antenna height above the surface, m
  std::vector<MaterialLayer> layers;
  BottomBoundary bottom = BottomBoundary::perfect_conductor;

  void validate() const {
    if (layers.empty()) throw ConfigError("LayerStack needs at least one layer");
    if (!(air_gap >= 0.0)) throw ConfigError("LayerStack air_gap must be >= 0");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      const std::string where = "layer " + std::to_string(i + 1);
      if (!(l.relative_permittivity >= 1.0)) throw ConfigError(where + ": relative permittivity must be >= 1");
      if (!(l.conductivity >= 0.0)) throw ConfigError(where + ": conductivity must be >= 0");
      if (!(l.thickness > 0.0)) throw ConfigError(where + ": thickness must be > 0");
    }
  }

  double total_depth() const {
    double d = air_gap;
    for (const auto& l : layers) d += l.thickness;
    return d;
  }
};

struct RadarConfig {
  WaveformKind waveform = WaveformKind::ricker;
  double center_frequency = 2.7e9;  // Hz
  double time_window = 10e-9;       // s
  int cells_per_min_wavelength = 40;
  double courant_factor = 0.99;
  double gain = 1.0;
  double noise_std = 0.0;    // in units of the source peak amplitude
  double time_jitter = 0.0;  // s, standard deviation of a per-trace time shift
  std::size_t trace_length = 1640;

  void validate() const {
    if (!(center_frequency > 0.0)) throw ConfigError("radar: center_frequency must be > 0");
    if (!(time_window > 0.0)) throw ConfigError("radar: time_window must be > 0");
    if (cells_per_min_wavelength < 10) throw ConfigError("radar: cells_per_min_wavelength must be >= 10");
    if (!(courant_factor > 0.0)) throw ConfigError("radar: courant_factor must be > 0");
    if (courant_factor > 1.0) {
      throw StabilityError("radar: courant_factor " + std::to_string(courant_factor) +
                           " exceeds the 1D stability limit of 1");
    }
    if (trace_length < 2) throw ConfigError("radar: trace_length must be >= 2");
    if (!(noise_std >= 0.0) || !(time_jitter >= 0.0)) throw ConfigError("radar: noise_std and time_jitter must be >= 0");
  }

  // Highest frequency the grid must resolve.
  double max_frequency() const { return 3.0 * center_frequency; }
  double output_dt() const { return time_window / static_cast<double>(trace_length); }
};

/// Time of the waveform center. Every kind is below 1e-12 of its peak
/// outside [0, 2 * pulse_center].
inline double pulse_center(double f) { return 2.0 / f; }
inline double pulse_half_width(double f) { return pulse_center(f); }

/// Source excitation at absolute time t, peak-normalized to 1.
inline double waveform(WaveformKind kind, double f, double t) {
  if (!(f > 0.0)) throw ConfigError("waveform: frequency must be > 0");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double tau = t - pulse_center(f);
  switch (kind) {
    case WaveformKind::ricker: {
      const double z = pi2 * f * f * tau * tau;
      return (1.0 - 2.0 * z) * std::exp(-z);
    }
    case WaveformKind::gaussian: {
      const double zeta = 2.0 * pi2 * f * f;
      return std::exp(-zeta * tau * tau);
    }
    case WaveformKind::gaussian_derivative: {
      // -d/dt of the gaussian above, scaled so the positive lobe peaks at 1.
      const double zeta = 2.0 * pi2 * f * f;
      const double scale = std::sqrt(2.0 * zeta) * std::exp(-0.5);
      return -2.0 * zeta * tau * std::exp(-zeta * tau * tau) / scale;
    }
  }
  throw ConfigError("waveform: unknown kind");
}

/// Two-way travel time from the antenna down to interface `interface_index`
/// (0 = ground surface, k = bottom of layer k) and back.
inline double expected_two_way_delay(const LayerStack& stack, std::size_t interface_index) {
  if (interface_index > stack.layers.size()) {
    throw ConfigError("expected_two_way_delay: interface index " + std::to_string(interface_index) +
                      " exceeds layer count " + std::to_string(stack.layers.size()));
  }
  double t = 2.0 * stack.air_gap / kSpeedOfLight;
  for (std::size_t i = 0; i < interface_index; ++i) {
    const auto& l = stack.layers[i];
    t += 2.0 * l.thickness * std::sqrt(l.relative_permittivity) / kSpeedOfLight;
  }
  return t;
}

/// Grid actually used for a scene.
struct GridSpec {
  double dx = 0.0;
  double dt = 0.0;
  std::size_t antenna = 0;   // E-node index of source/receiver
  std::size_t nodes = 0;     // number of E nodes
  std::size_t steps = 0;
};

inline constexpr std::size_t kAirCellsAboveAntenna = 20;
inline constexpr std::size_t kAbsorbingPadCells = 40;

inline GridSpec make_grid(const LayerStack& stack, const RadarConfig& radar) {
  double eps_max = 1.0;
  for (const auto& l : stack.layers) eps_max = std::max(eps_max, l.relative_permittivity);
  const double dx0 = kSpeedOfLight / (radar.max_frequency() * std::sqrt(eps_max)) /
                     static_cast<double>(radar.cells_per_min_wavelength);
  // Shrink dx so the antenna-to-bottom distance is a whole number of cells.
  const double depth = stack.total_depth();
  const auto depth_cells = static_cast<std::size_t>(std::ceil(depth / dx0 - 1e-9));
  GridSpec g;
  g.dx = depth / static_cast<double>(depth_cells);
  g.dt = radar.courant_factor * g.dx / kSpeedOfLight;
  g.antenna = kAirCellsAboveAntenna;
  g.nodes = kAirCellsAboveAntenna + depth_cells + 1;
  if (stack.bottom == BottomBoundary::absorbing) g.nodes += kAbsorbingPadCells;
  g.steps = static_cast<std::size_t>(std::ceil(radar.time_window / g.dt)) + 2;
  return g;
}

/// Receiver field at every FDTD step of a clean run.
struct FieldRecord {
  std::vector<double> samples;
  double dt = 0.0;
  double max_field = 0.0;  // max |E| over the whole grid and run
};

namespace detail {

struct NodeMaterial {
  double eps_r;
  double sigma;
};

// Volume-averaged material over the control volume of E node k.
inline NodeMaterial node_material(const LayerStack& stack, const GridSpec& g, std::size_t k) {
  const double zc = (static_cast<double>(k) - static_cast<double>(g.antenna)) * g.dx;
  const double lo = zc - 0.5 * g.dx;
  const double hi = zc + 0.5 * g.dx;
  double eps = 0.0, sig = 0.0;
  auto accumulate = [&](double a, double b, double e, double s) {
    const double overlap = std::max(0.0, std::min(hi, b) - std::max(lo, a));
    eps += overlap * e;
    sig += overlap * s;
  };
  const double inf = std::numeric_limits<double>::infinity();
  accumulate(-inf, stack.air_gap, 1.0, 0.0);
  double top = stack.air_gap;
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const auto& l = stack.layers[i];
    const double bottom = (i + 1 == stack.layers.size()) ? inf : top + l.thickness;
    accumulate(top, bottom, l.relative_permittivity, l.conductivity);
    top += l.thickness;
  }
  return {eps / g.dx, sig / g.dx};
}

}  // namespace detail

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed for item `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

/// Clean physics run: E update (with conductivity loss), source injection,
/// boundaries, receiver sample, then H update.
inline FieldRecord simulate_field(const LayerStack& stack, const RadarConfig& radar) {
  stack.validate();
  radar.validate();
  const double first_return = pulse_center(radar.center_frequency) + 2.0 * stack.air_gap / kSpeedOfLight;
  if (radar.time_window <= first_return) {
    throw ConfigError("radar: time_window is shorter than the ground-return arrival time");
  }

  const GridSpec g = make_grid(stack, radar);
  const std::size_t n = g.nodes;
  std::vector<double> ez(n, 0.0), hy(n - 1, 0.0), ca(n, 1.0), cb(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto m = detail::node_material(stack, g, k);
    const double loss = m.sigma * g.dt / (2.0 * kEps0 * m.eps_r);
    ca[k] = (1.0 - loss) / (1.0 + loss);
    cb[k] = (g.dt / (kEps0 * m.eps_r * g.dx)) / (1.0 + loss);
  }
  const double ch = g.dt / (kMu0 * g.dx);
  const double mur_top = (kSpeedOfLight * g.dt - g.dx) / (kSpeedOfLight * g.dt + g.dx);
  const double v_bottom = kSpeedOfLight / std::sqrt(stack.layers.back().relative_permittivity);
  const double mur_bottom = (v_bottom * g.dt - g.dx) / (v_bottom * g.dt + g.dx);
  // A soft source adds to one node; scaling by 2S makes the radiated pulse
  // amplitude match the waveform in vacuum.
  const double source_scale = 2.0 * radar.courant_factor;

  FieldRecord out;
  out.samples.resize(g.steps);
  out.dt = g.dt;
  const std::size_t a = g.antenna;
  for (std::size_t step = 0; step < g.steps; ++step) {
    const double t = static_cast<double>(step) * g.dt;
    const double e_top_old = ez[0], e_top_next_old = ez[1];
    const double e_bot_old = ez[n - 1], e_bot_prev_old = ez[n - 2];
    double field_max = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      ez[k] = ca[k] * ez[k] + cb[k] * (hy[k] - hy[k - 1]);
      field_max = std::max(field_max, std::abs(ez[k]));
    }
    ez[a] += source_scale * waveform(radar.waveform, radar.center_frequency, t);
    ez[0] = e_top_next_old + mur_top * (ez[1] - e_top_old);
    if (stack.bottom == BottomBoundary::perfect_conductor) {
      ez[n - 1] = 0.0;
    } else {
      ez[n - 1] = e_bot_prev_old + mur_bottom * (ez[n - 2] - e_bot_old);
    }
    out.samples[step] = ez[a];
    field_max = std::max({field_max, std::abs(ez[a]), std::abs(ez[0]), std::abs(ez[n - 1])});
    out.max_field = std::max(out.max_field, field_max);
    for (std::size_t k = 0; k + 1 < n; ++k) hy[k] += ch * (ez[k + 1] - ez[k]);
  }
  return out;
}

/// Resamples a clean field onto the radar's output grid, applying gain,
/// a seeded time shift and additive Gaussian noise.
inline AScan record_trace(const FieldRecord& field, const RadarConfig& radar, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shift = radar.time_jitter > 0.0 ? radar.time_jitter * normal(rng) : 0.0;
  const double dt_out = radar.output_dt();
  AScan trace;
  trace.dt = dt_out;
  trace.samples.resize(radar.trace_length);
  const std::size_t steps = field.samples.size();
  for (std::size_t j = 0; j < radar.trace_length; ++j) {
    const double t = static_cast<double>(j) * dt_out - shift;
    double v = 0.0;
    if (t >= 0.0) {
      const double pos = t / field.dt;
      const auto i0 = static_cast<std::size_t>(pos);
      if (i0 + 1 < steps) {
        const double frac = pos - static_cast<double>(i0);
        v = (1.0 - frac) * field.samples[i0] + frac * field.samples[i0 + 1];
      } else {
        v = field.samples.back();
      }
    }
    v *= radar.gain;
    if (radar.noise_std > 0.0) v += radar.noise_std * normal(rng);
    trace.samples[j] = v;
  }
  return trace;
}

/// The reflected trace recorded at the antenna over the time window.
inline AScan simulate_ascan(const LayerStack& stack, const RadarConfig& radar, std::uint64_t seed) {
  return record_trace(simulate_field(stack, radar), radar, seed);
}

}  // namespace gprda::fdtd
