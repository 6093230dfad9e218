#include <gtest/gtest.h>

#include <cmath>

#include "gprda/dataset.hpp"
#include "gprda/fdtd.hpp"
#include "support/oracles.hpp"

using namespace gprda;
using namespace gprda::fdtd;

namespace {

LayerStack single(double eps, double sigma, double depth, double air = 0.05) {
  LayerStack s;
  s.air_gap = air;
  s.layers = {{eps, sigma, depth}};
  return s;
}

}  // namespace

TEST(Waveform, RickerPeaksAtCenter) {
  const double f = 2.7e9;
  EXPECT_DOUBLE_EQ(waveform(WaveformKind::ricker, f, pulse_center(f)), 1.0);
  EXPECT_DOUBLE_EQ(waveform(WaveformKind::gaussian, f, pulse_center(f)), 1.0);
}

TEST(Waveform, GaussianDerivativePeakIsOne) {
  const double f = 2.0e9;
  double peak = 0.0;
  for (int i = 0; i < 200000; ++i) peak = std::max(peak, waveform(WaveformKind::gaussian_derivative, f, i * 1e-14));
  EXPECT_NEAR(peak, 1.0, 1e-6);
}

TEST(Waveform, NegligibleOutsideTheSupportWindow) {
  const double f = 2.7e9, tc = pulse_center(f);
  for (auto kind : {WaveformKind::ricker, WaveformKind::gaussian, WaveformKind::gaussian_derivative}) {
    for (double k : {1.0, 1.2, 2.0}) {
      EXPECT_LT(std::abs(waveform(kind, f, tc + k * pulse_half_width(f))), 1e-12);
      EXPECT_LT(std::abs(waveform(kind, f, tc - k * pulse_half_width(f))), 1e-12);
    }
  }
}

TEST(Waveform, RickerIntegratesToZero) {
  const double f = 2.7e9, dt = 1e-13;
  double s = 0.0;
  for (double t = 0.0; t < 2.0 * pulse_center(f) + 2e-9; t += dt) s += waveform(WaveformKind::ricker, f, t) * dt;
  EXPECT_LT(std::abs(s), 1e-8 * dt);
}

TEST(Waveform, RejectsNonPositiveFrequency) { EXPECT_THROW(waveform(WaveformKind::ricker, 0.0, 0.0), ConfigError); }

TEST(Waveform, ParsesKindNames) {
  EXPECT_EQ(parse_waveform("gaussian_derivative"), WaveformKind::gaussian_derivative);
  EXPECT_THROW(parse_waveform("chirp"), ConfigError);
}

TEST(Delay, HandComputedValues) {
  // 2 * 0.15 * 2 / c
  EXPECT_NEAR(expected_two_way_delay(single(4.0, 0.0, 0.15, 0.0), 1), 2.0013845711889e-9, 1e-20);
  LayerStack vac;
  vac.layers = {{1.0, 0.0, 0.1}, {1.0, 0.0, 0.2}};
  EXPECT_NEAR(expected_two_way_delay(vac, 2), 2.0013845711889e-9, 1e-20);
  EXPECT_EQ(expected_two_way_delay(vac, 0), 0.0);
}

TEST(Delay, StrictlyIncreasingInInterface) {
  LayerStack s;
  s.air_gap = 0.05;
  s.layers = {{2.0, 0.0, 0.1}, {6.0, 0.01, 0.05}, {9.0, 0.0, 0.2}};
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_GT(expected_two_way_delay(s, k), expected_two_way_delay(s, k - 1));
  EXPECT_THROW(expected_two_way_delay(s, 4), ConfigError);
}

TEST(Simulate, PlateEchoMatchesTravelTime) {
  RadarConfig r;
  const auto s = single(4.0, 0.0, 0.15);
  const auto trace = simulate_ascan(s, r, 1);
  const auto echo = oracle::plate_echo(trace, s, r);
  EXPECT_NEAR(echo.delay, expected_two_way_delay(s, 1), 2.0 * r.output_dt());
  // Surface-to-plate spacing of 2 d sqrt(eps) / c.
  EXPECT_NEAR(echo.delay - expected_two_way_delay(s, 0), 2.0013845711889e-9, 2.0 * r.output_dt());
}

TEST(Simulate, IdenticalLayersHaveNoInternalEcho) {
  RadarConfig r;
  LayerStack one = single(6.0, 0.0, 0.2);
  LayerStack two = one;
  two.layers = {{6.0, 0.0, 0.1}, {6.0, 0.0, 0.1}};
  const auto a = simulate_ascan(one, r, 0), b = simulate_ascan(two, r, 0);
  const auto env = envelope(b.samples);
  const double tc = pulse_center(r.center_frequency);
  const double surface = tc + expected_two_way_delay(two, 0);
  const double mid = tc + expected_two_way_delay(two, 1);
  std::size_t is = static_cast<std::size_t>(surface / b.dt);
  double surface_peak = 0.0;
  for (std::size_t i = is - 40; i < is + 40; ++i) surface_peak = std::max(surface_peak, env[i]);
  // Around the would-be interface echo the two-layer trace equals the one-layer trace.
  const std::size_t im = static_cast<std::size_t>(mid / b.dt);
  for (std::size_t i = im - 20; i < im + 20; ++i) {
    EXPECT_LT(std::abs(b.samples[i] - a.samples[i]), 0.01 * surface_peak);
  }
}

TEST(Simulate, ConductivityAttenuatesPlateEcho) {
  RadarConfig r;
  const auto lossless = single(6.0, 0.0, 0.2), lossy = single(6.0, 0.05, 0.2);
  const auto a = oracle::plate_echo(simulate_ascan(lossless, r, 0), lossless, r);
  const auto b = oracle::plate_echo(simulate_ascan(lossy, r, 0), lossy, r);
  EXPECT_LT(b.amplitude, a.amplitude);
}

TEST(Simulate, DeepChangesStayQuietUntilTheyCanArrive) {
  // Same grid (same largest permittivity and depth); only the second layer
  // differs, so the traces must agree until its echo can arrive.
  RadarConfig r;
  LayerStack a;
  a.air_gap = 0.1;
  a.layers = {{8.0, 0.02, 0.1}, {4.0, 0.0, 0.1}};
  LayerStack b = a;
  b.layers[1] = {6.0, 0.01, 0.1};
  const auto ta = simulate_ascan(a, r, 0).samples, tb = simulate_ascan(b, r, 0).samples;
  double peak = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) peak = std::max(peak, std::abs(ta[i] - tb[i]));
  ASSERT_GT(peak, 0.0);
  const double quiet = pulse_center(r.center_frequency) + expected_two_way_delay(a, 1) -
                       pulse_half_width(r.center_frequency);
  for (std::size_t i = 0; static_cast<double>(i) * r.output_dt() < quiet; ++i) {
    EXPECT_LT(std::abs(ta[i] - tb[i]), 1e-9 * peak) << i;
  }
}

TEST(Simulate, StaysBounded) {
  RadarConfig r;
  r.courant_factor = 1.0;
  LayerStack s = single(12.9, 0.0, 0.25, 0.0);
  EXPECT_LT(simulate_field(s, r).max_field, 10.0);
}

TEST(Simulate, DeterministicForSeed) {
  RadarConfig r;
  r.noise_std = 0.05;
  r.time_jitter = 20e-12;
  r.gain = 0.8;
  const auto s = single(5.0, 0.01, 0.2);
  const auto a = simulate_ascan(s, r, 42), b = simulate_ascan(s, r, 42), c = simulate_ascan(s, r, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Simulate, CleanTraceIgnoresSeed) {
  RadarConfig r;
  const auto s = single(5.0, 0.01, 0.2);
  EXPECT_EQ(simulate_ascan(s, r, 1).samples, simulate_ascan(s, r, 2).samples);
  EXPECT_EQ(simulate_ascan(s, r, 1).size(), r.trace_length);
  EXPECT_DOUBLE_EQ(simulate_ascan(s, r, 1).dt, r.time_window / r.trace_length);
}

TEST(Simulate, RejectsUnstableAndShortWindows) {
  RadarConfig r;
  r.courant_factor = 1.2;
  EXPECT_THROW(simulate_ascan(single(4.0, 0.0, 0.15), r, 0), StabilityError);
  RadarConfig w;
  w.time_window = 0.5e-9;
  EXPECT_THROW(simulate_ascan(single(4.0, 0.0, 0.15), w, 0), ConfigError);
  RadarConfig c;
  c.cells_per_min_wavelength = 8;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Simulate, RejectsInvalidStacks) {
  RadarConfig r;
  EXPECT_THROW(simulate_ascan(single(0.5, 0.0, 0.1), r, 0), ConfigError);
  EXPECT_THROW(simulate_ascan(single(4.0, -0.1, 0.1), r, 0), ConfigError);
  EXPECT_THROW(simulate_ascan(single(4.0, 0.0, 0.0), r, 0), ConfigError);
  EXPECT_THROW(simulate_ascan(LayerStack{}, r, 0), ConfigError);
}

TEST(GridDataset, CartesianCountAndLabels) {
  ParameterSpace space;
  space.params = {{"permittivity_1", 3.0, 5.0, 1.0}, {"conductivity_1", 0.0, 0.01, 0.01}, {"depth_1", 0.2, 0.2, 0.1}};
  RadarConfig r;
  r.trace_length = 256;
  const auto ds = generate_grid_dataset(space, single(4.0, 0.0, 0.2), r, 3);
  EXPECT_EQ(ds.size(), 6u);
  EXPECT_EQ(ds.labels.size(), 18u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t p = 0; p < 3; ++p) {
      EXPECT_GE(ds.label(i, p), space.params[p].min);
      EXPECT_LE(ds.label(i, p), space.params[p].max);
    }
    const auto t = ds.trace(i);
    EXPECT_EQ(*std::max_element(t.begin(), t.end()), 1.0);
  }
}

TEST(GridDataset, SameSeedIsBitIdenticalAndParallelSafe) {
  ParameterSpace space;
  space.params = {{"permittivity_1", 3.0, 12.9, 2.475}, {"depth_1", 0.15, 0.25, 0.1}};
  RadarConfig r;
  r.trace_length = 200;
  r.noise_std = 0.02;
  const auto a = generate_grid_dataset(space, single(4.0, 0.0, 0.2), r, 9, 1);
  const auto b = generate_grid_dataset(space, single(4.0, 0.0, 0.2), r, 9, 3);
  EXPECT_EQ(a.traces, b.traces);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.size(), 10u);
}

TEST(GridDataset, EmptyGridIsRejected) {
  ParameterSpace space;
  RadarConfig r;
  EXPECT_THROW(generate_grid_dataset(space, single(4.0, 0.0, 0.2), r, 0), ConfigError);
}

TEST(DatasetIo, RoundTripsThroughDisk) {
  ParameterSpace space;
  space.params = {{"permittivity_1", 3.0, 4.0, 1.0}};
  RadarConfig r;
  r.trace_length = 128;
  auto ds = generate_grid_dataset(space, single(4.0, 0.0, 0.2), r, 1);
  const auto dir = std::filesystem::temp_directory_path() / "gprda_dataset_io";
  std::filesystem::remove_all(dir);
  write_dataset(dir, ds);
  const auto back = read_dataset(dir);
  EXPECT_EQ(back.parameters, ds.parameters);
  EXPECT_EQ(back.labels, ds.labels);
  ASSERT_EQ(back.traces.size(), ds.traces.size());
  for (std::size_t i = 0; i < ds.traces.size(); ++i) {
    EXPECT_EQ(back.traces[i], static_cast<double>(static_cast<float>(ds.traces[i])));
  }
  EXPECT_THROW(read_dataset(dir / "missing"), DependencyError);
}
