#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "gprda/models.hpp"
#include "gprda/nn/ops.hpp"
#include "support/oracles.hpp"

using namespace gprda;
using namespace gprda::nn;

namespace {

std::vector<LayerShape> of(const Model& m, const std::string& network, const std::string& layer) {
  std::vector<LayerShape> out;
  for (const auto& s : m.shapes) {
    if (s.network == network && s.layer == layer) out.push_back(s);
  }
  return out;
}

bool all_finite(const Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

TEST(Architecture, FullScaleShapes) {
  const auto m = build_phydann(2, 6560, 3);
  const auto ext = of(m, "extractor", "conv");
  ASSERT_EQ(ext.size(), 4u);
  const Shape want_ext[4] = {{32, 1312}, {64, 262}, {128, 65}, {256, 16}};
  const std::size_t k[4] = {5, 5, 4, 4};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(ext[i].output, want_ext[i]);
    EXPECT_EQ(ext[i].kernel_size, k[i]);
    EXPECT_EQ(ext[i].stride, k[i]);
    EXPECT_EQ(ext[i].activation, "leaky_relu");
  }
  const auto est = of(m, "estimator", "conv");
  ASSERT_EQ(est.size(), 2u);
  EXPECT_EQ(est[0].output, (Shape{512, 5}));
  EXPECT_EQ(est[1].output, (Shape{10240, 1}));
  EXPECT_EQ(of(m, "estimator", "linear").at(0).output, (Shape{3}));
  EXPECT_EQ(of(m, "estimator", "linear").at(0).activation, "linear");
  const auto dis = of(m, "discriminator", "conv");
  ASSERT_EQ(dis.size(), 2u);
  EXPECT_EQ(dis[0].output, (Shape{512, 5}));
  EXPECT_EQ(dis[1].output, (Shape{1024, 1}));
  EXPECT_EQ(of(m, "discriminator", "linear").at(0).output, (Shape{2}));
  const auto up = of(m, "reconstructor", "upsample");
  const auto rc = of(m, "reconstructor", "conv");
  ASSERT_EQ(up.size(), 4u);
  ASSERT_EQ(rc.size(), 4u);
  const std::size_t lens[4] = {41, 164, 821, 6560}, ch[4] = {128, 64, 32, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(up[i].output[1], lens[i]);
    EXPECT_EQ(rc[i].output, (Shape{ch[i], lens[i]}));
    EXPECT_EQ(rc[i].kernel_size, 3u);
    EXPECT_EQ(rc[i].stride, 1u);
  }
  EXPECT_EQ(rc[3].activation, "linear");
  EXPECT_EQ(of(m, "reconstructor", "sum_fuse").size(), 1u);
}

TEST(Architecture, ReducedLengthForwardIsFinite) {
  for (auto kind : {ModelKind::cnn, ModelKind::dann, ModelKind::phydann1, ModelKind::phydann2}) {
    ArchitectureOptions opt;
    opt.seed = 3;
    const auto m = build_model(kind, 1640, 3, opt);
    std::mt19937_64 rng(1);
    NoGradGuard g;
    const auto x = oracle::random_tensor({2, 1, 1640}, rng, false);
    const auto f = m.features(x);
    EXPECT_EQ(f.shape(), (Shape{2, 256, 4}));
    const auto y = m.estimate(f);
    EXPECT_EQ(y.shape(), (Shape{2, 3}));
    EXPECT_TRUE(all_finite(y));
    if (m.has_discriminator()) {
      const auto d = m.domain_logits(f, 0.5);
      EXPECT_EQ(d.shape(), (Shape{2, 2}));
      EXPECT_TRUE(all_finite(d));
    } else {
      EXPECT_THROW(m.domain_logits(f, 0.5), ConfigError);
    }
    if (m.has_reconstructor()) {
      const auto r = m.reconstruct(f, y);
      EXPECT_EQ(r.shape(), (Shape{2, 1, 1640}));
      EXPECT_TRUE(all_finite(r));
    }
  }
}

TEST(Architecture, ShortInputIsAShapeError) {
  EXPECT_THROW(build_cnn(100, 1), ShapeError);
  EXPECT_THROW(build_cnn(1640, 0), ConfigError);
  EXPECT_THROW(build_phydann(3, 1640, 1), ConfigError);
}

TEST(Architecture, SeedDeterminesWeights) {
  ArchitectureOptions a;
  a.seed = 9;
  const auto m1 = build_dann(1640, 2, a), m2 = build_dann(1640, 2, a);
  EXPECT_EQ(m1.store.flat_values(), m2.store.flat_values());
  a.seed = 10;
  EXPECT_NE(m1.store.flat_values(), build_dann(1640, 2, a).store.flat_values());
}

TEST(Architecture, ParameterGroups) {
  const auto m = build_phydann(2, 1640, 1);
  std::set<std::string> groups;
  for (const auto& p : m.store.params()) groups.insert(p.group);
  EXPECT_EQ(groups, (std::set<std::string>{"extractor", "estimator", "discriminator", "reconstructor"}));
  const auto c = build_cnn(1640, 1);
  for (const auto& p : c.store.params()) {
    EXPECT_TRUE(p.group == "extractor" || p.group == "estimator") << p.name;
  }
}

TEST(Architecture, VariantTwoDependsOnParameters) {
  const auto m2 = build_phydann(2, 1640, 2);
  const auto m1 = build_phydann(1, 1640, 2);
  std::mt19937_64 rng(2);
  NoGradGuard g;
  const auto x = oracle::random_tensor({1, 1, 1640}, rng, false);
  const auto p = Tensor::from({1, 2}, {0.1, 0.9}), q = Tensor::from({1, 2}, {0.8, 0.2});
  const auto f2 = m2.features(x);
  const auto a = m2.reconstruct(f2, p), b = m2.reconstruct(f2, q);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
  EXPECT_GT(diff, 0.0);
  const auto f1 = m1.features(x);
  const auto c = m1.reconstruct(f1, p), d = m1.reconstruct(f1, q);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c.values()[i], d.values()[i]);
}

TEST(Architecture, VariantTwoEmbeddingGetsGradient) {
  auto m = build_phydann(2, 1640, 2);
  std::mt19937_64 rng(4);
  const auto x = oracle::random_tensor({2, 1, 1640}, rng, false);
  const auto f = m.features(x);
  const auto r = m.reconstruct(f, m.estimate(f).detach());
  mse_loss(r, Tensor::zeros(r.shape())).backward();
  double embed = 0.0, estimator = 0.0;
  for (const auto& p : m.store.params()) {
    double s = 0.0;
    for (double g : p.tensor.grad()) s += std::abs(g);
    if (p.name.starts_with("reconstructor.embed")) embed += s;
    if (p.group == "estimator") estimator += s;
  }
  EXPECT_GT(embed, 0.0);
  EXPECT_EQ(estimator, 0.0);
}

TEST(Architecture, BranchesAreIndependent) {
  // The discriminator loss must not touch estimator weights and vice versa.
  auto m = build_dann(1640, 1);
  std::mt19937_64 rng(5);
  const auto x = oracle::random_tensor({2, 1, 1640}, rng, false);
  const auto f = m.features(x);
  domain_loss(m.domain_logits(f, 1.0), Domain::source).backward();
  for (const auto& p : m.store.params()) {
    if (p.group == "estimator") {
      EXPECT_TRUE(p.tensor.grad().empty()) << p.name;
    }
  }
  m.store.zero_grad();
  const auto f2 = m.features(x);
  mse_loss(m.estimate(f2), Tensor::zeros({2, 1})).backward();
  for (const auto& p : m.store.params()) {
    if (p.group == "discriminator") {
      EXPECT_TRUE(p.tensor.grad().empty()) << p.name;
    }
  }
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto dir = std::filesystem::temp_directory_path() / "gprda_ckpt_test";
  std::filesystem::remove_all(dir);
  ArchitectureOptions opt;
  opt.seed = 77;
  auto m = build_phydann(2, 1640, 3, opt);
  for (auto& p : m.store.params()) p.tensor.mutable_values()[0] += 0.25;
  save_checkpoint(dir, m);
  const auto back = load_checkpoint(dir);
  EXPECT_EQ(back.kind, ModelKind::phydann2);
  EXPECT_EQ(back.store.flat_values(), m.store.flat_values());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_checkpoint(dir), DependencyError);
}
