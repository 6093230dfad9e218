#include <gtest/gtest.h>

#include <cmath>

#include "gprda/train.hpp"
#include "support/oracles.hpp"

using namespace gprda;

namespace {

// Shortest trace the extractor accepts; the heads collapse to length 1.
constexpr std::size_t kLen = 400;

TrainConfig quick(std::size_t epochs, std::size_t batch = 5, std::uint64_t seed = 11) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.seed = seed;
  return c;
}

Model make(ModelKind kind, std::size_t outputs, std::uint64_t seed = 11) {
  ArchitectureOptions a;
  a.seed = seed;
  return build_model(kind, kLen, outputs, a);
}

}  // namespace

TEST(Training, SupervisedFitsToyData) {
  const auto src = oracle::toy_dataset(5, 5, kLen);
  const auto targets = make_targets(src, {"a", "b"});
  auto m = make(ModelKind::cnn, 2);
  const auto rep = train_cnn(m, src, targets, quick(40));
  ASSERT_TRUE(rep.finite());
  EXPECT_LT(rep.epochs.back().regression, 0.05);
  EXPECT_LT(rep.epochs.back().regression, rep.epochs.front().regression);
  const auto pred = predict(m, src, targets.scaler);
  ASSERT_EQ(pred.size(), 2 * src.size());
  double err = 0.0;
  for (std::size_t r = 0; r < src.size(); ++r) err = std::max(err, std::abs(pred[2 * r] - src.label(r, 0)));
  EXPECT_LT(err, 0.3);
}

TEST(Training, SameSeedSameWeights) {
  const auto src = oracle::toy_dataset(4, 4, kLen);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.02, 0.8), 4);
  const auto targets = make_targets(src, {"a"});
  auto m1 = make(ModelKind::dann, 1), m2 = make(ModelKind::dann, 1);
  const auto r1 = train_dann(m1, src, tgt, targets, quick(3, 4));
  const auto r2 = train_dann(m2, src, tgt, targets, quick(3, 4));
  EXPECT_EQ(m1.store.flat_values(), m2.store.flat_values());
  EXPECT_EQ(report_table(r1).rows, report_table(r2).rows);
  auto m3 = make(ModelKind::dann, 1);
  train_dann(m3, src, tgt, targets, quick(3, 4, 12));
  EXPECT_NE(m1.store.flat_values(), m3.store.flat_values());
}

TEST(Training, ZeroEpochsIsANoOp) {
  const auto src = oracle::toy_dataset(3, 3, kLen);
  auto m = make(ModelKind::cnn, 1);
  const auto before = m.store.flat_values();
  const auto rep = train_cnn(m, src, make_targets(src, {"b"}), quick(0));
  EXPECT_TRUE(rep.epochs.empty());
  EXPECT_EQ(rep.iterations, 0u);
  EXPECT_EQ(m.store.flat_values(), before);
}

TEST(Training, LambdaTraceRisesFromZero) {
  const auto src = oracle::toy_dataset(4, 4, kLen);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.02), 4);
  auto m = make(ModelKind::dann, 1);
  const auto rep = train_dann(m, src, tgt, make_targets(src, {"a"}), quick(3, 4));
  ASSERT_EQ(rep.lambda_trace.size(), rep.iterations);
  ASSERT_EQ(rep.iterations, 12u);
  EXPECT_EQ(rep.lambda_trace.front(), 0.0);
  EXPECT_NEAR(rep.lambda_trace.back(), 2.0 / (1.0 + std::exp(-10.0)) - 1.0, 1e-12);
  for (std::size_t i = 1; i < rep.lambda_trace.size(); ++i) EXPECT_GT(rep.lambda_trace[i], rep.lambda_trace[i - 1]);
}

TEST(Training, ZeroLambdaMatchesSupervisedRun) {
  const auto src = oracle::toy_dataset(4, 4, kLen);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.05, 0.7), 4);
  const auto targets = make_targets(src, {"a", "b"});
  auto cfg = quick(3, 4);
  cfg.fixed_lambda = 0.0;
  auto dann = make(ModelKind::dann, 2);
  const auto disc_before = dann.store.flat_values("discriminator");
  train_dann(dann, src, tgt, targets, cfg);
  auto plain = make(ModelKind::cnn, 2);
  train_cnn(plain, src, targets, quick(3, 4));
  EXPECT_EQ(dann.store.flat_values("estimator"), plain.store.flat_values("estimator"));
  EXPECT_EQ(dann.store.flat_values("extractor"), plain.store.flat_values("extractor"));
  EXPECT_EQ(dann.store.flat_values("discriminator"), disc_before);
}

TEST(Training, ZeroReconstructionWeightMatchesDann) {
  const auto src = oracle::toy_dataset(4, 4, kLen);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.05, 0.7), 4);
  const auto targets = make_targets(src, {"a"});
  auto cfg = quick(2, 4);
  cfg.reconstruction_weight = 0.0;
  for (int variant : {1, 2}) {
    ArchitectureOptions a;
    a.seed = 11;
    auto phy = build_phydann(variant, kLen, 1, a);
    const auto rec_before = phy.store.flat_values("reconstructor");
    train_phydann(phy, src, tgt, targets, cfg);
    auto dann = make(ModelKind::dann, 1);
    train_dann(dann, src, tgt, targets, cfg);
    EXPECT_EQ(phy.store.flat_values("estimator"), dann.store.flat_values("estimator"));
    EXPECT_EQ(phy.store.flat_values("discriminator"), dann.store.flat_values("discriminator"));
    EXPECT_EQ(phy.store.flat_values("reconstructor"), rec_before);
  }
}

TEST(Training, EstimatorIgnoresReconstructionLoss) {
  // With a huge reconstruction weight the estimator still follows the same
  // trajectory: the reconstruction path only sees detached estimates.
  const auto src = oracle::toy_dataset(4, 4, kLen);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.05, 0.7), 4);
  const auto targets = make_targets(src, {"a"});
  auto cfg = quick(1, 4);
  auto m = make(ModelKind::phydann2, 1);
  const auto est_before = m.store.flat_values("estimator");
  auto probe = make(ModelKind::phydann2, 1);
  const auto x = detail::gather_traces(src, std::vector<std::size_t>{0, 1});
  const auto f = probe.features(x);
  const auto r = probe.reconstruct(f, probe.estimate(f).detach());
  nn::mse_loss(r, x).backward();
  for (const auto& p : probe.store.params()) {
    if (p.group == "estimator") {
      EXPECT_TRUE(p.tensor.grad().empty()) << p.name;
    }
  }
  train_phydann(m, src, tgt, targets, cfg);
  EXPECT_NE(m.store.flat_values("estimator"), est_before);
}

TEST(Training, ReconstructionLossFalls) {
  // Wide pulses: the coarse features can only carry broad shapes.
  const auto src = oracle::toy_dataset(4, 4, kLen, 0.0, 1.0, 0.15);
  const auto tgt = oracle::as_target(oracle::toy_dataset(4, 4, kLen, 0.05, 0.7, 0.15), 4);
  auto m = make(ModelKind::phydann1, 1);
  auto cfg = quick(10, 4);
  cfg.lr_decay = 1.0;
  const auto rep = train_phydann(m, src, tgt, make_targets(src, {"a"}), cfg);
  ASSERT_TRUE(rep.finite());
  EXPECT_LE(rep.epochs.back().reconstruction, 0.5 * rep.epochs.front().reconstruction);
}

TEST(Training, ConfigErrors) {
  const auto src = oracle::toy_dataset(2, 2, kLen);
  const auto targets = make_targets(src, {"a"});
  auto m = make(ModelKind::dann, 1);
  EXPECT_THROW(train_cnn(m, src, targets, quick(1, 8)), ConfigError);
  LabeledDataset empty;
  empty.trace_length = kLen;
  EXPECT_THROW(train_dann(m, src, empty, targets, quick(1, 2)), ConfigError);
  EXPECT_THROW(train_cnn(m, src, make_targets(src, {"a", "b"}), quick(1, 2)), ConfigError);
  auto bad = quick(1, 2);
  bad.lr0 = 0.0;
  EXPECT_THROW(train_cnn(m, src, targets, bad), ConfigError);
  auto c = make(ModelKind::cnn, 1);
  EXPECT_THROW(train_dann(c, src, src, targets, quick(1, 2)), ConfigError);
}

TEST(Training, ReportHasNoTiming) {
  TrainReport r;
  r.epochs.push_back({});
  for (const auto& h : report_table(r).header) EXPECT_EQ(h.find("second"), std::string::npos);
}
