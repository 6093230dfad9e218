#pragma once

// Training loops: supervised regression, adversarial domain adaptation and
// the reconstruction-regularized variants, plus batched prediction.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "gprda/dataset.hpp"
#include "gprda/error.hpp"
#include "gprda/fdtd.hpp"
#include "gprda/io.hpp"
#include "gprda/models.hpp"
#include "gprda/nn/ops.hpp"
#include "gprda/nn/optim.hpp"
#include "gprda/signal.hpp"

namespace gprda {

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double lr0 = 1e-3;
  double lr_decay = 0.9;
  std::uint64_t seed = 0;
  nn::OptimizerConfig optimizer;
  double leaky_slope = 0.01;
  double reconstruction_weight = 1.0;
  std::optional<double> fixed_lambda;  // overrides the schedule when set
  bool adversarial = true;             // false: extractor + estimator only, no target batches

  void validate() const {
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(lr0 > 0.0)) throw ConfigError("train: lr0 must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("train: lr_decay must be in (0, 1]");
    if (!(reconstruction_weight >= 0.0)) throw ConfigError("train: reconstruction_weight must be >= 0");
    if (fixed_lambda && !(*fixed_lambda >= 0.0)) throw ConfigError("train: fixed lambda must be >= 0");
  }
};

inline io::Json to_json(const TrainConfig& c) {
  io::Json j{{"epochs", c.epochs},
             {"batch_size", c.batch_size},
             {"lr0", c.lr0},
             {"lr_decay", c.lr_decay},
             {"seed", c.seed},
             {"optimizer", nn::to_string(c.optimizer.kind)},
             {"leaky_slope", c.leaky_slope},
             {"reconstruction_weight", c.reconstruction_weight},
             {"adversarial", c.adversarial}};
  if (c.fixed_lambda) j["fixed_lambda"] = *c.fixed_lambda;
  return j;
}

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double regression = 0.0;
  double adversarial = 0.0;
  double reconstruction = 0.0;
  double lambda_first = 0.0;
  double lambda_last = 0.0;
  double discriminator_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::vector<double> lambda_trace;  // one value per iteration
  std::size_t iterations = 0;
  double wall_seconds = 0.0;

  bool finite() const {
    for (const auto& e : epochs) {
      if (!std::isfinite(e.regression) || !std::isfinite(e.adversarial) || !std::isfinite(e.reconstruction)) {
        return false;
      }
    }
    return true;
  }
};

/// Per-epoch losses as CSV. Wall time is left out so reruns compare equal.
inline io::CsvTable report_table(const TrainReport& r) {
  io::CsvTable t;
  t.header = {"epoch", "lr", "regression_loss", "adversarial_loss", "reconstruction_loss", "lambda_first",
              "lambda_last", "discriminator_accuracy"};
  for (const auto& e : r.epochs) {
    t.rows.push_back({std::to_string(e.epoch), io::format_double(e.lr), io::format_double(e.regression),
                      io::format_double(e.adversarial), io::format_double(e.reconstruction),
                      io::format_double(e.lambda_first), io::format_double(e.lambda_last),
                      io::format_double(e.discriminator_accuracy)});
  }
  return t;
}

/// Which dataset columns a model regresses, and how they are scaled.
struct Targets {
  std::vector<std::string> parameters;
  LabelScaler scaler;
};

/// Targets over `names` with ranges from the dataset's generating grid.
inline Targets make_targets(const LabeledDataset& ds, const std::vector<std::string>& names) {
  std::vector<ValueRange> ranges;
  for (const auto& n : names) {
    const auto& r = ds.grid.at(n);
    ranges.push_back({r.min, r.max});
  }
  return {names, LabelScaler(std::move(ranges))};
}

namespace detail {

/// Fisher-Yates with an explicit draw so the order is library independent.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(nn::uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

inline nn::Tensor gather_traces(const LabeledDataset& ds, std::span<const std::size_t> rows) {
  std::vector<double> x;
  x.reserve(rows.size() * ds.trace_length);
  for (auto r : rows) {
    auto t = ds.trace(r);
    x.insert(x.end(), t.begin(), t.end());
  }
  return nn::Tensor::from({rows.size(), 1, ds.trace_length}, std::move(x));
}

inline nn::Tensor gather_labels(const LabeledDataset& ds, std::span<const std::size_t> rows,
                                const std::vector<std::size_t>& columns, const LabelScaler& scaler) {
  std::vector<double> y;
  y.reserve(rows.size() * columns.size());
  for (auto r : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) y.push_back(scaler.apply(c, ds.label(r, columns[c])));
  }
  return nn::Tensor::from({rows.size(), columns.size()}, std::move(y));
}

inline std::size_t correct_domain(const nn::Tensor& logits, nn::Domain d) {
  std::size_t ok = 0;
  const auto v = logits.values();
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    const std::size_t pred = v[2 * b + 1] > v[2 * b] ? 1 : 0;
    ok += pred == static_cast<std::size_t>(d);
  }
  return ok;
}

}  // namespace detail

/// Trains `model` in place. Supervised when the model has no discriminator or
/// cfg.adversarial is false; otherwise adversarial against `target` (which
/// must then be non-empty), with reconstruction on both domains for the
/// reconstructing variants.
inline TrainReport train_model(Model& model, const LabeledDataset& source, const LabeledDataset* target,
                               const Targets& targets, const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  if (!source.labeled()) throw ConfigError("train: source dataset has no labels");
  if (targets.parameters.size() != model.outputs) {
    throw ConfigError("train: model has " + std::to_string(model.outputs) + " outputs but " +
                      std::to_string(targets.parameters.size()) + " target parameters were given");
  }
  if (source.trace_length != model.input_length) {
    throw ShapeError("train: trace length " + std::to_string(source.trace_length) + " does not match model input " +
                     std::to_string(model.input_length));
  }
  const bool adversarial = cfg.adversarial && model.has_discriminator();
  const bool reconstructing = adversarial && model.has_reconstructor();
  if (adversarial) {
    if (target == nullptr || target->size() == 0) throw ConfigError("train: empty target set");
    if (target->trace_length != source.trace_length) throw ShapeError("train: source and target trace lengths differ");
  }
  const std::size_t B = cfg.batch_size;
  const std::size_t ns = source.size();
  if (ns < B) {
    throw ConfigError("train: source set has " + std::to_string(ns) + " traces, fewer than one batch of " +
                      std::to_string(B));
  }
  std::vector<std::size_t> columns;
  for (const auto& p : targets.parameters) columns.push_back(source.parameter_index(p));

  const std::size_t per_epoch = ns / B;
  const std::size_t total = cfg.epochs * per_epoch;
  TrainReport report;
  report.iterations = total;
  std::mt19937_64 src_rng(fdtd::derive_seed(cfg.seed, 1));
  std::mt19937_64 tgt_rng(fdtd::derive_seed(cfg.seed, 2));
  std::vector<std::size_t> src_order(ns);
  std::iota(src_order.begin(), src_order.end(), std::size_t{0});
  const std::size_t nt = adversarial ? target->size() : 0;
  const bool with_replacement = adversarial && nt < ns;
  std::vector<std::size_t> tgt_order(nt);
  std::iota(tgt_order.begin(), tgt_order.end(), std::size_t{0});
  std::size_t tgt_pos = nt;

  nn::Optimizer opt(cfg.optimizer);
  std::size_t it = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::lr_schedule(cfg.lr0, cfg.lr_decay, epoch);
    detail::shuffle(src_order, src_rng);
    EpochStats st;
    st.epoch = epoch + 1;
    st.lr = lr;
    std::size_t disc_ok = 0, disc_n = 0;
    for (std::size_t k = 0; k < per_epoch; ++k, ++it) {
      const std::span<const std::size_t> rows(src_order.data() + k * B, B);
      const auto xs = detail::gather_traces(source, rows);
      const auto ys = detail::gather_labels(source, rows, columns, targets.scaler);
      model.store.zero_grad();
      const auto fs = model.features(xs);
      const auto est_s = model.estimate(fs);
      auto loss = nn::mse_loss(est_s, ys);
      st.regression += loss.item();
      double lambda = 0.0;
      if (adversarial) {
        lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : nn::lambda_schedule(it, std::max<std::size_t>(1, total - 1));
        if (k == 0) st.lambda_first = lambda;
        st.lambda_last = lambda;
        report.lambda_trace.push_back(lambda);
        std::vector<std::size_t> trows(B);
        for (std::size_t b = 0; b < B; ++b) {
          if (with_replacement) {
            trows[b] = std::min(static_cast<std::size_t>(nn::uniform01(tgt_rng) * static_cast<double>(nt)), nt - 1);
          } else {
            if (tgt_pos == nt) {
              detail::shuffle(tgt_order, tgt_rng);
              tgt_pos = 0;
            }
            trows[b] = tgt_order[tgt_pos++];
          }
        }
        const auto xt = detail::gather_traces(*target, trows);
        const auto ft = model.features(xt);
        const auto ls = model.domain_logits(fs, lambda);
        const auto lt = model.domain_logits(ft, lambda);
        disc_ok += detail::correct_domain(ls, nn::Domain::source) + detail::correct_domain(lt, nn::Domain::target);
        disc_n += 2 * B;
        const auto adv = nn::add(nn::domain_loss(ls, nn::Domain::source), nn::domain_loss(lt, nn::Domain::target));
        st.adversarial += adv.item();
        loss = nn::add(loss, adv);
        if (reconstructing) {
          nn::Tensor est_t;
          {
            nn::NoGradGuard guard;
            est_t = model.estimate(ft);
          }
          const auto rs = model.reconstruct(fs, est_s.detach());
          const auto rt = model.reconstruct(ft, est_t);
          const auto rec = nn::scale(nn::add(nn::mse_loss(rs, xs), nn::mse_loss(rt, xt)), 0.5);
          st.reconstruction += rec.item();
          if (cfg.reconstruction_weight != 0.0) loss = nn::add(loss, nn::scale(rec, cfg.reconstruction_weight));
        }
      }
      loss.backward();
      // The discriminator descends on lambda times its loss gradient.
      if (adversarial) model.store.scale_group_grads("discriminator", lambda);
      opt.step(model.store, lr);
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, per_epoch));
    st.regression /= n;
    st.adversarial /= n;
    st.reconstruction /= n;
    st.discriminator_accuracy = disc_n ? static_cast<double>(disc_ok) / static_cast<double>(disc_n) : 0.0;
    spdlog::debug("epoch {:>3} lr {:.3g} reg {:.5f} adv {:.5f} rec {:.5f} lambda {:.4f} acc {:.3f}", st.epoch, lr,
                  st.regression, st.adversarial, st.reconstruction, st.lambda_last, st.discriminator_accuracy);
    report.epochs.push_back(st);
  }
  model.store.zero_grad();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline TrainReport train_cnn(Model& model, const LabeledDataset& source, const Targets& targets, TrainConfig cfg) {
  cfg.adversarial = false;
  return train_model(model, source, nullptr, targets, cfg);
}

inline TrainReport train_dann(Model& model, const LabeledDataset& source, const LabeledDataset& target,
                              const Targets& targets, const TrainConfig& cfg) {
  if (model.kind != ModelKind::dann) throw ConfigError("train_dann needs a dann model");
  return train_model(model, source, &target, targets, cfg);
}

inline TrainReport train_phydann(Model& model, const LabeledDataset& source, const LabeledDataset& target,
                                 const Targets& targets, const TrainConfig& cfg) {
  if (!model.has_reconstructor()) throw ConfigError("train_phydann needs a reconstructing model");
  return train_model(model, source, &target, targets, cfg);
}

/// Estimates for every row in physical units, [rows x outputs].
inline std::vector<double> predict(const Model& model, const LabeledDataset& ds, const LabelScaler& scaler,
                                   std::size_t batch = 64) {
  nn::NoGradGuard guard;
  std::vector<double> out;
  out.reserve(ds.size() * model.outputs);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < ds.size(); start += batch) {
    rows.clear();
    for (std::size_t r = start; r < std::min(ds.size(), start + batch); ++r) rows.push_back(r);
    const auto y = model.estimate(model.features(detail::gather_traces(ds, rows)));
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back(scaler.invert(i % model.outputs, y.values()[i]));
  }
  return out;
}

}  // namespace gprda
