#pragma once

// Sequential single-parameter estimation: train one model per parameter in
// sensitivity order, snap each case's estimate to the source grid and prune
// the source set before the next parameter.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "gprda/dataset.hpp"
#include "gprda/error.hpp"
#include "gprda/io.hpp"
#include "gprda/metrics.hpp"
#include "gprda/models.hpp"
#include "gprda/parallel.hpp"
#include "gprda/params.hpp"
#include "gprda/train.hpp"

namespace gprda {

inline double clamp_conductivity(double estimate) { return estimate < 0.0 ? 0.0 : estimate; }

/// Nearest grid value; an estimate exactly halfway goes to the lower value.
inline std::size_t snap_index(const std::vector<double>& grid, double estimate) {
  if (grid.empty()) throw PruningError("snap: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - estimate) < std::abs(grid[best] - estimate)) best = i;
  }
  return best;
}

inline std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + io::format_double(v[i]);
  return s;
}

/// Rows whose `param` label lies within `tolerance_steps` grid steps of the
/// grid value nearest to `estimate`. The grid entry for `param` is narrowed to
/// the retained window.
inline LabeledDataset prune_dataset(const LabeledDataset& ds, const std::string& param, double estimate,
                                    std::size_t tolerance_steps = 0) {
  const std::size_t gi = ds.grid.index_of(param);
  const auto& range = ds.grid.params[gi];
  if (!range.discrete()) throw PruningError("prune: parameter '" + param + "' has no grid step");
  const auto grid = range.grid_values();
  const std::size_t k = snap_index(grid, estimate);
  const std::size_t lo = k >= tolerance_steps ? k - tolerance_steps : 0;
  const std::size_t hi = std::min(grid.size() - 1, k + tolerance_steps);
  const double step = *range.step;
  const double eps = 1e-9 * step;
  const std::size_t col = ds.parameter_index(param);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const double y = ds.label(r, col);
    if (y >= grid[lo] - eps && y <= grid[hi] + eps) keep.push_back(r);
  }
  if (keep.empty()) {
    throw PruningError("prune: no rows left for " + param + " = " + io::format_double(grid[k]) +
                       " (estimate " + io::format_double(estimate) + "); grid values: " + join_values(grid));
  }
  auto out = ds.select(keep);
  out.grid.params[gi].min = grid[lo];
  out.grid.params[gi].max = grid[hi];
  return out;
}

struct HierPlan {
  std::vector<std::string> order;
  ModelKind variant = ModelKind::dann;
  std::size_t tolerance_steps = 0;

  void validate(const LabeledDataset& source) const {
    if (order.empty()) throw ConfigError("hierarchy: empty parameter order");
    if (variant == ModelKind::cnn) throw ConfigError("hierarchy: stage models must be adversarial");
    for (std::size_t i = 0; i < order.size(); ++i) {
      source.parameter_index(order[i]);
      if (std::find(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i), order[i]) !=
          order.begin() + static_cast<std::ptrdiff_t>(i)) {
        throw ConfigError("hierarchy: parameter '" + order[i] + "' appears twice in the order");
      }
    }
  }
};

struct StageResult {
  std::string parameter;
  std::vector<double> per_scan;  // physical units, before clamping
  double aggregate = 0.0;        // mean over scans, after clamping
  double scan_std = 0.0;
  bool clamped = false;
  double snapped = 0.0;
  std::vector<double> retained_values;  // grid values kept for the next stage
  std::size_t input_size = 0;
  std::size_t pruned_size = 0;
  std::size_t iterations = 0;
  double final_regression_loss = 0.0;
};

struct CaseTrail {
  std::string case_id;
  std::vector<StageResult> stages;
};

struct HierOptions {
  std::size_t workers = 1;
  ArchitectureOptions arch;
};

/// Runs the plan for every case of `target`. Stage k trains on the case's
/// current source subset plus every target scan, with seed cfg.seed + k.
/// Cases whose subsets coincide at a stage share the trained model.
inline std::vector<CaseTrail> run_hierarchy(const HierPlan& plan, const LabeledDataset& source,
                                            const LabeledDataset& target, const TrainConfig& cfg,
                                            const HierOptions& opt = {}) {
  plan.validate(source);
  if (target.size() == 0) throw ConfigError("hierarchy: empty target set");
  if (target.case_ids.size() != target.size()) throw ConfigError("hierarchy: target scans need case ids");
  const auto cases = target.cases();
  std::vector<CaseTrail> trails;
  std::vector<LabeledDataset> subsets;
  for (const auto& c : cases) {
    trails.push_back({c, {}});
    subsets.push_back(source);
  }

  for (std::size_t k = 0; k < plan.order.size(); ++k) {
    const auto& param = plan.order[k];
    const Targets targets = make_targets(source, {param});
    // Distinct source subsets at this stage.
    std::vector<std::vector<std::size_t>> keys;
    std::vector<std::size_t> model_of(cases.size());
    for (std::size_t c = 0; c < cases.size(); ++c) {
      auto it = std::find(keys.begin(), keys.end(), subsets[c].row_ids);
      model_of[c] = static_cast<std::size_t>(it - keys.begin());
      if (it == keys.end()) keys.push_back(subsets[c].row_ids);
    }
    std::vector<std::size_t> owner(keys.size());
    for (std::size_t c = cases.size(); c-- > 0;) owner[model_of[c]] = c;
    std::vector<std::unique_ptr<Model>> models(keys.size());
    std::vector<TrainReport> reports(keys.size());
    parallel_for(keys.size(), opt.workers, [&](std::size_t m) {
      const auto& subset = subsets[owner[m]];
      auto stage_cfg = cfg;
      stage_cfg.seed = cfg.seed + k;
      stage_cfg.batch_size = std::min(cfg.batch_size, subset.size());
      auto arch = opt.arch;
      arch.seed = stage_cfg.seed;
      models[m] = std::make_unique<Model>(build_model(plan.variant, subset.trace_length, 1, arch));
      reports[m] = train_model(*models[m], subset, &target, targets, stage_cfg);
    });
    spdlog::info("stage {} ({}): trained {} model(s)", k + 1, param, keys.size());

    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto scans = target.select(target.rows_of_case(cases[c]));
      StageResult st;
      st.parameter = param;
      st.per_scan = predict(*models[model_of[c]], scans, targets.scaler);
      const auto agg = aggregate(st.per_scan);
      st.aggregate = agg.mean;
      st.scan_std = agg.std;
      if (is_conductivity(param) && st.aggregate < 0.0) {
        st.aggregate = clamp_conductivity(st.aggregate);
        st.clamped = true;
      }
      st.input_size = subsets[c].size();
      const auto& rep = reports[model_of[c]];
      st.iterations = rep.iterations;
      st.final_regression_loss = rep.epochs.empty() ? 0.0 : rep.epochs.back().regression;
      const auto grid = subsets[c].grid.at(param).grid_values();
      st.snapped = grid[snap_index(grid, st.aggregate)];
      if (k + 1 < plan.order.size()) {
        try {
          subsets[c] = prune_dataset(subsets[c], param, st.aggregate, plan.tolerance_steps);
        } catch (const PruningError& e) {
          throw PruningError("case " + cases[c] + ", stage " + std::to_string(k + 1) + " (" + param +
                             "): " + e.what());
        }
      }
      st.retained_values = subsets[c].grid.at(param).grid_values();
      st.pruned_size = subsets[c].size();
      trails[c].stages.push_back(std::move(st));
    }
  }
  return trails;
}

inline io::Json to_json(const std::vector<CaseTrail>& trails, const HierPlan& plan) {
  io::Json cases = io::Json::array();
  for (const auto& t : trails) {
    io::Json stages = io::Json::array();
    for (const auto& s : t.stages) {
      stages.push_back({{"parameter", s.parameter},
                        {"input_size", s.input_size},
                        {"pruned_size", s.pruned_size},
                        {"aggregate", s.aggregate},
                        {"scan_std", s.scan_std},
                        {"clamped", s.clamped},
                        {"snapped", s.snapped},
                        {"retained_values", s.retained_values},
                        {"iterations", s.iterations},
                        {"final_regression_loss", s.final_regression_loss},
                        {"per_scan", s.per_scan}});
    }
    cases.push_back({{"case", t.case_id}, {"stages", stages}});
  }
  return {{"variant", to_string(plan.variant)},
          {"order", plan.order},
          {"tolerance_steps", plan.tolerance_steps},
          {"cases", cases}};
}

}  // namespace gprda
