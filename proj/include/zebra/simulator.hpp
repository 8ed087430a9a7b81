#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zebra/estimator.hpp"
#include "zebra/solver.hpp"
#include "zebra/strategies.hpp"

// Synthetic-pipeline experiment harness. A pipeline is a set of ground-truth
// phase curves plus the aggregation that defines true quality; strategies
// see noise-perturbed copies of the curves and are scored on the clean ones.
// Per-run random streams are derived from (seed, alpha index, strategy
// index, run index), so adding a strategy or alpha level never perturbs the
// streams of existing cells.

namespace zebra {

/// Ground truth for a simulated pipeline.
struct SyntheticPipeline {
  CurveSet truth;
  Objective aggregation;     ///< the true quality law over realized spend
  double reference_cost = 0.0;  ///< mean unconstrained cost, the budget baseline
};

struct ExperimentConfig {
  std::vector<double> alphas{0.3, 0.5, 0.8};
  int runs = 1;
  double noise_sigma = 0.0;  ///< applied to the curves strategies see
  std::vector<StrategySpec> strategies;
  std::uint64_t seed = 0;
  SolveConfig solve;  ///< tolerance / iteration settings; budget filled per run
  int jobs = 1;
};

/// One (strategy, alpha, seed) outcome.
struct RunRecord {
  double alpha = 0.0;
  std::string strategy;
  std::uint64_t seed = 0;
  double budget = 0.0;
  double budget_used = 0.0;
  double quality = 0.0;             ///< aggregation of ground truth at the amounts
  Eigen::ArrayXd amounts;
  Eigen::ArrayXd fractions;         ///< amounts / budget_used (zeros when unused)
  std::optional<double> lambda_star;
};

/// Aggregates over the runs of one (alpha, strategy) cell.
struct CellSummary {
  double alpha = 0.0;
  std::string strategy;
  int runs = 0;
  double mean_quality = 0.0;
  double retention_ratio_of_means = 0.0;  ///< mean quality / NB reference
  double retention_mean_of_ratios = 0.0;  ///< mean of per-run quality / NB reference
  Eigen::ArrayXd mean_fractions;
};

struct SweepReport {
  std::vector<std::string> phase_labels;
  double nb_reference = 0.0;
  std::vector<CellSummary> cells;
  std::vector<RunRecord> runs;
};

void validate(const SyntheticPipeline& pipeline);
void validate(const ExperimentConfig& config);

/// True quality of the optimal allocation at B = reference_cost under the
/// pipeline's own aggregation; the retention denominator.
double nb_reference(const SyntheticPipeline& pipeline);

/// Runs one strategy at budget alpha * reference_cost. The strategy sees
/// inject_noise(truth, {sigma, seed}); quality is scored on clean curves.
RunRecord simulate_run(const SyntheticPipeline& pipeline, const StrategySpec& strategy,
                       double alpha, double sigma, std::uint64_t seed,
                       const SolveConfig& solve_config = {});

/// Full (alpha x strategy x run) grid with derived seed streams.
/// Deterministic given config.seed; cells may execute on config.jobs threads.
SweepReport sweep(const SyntheticPipeline& pipeline, const ExperimentConfig& config);

/// How realized spend relates to allocated budget in the executed prefix.
struct SpendModel {
  double realized_fraction = 1.0;  ///< realized = fraction * allocated
};

/// Outcome of a mid-pipeline re-allocation run.
struct HybridRecord {
  RunRecord oneshot;              ///< the up-front allocation, scored end-to-end
  double spent = 0.0;             ///< realized spend over the executed prefix
  Eigen::ArrayXd final_amounts;   ///< realized prefix + re-solved remainder
  double quality = 0.0;           ///< ground-truth aggregation of final_amounts
};

/// Allocates up front, realizes spend for the first `split_after` phases via
/// the spend model, then re-solves the remaining phases on the leftover
/// budget B' = B - spent. With exact spend the re-solve reproduces the
/// one-shot split: restricting an optimal water-filling solution and
/// re-solving it is idempotent. `reestimate_remaining` replaces the
/// remaining phases' perceived curves with a freshly noised draw before the
/// re-solve, mimicking a mid-pipeline re-estimation.
HybridRecord hybrid_run(const SyntheticPipeline& pipeline, const StrategySpec& strategy,
                        double alpha, Eigen::Index split_after, const SpendModel& spend,
                        double sigma, std::uint64_t seed,
                        const SolveConfig& solve_config = {},
                        bool reestimate_remaining = false);

}  // namespace zebra
