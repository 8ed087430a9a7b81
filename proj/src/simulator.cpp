#include "zebra/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "zebra/errors.hpp"
#include "zebra/rng.hpp"

namespace zebra {

void validate(const SyntheticPipeline& pipeline) {
  if (pipeline.truth.empty()) throw ValidationError("pipeline requires at least one phase");
  if (!(pipeline.reference_cost > 0.0))
    throw ValidationError("reference_cost must be > 0, got " +
                          std::to_string(pipeline.reference_cost));
  validate(pipeline.aggregation, pipeline.truth.size());
}

void validate(const ExperimentConfig& config) {
  if (config.alphas.empty()) throw ValidationError("config.alphas must be non-empty");
  for (double alpha : config.alphas)
    if (!(alpha > 0.0) || alpha > 1.0)
      throw ValidationError("alpha must be in (0, 1], got " + std::to_string(alpha));
  if (config.runs < 1) throw ValidationError("config.runs must be >= 1");
  if (!(config.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  if (config.strategies.empty()) throw ValidationError("config.strategies must be non-empty");
  if (config.jobs < 1) throw ValidationError("config.jobs must be >= 1");
}

double nb_reference(const SyntheticPipeline& pipeline) {
  validate(pipeline);
  SolveConfig config;
  config.budget_B = pipeline.reference_cost;
  return *solve(pipeline.truth, pipeline.aggregation, config).objective_value;
}

RunRecord simulate_run(const SyntheticPipeline& pipeline, const StrategySpec& strategy,
                       double alpha, double sigma, std::uint64_t seed,
                       const SolveConfig& solve_config) {
  validate(pipeline);
  const double budget = budget_from_alpha(alpha, pipeline.reference_cost);
  const CurveSet perceived = inject_noise(pipeline.truth, NoiseSpec{sigma, seed});

  // The strategy allocates against what it perceives; the evaluation
  // objective passed here scores against the same perceived curves, so the
  // record's quality below is recomputed on ground truth.
  const Objective perceived_eval =
      pipeline.aggregation.kind == ObjectiveKind::prop_offset
          ? Objective::prop_offset_from(perceived)
          : pipeline.aggregation;
  const Allocation alloc = allocate(strategy, perceived, budget, solve_config, perceived_eval);

  RunRecord record;
  record.alpha = alpha;
  record.strategy = std::string(to_string(strategy.kind));
  record.seed = seed;
  record.budget = budget;
  record.budget_used = alloc.budget_used;
  record.amounts = alloc.amounts;
  record.lambda_star = alloc.lambda_star;
  record.quality = evaluate(pipeline.truth, alloc.amounts, pipeline.aggregation);
  record.fractions = alloc.budget_used > 0.0
                         ? (alloc.amounts / alloc.budget_used).eval()
                         : Eigen::ArrayXd::Zero(alloc.amounts.size()).eval();
  return record;
}

SweepReport sweep(const SyntheticPipeline& pipeline, const ExperimentConfig& config) {
  validate(pipeline);
  validate(config);

  SweepReport report;
  report.phase_labels = pipeline.truth.labels();
  report.nb_reference = nb_reference(pipeline);

  const std::size_t n_alphas = config.alphas.size();
  const std::size_t n_strategies = config.strategies.size();
  const std::size_t n_runs = static_cast<std::size_t>(config.runs);
  const std::size_t total = n_alphas * n_strategies * n_runs;
  report.runs.resize(total);

  const auto run_index = [&](std::size_t ai, std::size_t si, std::size_t ri) {
    return (ai * n_strategies + si) * n_runs + ri;
  };

  const auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t flat = worker; flat < total; flat += stride) {
      const std::size_t ri = flat % n_runs;
      const std::size_t si = (flat / n_runs) % n_strategies;
      const std::size_t ai = flat / (n_runs * n_strategies);
      const std::uint64_t seed = rng::derive_stream(config.seed, {ai, si, ri});
      report.runs[run_index(ai, si, ri)] = simulate_run(
          pipeline, config.strategies[si], config.alphas[ai], config.noise_sigma, seed,
          config.solve);
    }
  };

  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), total);
  if (jobs <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
    for (auto& t : pool) t.join();
  }

  // Deterministic reduction in (alpha, strategy) order.
  for (std::size_t ai = 0; ai < n_alphas; ++ai) {
    for (std::size_t si = 0; si < n_strategies; ++si) {
      CellSummary cell;
      cell.alpha = config.alphas[ai];
      cell.strategy = std::string(to_string(config.strategies[si].kind));
      cell.runs = config.runs;
      cell.mean_fractions = Eigen::ArrayXd::Zero(pipeline.truth.size());
      double quality_sum = 0.0;
      double ratio_sum = 0.0;
      for (std::size_t ri = 0; ri < n_runs; ++ri) {
        const RunRecord& r = report.runs[run_index(ai, si, ri)];
        quality_sum += r.quality;
        ratio_sum += r.quality / report.nb_reference;
        cell.mean_fractions += r.fractions;
      }
      cell.mean_quality = quality_sum / static_cast<double>(n_runs);
      cell.retention_ratio_of_means = cell.mean_quality / report.nb_reference;
      cell.retention_mean_of_ratios = ratio_sum / static_cast<double>(n_runs);
      cell.mean_fractions /= static_cast<double>(n_runs);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

HybridRecord hybrid_run(const SyntheticPipeline& pipeline, const StrategySpec& strategy,
                        double alpha, Eigen::Index split_after, const SpendModel& spend,
                        double sigma, std::uint64_t seed, const SolveConfig& solve_config,
                        bool reestimate_remaining) {
  validate(pipeline);
  const Eigen::Index n = pipeline.truth.size();
  if (split_after <= 0 || split_after >= n)
    throw ValidationError("split_after must be in (0, phase count), got " +
                          std::to_string(split_after));
  if (!(spend.realized_fraction >= 0.0) || spend.realized_fraction > 1.0)
    throw ValidationError("realized_fraction must be in [0, 1]");

  HybridRecord record;
  record.oneshot = simulate_run(pipeline, strategy, alpha, sigma, seed, solve_config);

  const Eigen::ArrayXd realized_prefix =
      record.oneshot.amounts.head(split_after) * spend.realized_fraction;
  record.spent = realized_prefix.sum();

  // The remaining phases keep the curves the strategy perceived up front
  // unless a mid-pipeline re-estimate is requested, in which case they are
  // re-drawn around ground truth on an independent stream.
  const CurveSet perceived = inject_noise(pipeline.truth, NoiseSpec{sigma, seed});
  const CurveSet remaining =
      reestimate_remaining
          ? inject_noise(pipeline.truth.tail(split_after),
                         NoiseSpec{sigma, rng::derive_stream(seed, {0x5eed})})
          : perceived.tail(split_after);
  const Objective objective = strategy.kind == StrategyKind::uniform ||
                                      strategy.kind == StrategyKind::fixed_ratio ||
                                      strategy.kind == StrategyKind::external
                                  ? (pipeline.aggregation.kind == ObjectiveKind::prop_offset
                                         ? Objective::prop_offset_from(remaining)
                                         : pipeline.aggregation)
                                  : strategy_objective(strategy.kind, remaining);

  const Allocation realloc =
      reallocate(remaining, objective, std::min(record.spent, record.oneshot.budget),
                 record.oneshot.budget, solve_config);

  record.final_amounts.resize(n);
  record.final_amounts.head(split_after) = realized_prefix;
  record.final_amounts.tail(n - split_after) = realloc.amounts;
  record.quality = evaluate(pipeline.truth, record.final_amounts, pipeline.aggregation);
  return record;
}

}  // namespace zebra
