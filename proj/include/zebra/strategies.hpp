#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "zebra/estimator.hpp"
#include "zebra/solver.hpp"

// Uniform interface over the allocation policies: the three solver-backed
// objectives, a uniform split, a fixed per-phase ratio, and an externally
// supplied allocation. Every policy returns an Allocation whose
// objective_value is filled under a caller-chosen evaluation objective, so
// allocations optimized under one aggregate can be scored under another.

namespace zebra {

enum class StrategyKind {
  zebra_additive,
  zebra_mult_offset,
  zebra_prop_offset,
  uniform,
  fixed_ratio,
  external,
};

/// Stable string identifiers used by the CLI and config files.
std::string_view to_string(StrategyKind kind);

/// Parses a strategy identifier; unknown names fail fast.
StrategyKind strategy_from_string(std::string_view name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::zebra_additive;
  std::optional<Eigen::ArrayXd> ratio;                    ///< fixed_ratio only
  std::optional<ExternalAllocationDocument> external_doc;     ///< external only

  static StrategySpec zebra_additive() { return {StrategyKind::zebra_additive, {}, {}}; }
  static StrategySpec zebra_mult_offset() { return {StrategyKind::zebra_mult_offset, {}, {}}; }
  static StrategySpec zebra_prop_offset() { return {StrategyKind::zebra_prop_offset, {}, {}}; }
  static StrategySpec uniform() { return {StrategyKind::uniform, {}, {}}; }
  static StrategySpec fixed_ratio(Eigen::ArrayXd fractions) {
    return {StrategyKind::fixed_ratio, std::move(fractions), {}};
  }
  static StrategySpec external(ExternalAllocationDocument doc) {
    return {StrategyKind::external, {}, std::move(doc)};
  }
};

/// Even four-phase split.
inline constexpr std::array<double, 4> kEvenQuartersRatio{0.25, 0.25, 0.25, 0.25};
/// Refine-heavy four-phase preset (plan / decompose / implement / refine).
inline constexpr std::array<double, 4> kRefineHeavyRatio{0.113, 0.140, 0.241, 0.506};

/// The objective a solver-backed strategy optimizes; prop-offset weights are
/// the supplied curves' ceilings.
Objective strategy_objective(StrategyKind kind, const CurveSet& curves);

/// Produces an allocation of budget_B for the given strategy. Solver-backed
/// kinds run the dual search against `curves`; uniform and fixed-ratio
/// split by count or fraction; external rescales the supplied document.
/// The returned objective_value is evaluate(curves, amounts, eval_objective).
Allocation allocate(const StrategySpec& spec, const CurveSet& curves, double budget_B,
                    const SolveConfig& solve_config, const Objective& eval_objective);

/// B = alpha * reference_cost, the budget as a fraction of the mean
/// unconstrained cost. alpha must lie in (0, 1].
double budget_from_alpha(double alpha, double reference_cost);

}  // namespace zebra
