#include "zebra/strategies.hpp"

#include <cmath>

#include "zebra/errors.hpp"

namespace zebra {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::zebra_additive: return "zebra-additive";
    case StrategyKind::zebra_mult_offset: return "zebra-mult-offset";
    case StrategyKind::zebra_prop_offset: return "zebra-prop-offset";
    case StrategyKind::uniform: return "uniform";
    case StrategyKind::fixed_ratio: return "fixed-ratio";
    case StrategyKind::external: return "external";
  }
  return "?";
}

StrategyKind strategy_from_string(std::string_view name) {
  if (name == "zebra-additive") return StrategyKind::zebra_additive;
  if (name == "zebra-mult-offset") return StrategyKind::zebra_mult_offset;
  if (name == "zebra-prop-offset") return StrategyKind::zebra_prop_offset;
  if (name == "uniform") return StrategyKind::uniform;
  if (name == "fixed-ratio") return StrategyKind::fixed_ratio;
  if (name == "external") return StrategyKind::external;
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

Objective strategy_objective(StrategyKind kind, const CurveSet& curves) {
  switch (kind) {
    case StrategyKind::zebra_additive: return Objective::additive();
    case StrategyKind::zebra_mult_offset: return Objective::mult_offset();
    case StrategyKind::zebra_prop_offset: return Objective::prop_offset_from(curves);
    default:
      throw ValidationError("strategy '" + std::string(to_string(kind)) +
                            "' has no solver objective");
  }
}

namespace {

bool is_zebra(StrategyKind kind) {
  return kind == StrategyKind::zebra_additive || kind == StrategyKind::zebra_mult_offset ||
         kind == StrategyKind::zebra_prop_offset;
}

}  // namespace

Allocation allocate(const StrategySpec& spec, const CurveSet& curves, double budget_B,
                    const SolveConfig& solve_config, const Objective& eval_objective) {
  if (curves.empty()) throw ValidationError("allocate requires at least one phase curve");
  if (!(budget_B > 0.0))
    throw ValidationError("budget_B must be > 0, got " + std::to_string(budget_B));
  const Eigen::Index n = curves.size();

  Allocation out;
  if (is_zebra(spec.kind)) {
    SolveConfig config = solve_config;
    config.budget_B = budget_B;
    out = solve(curves, strategy_objective(spec.kind, curves), config);
  } else if (spec.kind == StrategyKind::uniform) {
    out.amounts = Eigen::ArrayXd::Constant(n, budget_B / static_cast<double>(n));
    out.budget_used = out.amounts.sum();
  } else if (spec.kind == StrategyKind::fixed_ratio) {
    if (!spec.ratio) throw ValidationError("fixed-ratio strategy requires a ratio vector");
    if (spec.ratio->size() != n)
      throw ValidationError("ratio length " + std::to_string(spec.ratio->size()) +
                            " does not match phase count " + std::to_string(n));
    if (spec.ratio->minCoeff() < 0.0) throw ValidationError("ratio fractions must be >= 0");
    if (std::abs(spec.ratio->sum() - 1.0) > 1e-9)
      throw ValidationError("ratio fractions must sum to 1, got " +
                            std::to_string(spec.ratio->sum()));
    out.amounts = *spec.ratio * budget_B;
    out.budget_used = out.amounts.sum();
  } else {  // external
    if (!spec.external_doc) throw ValidationError("external strategy requires an allocation document");
    out = external_to_allocation(*spec.external_doc, curves.labels(), budget_B);
  }

  out.objective_value = evaluate(curves, out.amounts, eval_objective);
  return out;
}

double budget_from_alpha(double alpha, double reference_cost) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ValidationError("alpha must be in (0, 1], got " + std::to_string(alpha));
  if (!(reference_cost > 0.0))
    throw ValidationError("reference_cost must be > 0, got " + std::to_string(reference_cost));
  return alpha * reference_cost;
}

}  // namespace zebra
