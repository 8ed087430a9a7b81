#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zebra/curves.hpp"
#include "zebra/errors.hpp"
#include "zebra/objectives.hpp"

// Water-filling solver for the budget-constrained allocation
//
//   max  objective(x)   s.t.  sum_i x_i <= B,  0 <= x_i <= u_i,
//
// found by bisection on the dual price lambda: the total response
// S(lambda) = sum_i x_i(lambda) is non-increasing, so the lambda at which it
// crosses B brackets in O(n log 1/eps). Per-phase caps clamp the responses
// inside the bisection, which preserves the monotonicity of S.

namespace zebra {

/// A solved (or constructed) per-phase budget split.
struct Allocation {
  Eigen::ArrayXd amounts;                  ///< one budget amount per phase, >= 0
  std::optional<double> lambda_star;       ///< dual price; absent for non-dual strategies
  std::optional<double> objective_value;   ///< unset until evaluated against curves
  double budget_used = 0.0;                ///< sum of amounts
};

struct SolveConfig {
  double budget_B = 0.0;
  double tolerance = 0.0;  ///< budget-residual convergence; <= 0 means 1e-9 * budget_B
  int max_iterations = 200;
  std::optional<Eigen::ArrayXd> caps;  ///< optional per-phase upper bounds u_i

  double effective_tolerance() const {
    return tolerance > 0.0 ? tolerance : 1e-9 * budget_B;
  }
};

namespace detail {

inline void validate_solve_inputs(const CurveSet& curves, const Objective& objective,
                                  const SolveConfig& config) {
  if (curves.empty()) throw ValidationError("solve requires at least one phase");
  validate(objective, curves.size());
  if (!(config.budget_B > 0.0))
    throw ValidationError("budget_B must be > 0, got " + std::to_string(config.budget_B));
  if (config.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (config.caps) {
    if (config.caps->size() != curves.size())
      throw ValidationError("caps length " + std::to_string(config.caps->size()) +
                            " does not match phase count " + std::to_string(curves.size()));
    if (!(config.caps->minCoeff() > 0.0)) throw ValidationError("caps must all be > 0");
  }
}

/// Per-phase starvation thresholds (+inf entries possible under products).
inline Eigen::ArrayXd thresholds(const CurveSet& curves, const Objective& objective,
                                 const Eigen::ArrayXd& weights) {
  const Eigen::ArrayXd& a = curves.ceilings();
  const Eigen::ArrayXd& b = curves.rates();
  if (objective.kind == ObjectiveKind::additive) return a * b;
  Eigen::ArrayXd t(curves.size());
  for (Eigen::Index i = 0; i < curves.size(); ++i)
    t[i] = a[i] >= 1.0 ? std::numeric_limits<double>::infinity()
                       : a[i] * weights[i] * b[i] / (1.0 - a[i]);
  return t;
}

/// Responses of all phases at dual price lambda, cap-clamped. Phases at or
/// above their starvation threshold are zeroed exactly.
inline Eigen::ArrayXd responses(const CurveSet& curves, double lambda,
                                const Objective& objective, const Eigen::ArrayXd& weights,
                                const std::optional<Eigen::ArrayXd>& caps) {
  const Eigen::ArrayXd& a = curves.ceilings();
  const Eigen::ArrayXd& b = curves.rates();
  Eigen::ArrayXd x(curves.size());
  if (objective.kind == ObjectiveKind::additive) {
    x = (a * b / lambda).log() / b;
  } else {
    x = (a * (weights * b + lambda) / lambda).log() / b;
  }
  x = (thresholds(curves, objective, weights) > lambda).select(x.max(0.0), 0.0);
  if (caps) x = x.min(*caps);
  return x;
}

}  // namespace detail

/// S(lambda): total cap-clamped response across phases. Non-increasing in
/// lambda; 0 above every starvation threshold; diverges (or reaches the cap
/// sum) as lambda -> 0+.
inline double total_response(const CurveSet& curves, double lambda, const Objective& objective,
                             const std::optional<Eigen::ArrayXd>& caps = std::nullopt) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0, got " + std::to_string(lambda));
  const Eigen::ArrayXd w = effective_weights(objective, curves.size());
  return detail::responses(curves, lambda, objective, w, caps).sum();
}

/// Solves the allocation by dual bisection.
///
/// Bracketing: lambda_hi starts at the largest starvation threshold, which
/// guarantees S(lambda_hi) = 0 (phases with infinite thresholds use the
/// largest finite one scaled by 1e6, doubled further if needed); lambda_lo
/// is found by halving until S >= B, capped at 60 halvings. Convergence is
/// on the budget residual |S(lambda) - B| <= tolerance; any residual left
/// after bisection is settled on the phase with the best marginal so that
/// the amounts sum to B exactly.
///
/// When the caps sum to at most B the box constraints bind everywhere: every
/// phase sits at its cap and the budget constraint is slack (lambda = 0).
inline Allocation solve(const CurveSet& curves, const Objective& objective,
                        const SolveConfig& config) {
  detail::validate_solve_inputs(curves, objective, config);
  const Eigen::ArrayXd weights = effective_weights(objective, curves.size());
  const double budget = config.budget_B;
  const double tol = config.effective_tolerance();

  Allocation out;
  if (config.caps && config.caps->sum() <= budget) {
    out.amounts = *config.caps;
    out.lambda_star = 0.0;
    out.budget_used = out.amounts.sum();
    out.objective_value = evaluate(curves, out.amounts, objective);
    return out;
  }

  const auto total = [&](double lambda) {
    return detail::responses(curves, lambda, objective, weights, config.caps).sum();
  };

  // Upper bracket: S(lambda_hi) <= B, ideally 0.
  const Eigen::ArrayXd thr = detail::thresholds(curves, objective, weights);
  double lambda_hi = 0.0;
  double max_finite = 0.0;
  bool any_infinite = false;
  for (Eigen::Index i = 0; i < thr.size(); ++i) {
    if (std::isinf(thr[i]))
      any_infinite = true;
    else
      max_finite = std::max(max_finite, thr[i]);
  }
  if (max_finite > 0.0)
    lambda_hi = any_infinite ? max_finite * 1e6 : max_finite;
  else
    lambda_hi = 1.0;  // every phase has a = 1: no finite threshold exists
  for (int i = 0; i < 200 && total(lambda_hi) > budget; ++i) lambda_hi *= 2.0;

  // Lower bracket: halve until the responses overshoot the budget.
  double lambda_lo = lambda_hi;
  int halvings = 0;
  while (total(lambda_lo) < budget) {
    if (++halvings > 60)
      throw SolverError("failed to bracket lambda: S(lambda) < B after 60 halvings", lambda_lo,
                        lambda_hi);
    lambda_lo /= 2.0;
  }

  double lambda = lambda_lo;
  double residual = total(lambda) - budget;
  bool converged = std::abs(residual) <= tol;
  for (int iter = 0; iter < config.max_iterations && !converged; ++iter) {
    lambda = 0.5 * (lambda_lo + lambda_hi);
    const double s = total(lambda);
    residual = s - budget;
    if (std::abs(residual) <= tol) {
      converged = true;
      break;
    }
    if (s > budget)
      lambda_lo = lambda;
    else
      lambda_hi = lambda;
  }
  if (!converged)
    throw SolverError("bisection did not converge within " +
                          std::to_string(config.max_iterations) +
                          " iterations (budget residual " + std::to_string(residual) + ")",
                      lambda_lo, lambda_hi);

  Eigen::ArrayXd amounts = detail::responses(curves, lambda, objective, weights, config.caps);

  // Settle the leftover so the amounts sum to B to machine precision: give a
  // shortfall to the phase with the highest marginal (the one water-filling
  // would fund next), take an excess from the lowest-marginal funded phase.
  const auto marginal = [&](Eigen::Index i) {
    return objective_marginal(curves.curve(i), amounts[i], objective.kind, weights[i]);
  };
  double leftover = budget - amounts.sum();
  if (leftover > 0.0) {
    for (Eigen::Index pass = 0; pass < curves.size() && leftover > 0.0; ++pass) {
      Eigen::Index best = -1;
      double best_marginal = -1.0;
      for (Eigen::Index i = 0; i < curves.size(); ++i) {
        const double headroom = config.caps ? (*config.caps)[i] - amounts[i]
                                            : std::numeric_limits<double>::infinity();
        if (headroom <= 0.0) continue;
        const double m = marginal(i);
        if (m > best_marginal) {
          best_marginal = m;
          best = i;
        }
      }
      if (best < 0) break;  // everything capped
      const double headroom = config.caps ? (*config.caps)[best] - amounts[best]
                                          : std::numeric_limits<double>::infinity();
      const double add = std::min(leftover, headroom);
      amounts[best] += add;
      leftover -= add;
    }
  } else if (leftover < 0.0) {
    for (Eigen::Index pass = 0; pass < curves.size() && leftover < 0.0; ++pass) {
      Eigen::Index worst = -1;
      double worst_marginal = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < curves.size(); ++i) {
        if (amounts[i] <= 0.0) continue;
        const double m = marginal(i);
        if (m < worst_marginal) {
          worst_marginal = m;
          worst = i;
        }
      }
      if (worst < 0) break;
      const double take = std::min(-leftover, amounts[worst]);
      amounts[worst] -= take;
      leftover += take;
    }
  }

  out.amounts = std::move(amounts);
  out.lambda_star = lambda;
  out.budget_used = out.amounts.sum();
  out.objective_value = evaluate(curves, out.amounts, objective);
  return out;
}

/// Exhaustive simplex-grid search. Test oracle only: it lower-bounds the
/// true optimum, with a gap that shrinks as the resolution grows. Amounts
/// are multiples of B / (grid_points - 1) summing exactly to B; ties keep
/// the first composition in lexicographic order, so the result is
/// deterministic by construction.
inline Allocation grid_oracle(const CurveSet& curves, const Objective& objective,
                              const SolveConfig& config, int grid_points,
                              std::uint64_t max_nodes = 50'000'000) {
  detail::validate_solve_inputs(curves, objective, config);
  if (grid_points < 11) throw ValidationError("grid_points must be >= 11");
  const Eigen::ArrayXd weights = effective_weights(objective, curves.size());

  const int n = static_cast<int>(curves.size());
  const long long m = grid_points - 1;

  // C(m + n - 1, n - 1) nodes; guard before enumerating.
  double nodes = 1.0;
  for (int k = 1; k <= n - 1; ++k) nodes *= static_cast<double>(m + k) / k;
  if (nodes > static_cast<double>(max_nodes))
    throw ResourceError("grid search would visit ~" + std::to_string(nodes) +
                        " nodes; limit is " + std::to_string(max_nodes));

  const double h = config.budget_B / static_cast<double>(m);
  const Eigen::ArrayXd& a = curves.ceilings();
  const Eigen::ArrayXd& b = curves.rates();
  const bool additive = objective.kind == ObjectiveKind::additive;

  // Objective value at a node, computed with plain loops (log domain for
  // products). Kept separate from evaluate() on purpose: the oracle should
  // not share code with the path it is used to check.
  std::vector<long long> ticks(static_cast<std::size_t>(n), 0);
  std::vector<long long> best_ticks;
  double best_value = -std::numeric_limits<double>::infinity();

  const auto node_value = [&]() {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(ticks[static_cast<std::size_t>(i)]) * h;
      if (config.caps && x > (*config.caps)[i]) return std::optional<double>();
      const double decay = a[i] * std::exp(-b[i] * x);
      v += additive ? a[i] - decay : weights[i] * std::log1p(-decay);
    }
    return std::optional<double>(v);
  };

  // Enumerate weak compositions of m into n parts.
  const auto visit = [&](const auto& self, int index, long long remaining) -> void {
    if (index == n - 1) {
      ticks[static_cast<std::size_t>(index)] = remaining;
      if (const auto v = node_value(); v && *v > best_value) {
        best_value = *v;
        best_ticks = ticks;
      }
      return;
    }
    for (long long t = 0; t <= remaining; ++t) {
      ticks[static_cast<std::size_t>(index)] = t;
      self(self, index + 1, remaining - t);
    }
  };
  visit(visit, 0, m);

  if (best_ticks.empty())
    throw SolverError("grid search found no cap-feasible node", 0.0, 0.0);

  Allocation out;
  out.amounts.resize(n);
  for (int i = 0; i < n; ++i)
    out.amounts[i] = static_cast<double>(best_ticks[static_cast<std::size_t>(i)]) * h;
  out.budget_used = out.amounts.sum();
  out.objective_value = evaluate(curves, out.amounts, objective);
  return out;
}

/// Re-solves the allocation over the remaining phases with the leftover
/// budget B' = total_B - spent. With spent = total_B the remaining phases
/// get the all-zero allocation.
inline Allocation reallocate(const CurveSet& curves_remaining, const Objective& objective,
                             double spent, double total_B, SolveConfig config = {}) {
  if (curves_remaining.empty()) throw ValidationError("reallocate requires at least one phase");
  if (!(spent >= 0.0)) throw ValidationError("spent must be >= 0, got " + std::to_string(spent));
  if (spent > total_B)
    throw ValidationError("spent " + std::to_string(spent) + " exceeds total budget " +
                          std::to_string(total_B));
  const double remaining = total_B - spent;
  if (remaining <= 0.0) {
    Allocation out;
    out.amounts = Eigen::ArrayXd::Zero(curves_remaining.size());
    out.budget_used = 0.0;
    out.objective_value = evaluate(curves_remaining, out.amounts, objective);
    return out;
  }
  config.budget_B = remaining;
  return solve(curves_remaining, objective, config);
}

}  // namespace zebra
