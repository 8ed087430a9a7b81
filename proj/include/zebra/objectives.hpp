#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "zebra/curves.hpp"
#include "zebra/errors.hpp"

// Pipeline-level aggregation objectives and their closed-form per-phase
// budget responses as functions of the dual price lambda.
//
//   additive      max  sum_i f_i(x_i)
//   mult_offset   max  prod_i g_i(x_i)
//   prop_offset   max  prod_i g_i(x_i)^{w_i}     (w_i > 0 per phase)
//
// The product objectives are handled in the log domain: prod g^w shares its
// maximizer with sum w log g, so one dual search covers all three. Each
// objective has a closed-form response x_i(lambda) and a starvation
// threshold below which lambda must fall for phase i to receive any budget.

namespace zebra {

enum class ObjectiveKind { additive, mult_offset, prop_offset };

inline const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::additive: return "additive";
    case ObjectiveKind::mult_offset: return "mult-offset";
    case ObjectiveKind::prop_offset: return "prop-offset";
  }
  return "?";
}

/// Aggregation objective. Weights are required for prop_offset (one per
/// phase, all positive) and must be absent otherwise.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::additive;
  std::optional<Eigen::ArrayXd> weights;

  static Objective additive() { return {ObjectiveKind::additive, std::nullopt}; }
  static Objective mult_offset() { return {ObjectiveKind::mult_offset, std::nullopt}; }
  static Objective prop_offset(Eigen::ArrayXd w) {
    return {ObjectiveKind::prop_offset, std::move(w)};
  }
  /// prop_offset with w_i = a_i, the weighting that reuses the quality ceilings.
  static Objective prop_offset_from(const CurveSet& curves) {
    return prop_offset(curves.ceilings());
  }
};

inline void validate(const Objective& objective, Eigen::Index n_phases) {
  if (objective.kind == ObjectiveKind::prop_offset) {
    if (!objective.weights) throw ValidationError("prop-offset objective requires weights");
    if (objective.weights->size() != n_phases)
      throw ValidationError("weights length " + std::to_string(objective.weights->size()) +
                            " does not match phase count " + std::to_string(n_phases));
    if (!(objective.weights->minCoeff() > 0.0))
      throw ValidationError("weights must all be > 0");
  } else if (objective.weights) {
    // Weighted additive / mult-offset variants do not exist; reject rather
    // than silently ignoring a misconfiguration.
    throw ValidationError(std::string(to_string(objective.kind)) +
                          " objective does not take weights");
  }
}

/// Per-phase weight vector the objective implies (all ones except prop_offset).
inline Eigen::ArrayXd effective_weights(const Objective& objective, Eigen::Index n_phases) {
  validate(objective, n_phases);
  if (objective.kind == ObjectiveKind::prop_offset) return *objective.weights;
  return Eigen::ArrayXd::Ones(n_phases);
}

/// Closed-form budget response of one phase at dual price lambda:
///
///   additive      max(0, (1/b) ln(a b / lambda))
///   mult_offset   max(0, (1/b) ln(a (b + lambda) / lambda))
///   prop_offset   max(0, (1/b) ln(a (w b + lambda) / lambda))
///
/// clamped above at `cap` when one is given. `weight` must be 1 for the
/// unweighted objectives. There is no singularity at a = 1: such a phase is
/// simply never starved under the product objectives.
inline double phase_response(const PhaseCurve& curve, double lambda, ObjectiveKind kind,
                             double weight = 1.0,
                             std::optional<double> cap = std::nullopt);

/// Dual price above which the phase receives zero budget:
///
///   additive      a b                      (the marginal at zero)
///   mult_offset   a b / (1 - a)            (the log-marginal at zero)
///   prop_offset   a w b / (1 - a)
///
/// Returns +infinity when a = 1 under the product objectives; such phases
/// are never starved.
inline double starvation_threshold(const PhaseCurve& curve, ObjectiveKind kind,
                                   double weight = 1.0) {
  if (!(weight > 0.0)) throw ValidationError("weight must be > 0, got " + std::to_string(weight));
  if (kind != ObjectiveKind::prop_offset && weight != 1.0)
    throw ValidationError(std::string(to_string(kind)) + " threshold requires weight == 1");

  const double a = curve.ceiling_a;
  const double b = curve.rate_b;
  if (kind == ObjectiveKind::additive) return a * b;
  if (a >= 1.0) return std::numeric_limits<double>::infinity();
  return a * weight * b / (1.0 - a);
}

inline double phase_response(const PhaseCurve& curve, double lambda, ObjectiveKind kind,
                             double weight, std::optional<double> cap) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be > 0, got " + std::to_string(lambda));
  // starvation_threshold validates the weight / kind combination.
  // A phase at or above its threshold is starved exactly; checking the
  // threshold first keeps the boundary free of rounding noise in the log.
  if (lambda >= starvation_threshold(curve, kind, weight)) return 0.0;

  const double a = curve.ceiling_a;
  const double b = curve.rate_b;
  double x = 0.0;
  if (kind == ObjectiveKind::additive) {
    x = std::log(a * b / lambda) / b;
  } else {
    x = std::log(a * (weight * b + lambda) / lambda) / b;
  }
  x = std::max(0.0, x);
  if (cap) x = std::min(x, *cap);
  return x;
}

namespace detail {

inline void check_allocation(const CurveSet& curves, const Eigen::ArrayXd& amounts) {
  if (amounts.size() != curves.size())
    throw ValidationError("allocation length " + std::to_string(amounts.size()) +
                          " does not match phase count " + std::to_string(curves.size()));
  for (Eigen::Index i = 0; i < amounts.size(); ++i)
    if (!(amounts[i] >= 0.0))
      throw ValidationError("allocation amount for phase '" +
                            curves.labels()[static_cast<std::size_t>(i)] +
                            "' must be >= 0, got " + std::to_string(amounts[i]));
}

/// sum_i w_i log g_i(x_i), computed with log1p for accuracy near g = 1.
inline double log_product_value(const CurveSet& curves, const Eigen::ArrayXd& amounts,
                                const Eigen::ArrayXd& weights) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < curves.size(); ++i) {
    const double decay = curves.ceilings()[i] * std::exp(-curves.rates()[i] * amounts[i]);
    total += weights[i] * std::log1p(-decay);  // -inf when a = 1 and x = 0
  }
  return total;
}

}  // namespace detail

/// Log-domain value of a product objective: sum_i w_i log g_i(x_i).
/// Rejects the additive objective, which has no log-domain form.
inline double evaluate_log(const CurveSet& curves, const Eigen::ArrayXd& amounts,
                           const Objective& objective) {
  if (objective.kind == ObjectiveKind::additive)
    throw ValidationError("log-domain value is defined only for product objectives");
  const Eigen::ArrayXd w = effective_weights(objective, curves.size());
  detail::check_allocation(curves, amounts);
  return detail::log_product_value(curves, amounts, w);
}

/// Objective value of an allocation. Product objectives are evaluated in the
/// log domain and exponentiated, so many-phase products cannot underflow
/// pairwise. An allocation that starves an a = 1 phase under a product
/// objective evaluates to 0 (log domain -inf), as forced by g(0) = 0.
inline double evaluate(const CurveSet& curves, const Eigen::ArrayXd& amounts,
                       const Objective& objective) {
  const Eigen::ArrayXd w = effective_weights(objective, curves.size());
  detail::check_allocation(curves, amounts);
  if (objective.kind == ObjectiveKind::additive)
    return eval_f(curves.ceilings(), curves.rates(), amounts).sum();
  return std::exp(detail::log_product_value(curves, amounts, w));
}

/// Marginal of the objective's per-phase term at amount x:
/// f'(x) for additive, w g'(x)/g(x) for the product objectives.
/// This is the quantity equalized to lambda at interior optima.
inline double objective_marginal(const PhaseCurve& curve, double x, ObjectiveKind kind,
                                 double weight = 1.0) {
  const double decay = curve.ceiling_a * std::exp(-curve.rate_b * x);
  const double f_prime = curve.rate_b * decay;
  if (kind == ObjectiveKind::additive) return f_prime;
  return weight * f_prime / (1.0 - decay);
}

}  // namespace zebra
