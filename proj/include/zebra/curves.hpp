#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zebra/errors.hpp"

// Saturating-exponential phase utility curves.
//
//   f(x) = a * (1 - exp(-b x))      quality, ceiling a
//   g(x) = 1 - a * exp(-b x)        pass-through quality, baseline 1 - a
//
// a is the quality ceiling in (0, 1]; b > 0 is the saturation rate in units
// of inverse currency. Curves are fitted from two elicited operating points:
// the token counts at which a phase reaches ~50% and ~90% of its potential,
// converted to currency through per-phase output-token pricing.

namespace zebra {

/// Two elicited operating points plus the quality ceiling for one phase.
struct OperatingPoints {
  long tokens_basic = 0;  ///< output tokens for ~50% of potential quality
  long tokens_great = 0;  ///< output tokens for ~90% of potential quality
  double ceiling = 0.0;   ///< quality ceiling a, in (0, 1]
};

/// Currency conversion for one phase's token estimates.
///
/// `output_price` is currency per output token. `cost_ratio` optionally
/// expresses how much more expensive this phase's model is than the base
/// model; the effective price is output_price * cost_ratio. An input-token
/// price may be present in source documents but is not used by the fit.
struct PhasePricing {
  double output_price = 0.0;
  double cost_ratio = 1.0;
  std::optional<double> input_price;  ///< accepted, ignored by fit_two_point
};

/// Fitted curve parameters for one phase, in budget-currency units.
struct PhaseCurve {
  double ceiling_a = 0.0;
  double rate_b = 0.0;
  std::string label;
};

inline void validate(const OperatingPoints& p) {
  if (p.tokens_basic < 100 || p.tokens_basic > 10000)
    throw ValidationError("tokens_basic must be in [100, 10000], got " +
                          std::to_string(p.tokens_basic));
  if (p.tokens_great < p.tokens_basic)
    throw ValidationError("tokens_great must be >= tokens_basic, got " +
                          std::to_string(p.tokens_great) + " < " + std::to_string(p.tokens_basic));
  if (p.tokens_great > 20000)
    throw ValidationError("tokens_great must be <= 20000, got " + std::to_string(p.tokens_great));
  if (!(p.ceiling > 0.0) || p.ceiling > 1.0)
    throw ValidationError("ceiling must be in (0, 1], got " + std::to_string(p.ceiling));
}

inline void validate(const PhasePricing& p) {
  if (!(p.output_price > 0.0))
    throw ValidationError("output_price must be > 0, got " + std::to_string(p.output_price));
  if (!(p.cost_ratio >= 1.0))
    throw ValidationError("cost_ratio must be >= 1, got " + std::to_string(p.cost_ratio));
}

inline void validate(const PhaseCurve& c) {
  if (!(c.ceiling_a > 0.0) || c.ceiling_a > 1.0)
    throw ValidationError("ceiling_a must be in (0, 1], got " + std::to_string(c.ceiling_a));
  if (!(c.rate_b > 0.0))
    throw ValidationError("rate_b must be > 0, got " + std::to_string(c.rate_b));
}

/// Fits a curve from the two operating points.
///
/// The 50% point implies rate ln2 / tokens_basic, the 90% point implies
/// ln10 / tokens_great; the fitted token-space rate is their geometric mean.
/// Dividing by the effective per-token price (output_price * cost_ratio)
/// rescales the rate into inverse-currency so it matches a monetary budget.
inline PhaseCurve fit_two_point(const OperatingPoints& points, const PhasePricing& pricing,
                                std::string label = {}) {
  validate(points);
  validate(pricing);
  const double rate_basic = std::numbers::ln2 / static_cast<double>(points.tokens_basic);
  const double rate_great = std::log(10.0) / static_cast<double>(points.tokens_great);
  const double rate_tokens = std::sqrt(rate_basic * rate_great);
  const double effective_price = pricing.output_price * pricing.cost_ratio;
  return PhaseCurve{points.ceiling, rate_tokens / effective_price, std::move(label)};
}

namespace detail {
inline void require_nonnegative(double x) {
  if (!(x >= 0.0)) throw DomainError("budget amount must be >= 0, got " + std::to_string(x));
}
}  // namespace detail

/// f(x) = a (1 - e^{-b x}); 0 at x = 0, approaches the ceiling a from below.
inline double eval_f(const PhaseCurve& c, double x) {
  detail::require_nonnegative(x);
  return c.ceiling_a * -std::expm1(-c.rate_b * x);
}

/// f'(x) = a b e^{-b x}; the marginal quality per currency unit. f'(0) = a b.
inline double eval_f_prime(const PhaseCurve& c, double x) {
  detail::require_nonnegative(x);
  return c.ceiling_a * c.rate_b * std::exp(-c.rate_b * x);
}

/// g(x) = 1 - a e^{-b x}; pass-through quality, g(0) = 1 - a, limit 1.
inline double eval_g(const PhaseCurve& c, double x) {
  detail::require_nonnegative(x);
  return 1.0 - c.ceiling_a * std::exp(-c.rate_b * x);
}

// Coefficient-wise versions over Eigen array expressions. No domain checks;
// callers keep x >= 0.

template <typename A, typename B, typename X>
auto eval_f(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b,
            const Eigen::ArrayBase<X>& x) {
  return a * (1.0 - (-b * x).exp());
}

template <typename A, typename B, typename X>
auto eval_f_prime(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b,
                  const Eigen::ArrayBase<X>& x) {
  return a * b * (-b * x).exp();
}

template <typename A, typename B, typename X>
auto eval_g(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b,
            const Eigen::ArrayBase<X>& x) {
  return 1.0 - a * (-b * x).exp();
}

/// An ordered set of phase curves with ceilings and rates stored densely.
class CurveSet {
 public:
  CurveSet() = default;

  CurveSet(std::vector<std::string> labels, Eigen::ArrayXd ceilings, Eigen::ArrayXd rates)
      : labels_(std::move(labels)), a_(std::move(ceilings)), b_(std::move(rates)) {
    if (a_.size() != b_.size() || static_cast<std::size_t>(a_.size()) != labels_.size())
      throw ValidationError("curve set: labels, ceilings and rates must have equal length");
    for (Eigen::Index i = 0; i < a_.size(); ++i) {
      if (!(a_[i] > 0.0) || a_[i] > 1.0)
        throw ValidationError("curve '" + labels_[static_cast<std::size_t>(i)] +
                              "': ceiling_a must be in (0, 1], got " + std::to_string(a_[i]));
      if (!(b_[i] > 0.0))
        throw ValidationError("curve '" + labels_[static_cast<std::size_t>(i)] +
                              "': rate_b must be > 0, got " + std::to_string(b_[i]));
    }
  }

  explicit CurveSet(const std::vector<PhaseCurve>& curves) {
    labels_.reserve(curves.size());
    a_.resize(static_cast<Eigen::Index>(curves.size()));
    b_.resize(static_cast<Eigen::Index>(curves.size()));
    Eigen::Index i = 0;
    for (const PhaseCurve& c : curves) {
      validate(c);
      labels_.push_back(c.label);
      a_[i] = c.ceiling_a;
      b_[i] = c.rate_b;
      ++i;
    }
  }

  Eigen::Index size() const { return a_.size(); }
  bool empty() const { return a_.size() == 0; }

  const Eigen::ArrayXd& ceilings() const { return a_; }
  const Eigen::ArrayXd& rates() const { return b_; }
  const std::vector<std::string>& labels() const { return labels_; }

  PhaseCurve curve(Eigen::Index i) const {
    return PhaseCurve{a_[i], b_[i], labels_[static_cast<std::size_t>(i)]};
  }

  /// Curves for phases [first, size), preserving order.
  CurveSet tail(Eigen::Index first) const {
    const Eigen::Index n = size() - first;
    return CurveSet(std::vector<std::string>(labels_.begin() + first, labels_.end()),
                    a_.segment(first, n).eval(), b_.segment(first, n).eval());
  }

  std::vector<PhaseCurve> to_curves() const {
    std::vector<PhaseCurve> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) out.push_back(curve(i));
    return out;
  }

 private:
  std::vector<std::string> labels_;
  Eigen::ArrayXd a_;
  Eigen::ArrayXd b_;
};

}  // namespace zebra
