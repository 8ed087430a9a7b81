#pragma once

// Golden fixtures for the four-phase coding-pipeline walkthrough: a
// controller response taken verbatim from a live run, the pricing that
// converts its token estimates to USD, and the reference allocation vectors.

#include <string>
#include <vector>

#include "zebra/curves.hpp"
#include "zebra/estimator.hpp"

namespace fixtures {

inline const char* kControllerResponse = R"({
  "plan": {"tokens_basic": 300, "tokens_great": 600, "a": 0.8},
  "decompose": {"tokens_basic": 400, "tokens_great": 800, "a": 0.7},
  "implement": {"tokens_basic": 800, "tokens_great": 1500, "a": 0.9},
  "refine": {"tokens_basic": 600, "tokens_great": 1200, "a": 0.6}
})";

inline const std::vector<std::string> kPhaseOrder{"plan", "decompose", "implement", "refine"};

inline constexpr double kBasePrice = 0.6e-6;   // USD per output token
inline constexpr double kRefineCostRatio = 16.7;
inline constexpr double kBudget = 0.017951;    // alpha = 0.5 of the mean cost
inline constexpr double kReferenceCost = 0.0359;

// Reference fitted rates, good to +-0.5.
inline constexpr double kExpectedB[4] = {4963.0, 3722.0, 1922.0, 148.6};
inline constexpr double kExpectedA[4] = {0.8, 0.7, 0.9, 0.6};

// Reference allocations at kBudget, good to 2e-5 per phase.
inline constexpr double kAdditiveAllocation[4] = {0.001150, 0.001420, 0.002537, 0.012844};
inline constexpr double kMultOffsetAllocation[4] = {0.001134, 0.001399, 0.002499, 0.012919};

// Direct LLM split for the same task; already sums to kBudget.
inline constexpr double kExternalAllocation[4] = {0.002, 0.002, 0.006, 0.007951};

inline zebra::PricingTable pricing_table() {
  zebra::PricingTable table;
  table.emplace_back("plan", zebra::PhasePricing{kBasePrice, 1.0, {}});
  table.emplace_back("decompose", zebra::PhasePricing{kBasePrice, 1.0, {}});
  table.emplace_back("implement", zebra::PhasePricing{kBasePrice, 1.0, {}});
  table.emplace_back("refine", zebra::PhasePricing{kBasePrice, kRefineCostRatio, {}});
  return table;
}

inline zebra::CurveSet fitted_curves() {
  return zebra::fit_document(zebra::parse_estimate(kControllerResponse, kPhaseOrder),
                             pricing_table());
}

}  // namespace fixtures
