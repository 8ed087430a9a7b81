#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zebra/curves.hpp"
#include "zebra/solver.hpp"

// Ingestion of controller-produced estimates and external allocations.
//
// Estimate documents follow the controller response schema: a JSON object
// mapping each phase label to {"tokens_basic": int, "tokens_great": int,
// "a": number}. Values that miss the schema floor/ceiling (100 / 10000 /
// 20000) are clamped with a recorded warning; structural problems (missing
// fields, non-numeric values, tokens_great < tokens_basic) are rejected.
// Phase order comes from an explicit order list supplied alongside, never
// from JSON key order; with an empty list the document's own insertion
// order is used.

namespace zebra {

/// Per-phase two-point token estimates plus criticality, as emitted by a
/// controller. `warnings` records any clamping applied during parsing.
struct EstimateDocument {
  std::vector<std::pair<std::string, OperatingPoints>> phases;
  std::string source;
  std::vector<std::string> warnings;
};

/// A direct per-phase budget split produced outside the solver.
struct ExternalAllocationDocument {
  std::vector<std::pair<std::string, double>> phases;
};

/// Multiplicative Gaussian perturbation of fitted curves.
struct NoiseSpec {
  double sigma = 0.0;      ///< relative standard deviation, >= 0
  std::uint64_t seed = 0;
};

/// Ordered per-phase pricing; the order of entries defines the phase order
/// for documents parsed against this table.
using PricingTable = std::vector<std::pair<std::string, PhasePricing>>;

EstimateDocument parse_estimate(std::string_view text,
                                const std::vector<std::string>& phase_order = {},
                                std::string source = {});

std::string serialize_estimate(const EstimateDocument& doc);

/// Fits every phase of the document with its pricing. The document's phases
/// must match the pricing table one-to-one, in order.
CurveSet fit_document(const EstimateDocument& doc, const PricingTable& pricing);

/// Perturbs each curve's (a, b) with independent multiplicative Gaussian
/// noise: a' = a (1 + z), z ~ N(0, sigma^2), clipped to a in [0.01, 1] and
/// b in [0.01, inf). sigma = 0 returns the input unchanged bit-for-bit.
/// Draw order is a then b, phase by phase, from a stream seeded by spec.seed.
CurveSet inject_noise(const CurveSet& curves, const NoiseSpec& spec);

/// Fits each document and returns the arithmetic per-phase mean of a and b.
/// All documents must carry the same phase labels in the same order.
CurveSet average_estimates(const std::vector<EstimateDocument>& documents,
                           const PricingTable& pricing);

/// Parses a direct allocation and rescales it so the amounts sum exactly to
/// budget_B. All-zero or negative documents are rejected.
Allocation parse_external_allocation(std::string_view text,
                                     const std::vector<std::string>& phase_order,
                                     double budget_B);

/// Rescales an already-parsed external document against the given phase order.
Allocation external_to_allocation(const ExternalAllocationDocument& doc,
                                  const std::vector<std::string>& phase_order, double budget_B);

ExternalAllocationDocument parse_external_document(std::string_view text);

/// Deterministic stand-in for a live controller: pseudo-random operating
/// points within the schema bounds, reproducible from the seed.
EstimateDocument stub_estimate(const std::vector<std::string>& phase_labels, std::uint64_t seed);

}  // namespace zebra
