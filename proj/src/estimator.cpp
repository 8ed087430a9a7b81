#include "zebra/estimator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zebra/errors.hpp"
#include "zebra/rng.hpp"

namespace zebra {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json parse_json(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

double require_number(const ordered_json& obj, const std::string& phase, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end())
    throw ValidationError("phase '" + phase + "': missing required field '" + field + "'");
  if (!it->is_number())
    throw ValidationError("phase '" + phase + "': field '" + field + "' must be a number");
  return it->get<double>();
}

long clamp_tokens(double raw, long lo, long hi, const std::string& phase, const char* field,
                  std::vector<std::string>& warnings) {
  long value = std::llround(raw);
  if (value < lo) {
    warnings.push_back("phase '" + phase + "': " + field + " " + std::to_string(value) +
                       " clamped to " + std::to_string(lo));
    value = lo;
  } else if (value > hi) {
    warnings.push_back("phase '" + phase + "': " + field + " " + std::to_string(value) +
                       " clamped to " + std::to_string(hi));
    value = hi;
  }
  return value;
}

OperatingPoints parse_phase_points(const ordered_json& obj, const std::string& phase,
                                   std::vector<std::string>& warnings) {
  if (!obj.is_object())
    throw ValidationError("phase '" + phase + "': entry must be a JSON object");
  const double raw_basic = require_number(obj, phase, "tokens_basic");
  const double raw_great = require_number(obj, phase, "tokens_great");
  const double raw_a = require_number(obj, phase, "a");

  // Ordering is a schema rule on the raw values, not something to clamp away.
  if (raw_great < raw_basic)
    throw ValidationError("phase '" + phase + "': tokens_great " + std::to_string(raw_great) +
                          " < tokens_basic " + std::to_string(raw_basic));

  OperatingPoints p;
  p.tokens_basic = clamp_tokens(raw_basic, 100, 10000, phase, "tokens_basic", warnings);
  p.tokens_great = clamp_tokens(raw_great, p.tokens_basic, 20000, phase, "tokens_great", warnings);
  p.ceiling = raw_a;
  if (!(p.ceiling > 0.0)) {
    warnings.push_back("phase '" + phase + "': a " + std::to_string(raw_a) + " clamped to 0.01");
    p.ceiling = 0.01;
  } else if (p.ceiling > 1.0) {
    warnings.push_back("phase '" + phase + "': a " + std::to_string(raw_a) + " clamped to 1");
    p.ceiling = 1.0;
  }
  return p;
}

}  // namespace

EstimateDocument parse_estimate(std::string_view text, const std::vector<std::string>& phase_order,
                                std::string source) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("estimate document must be a JSON object");

  EstimateDocument doc;
  doc.source = std::move(source);

  if (phase_order.empty()) {
    for (const auto& [label, value] : root.items()) {
      if (label.empty()) throw ValidationError("estimate document: empty phase label");
      doc.phases.emplace_back(label, parse_phase_points(value, label, doc.warnings));
    }
  } else {
    for (const std::string& label : phase_order) {
      const auto it = root.find(label);
      if (it == root.end())
        throw ValidationError("estimate document: missing phase '" + label + "'");
      doc.phases.emplace_back(label, parse_phase_points(*it, label, doc.warnings));
    }
  }
  if (doc.phases.empty()) throw ValidationError("estimate document has no phases");

  for (std::size_t i = 0; i < doc.phases.size(); ++i)
    for (std::size_t j = i + 1; j < doc.phases.size(); ++j)
      if (doc.phases[i].first == doc.phases[j].first)
        throw ValidationError("estimate document: duplicate phase '" + doc.phases[i].first + "'");
  return doc;
}

std::string serialize_estimate(const EstimateDocument& doc) {
  ordered_json root = ordered_json::object();
  for (const auto& [label, p] : doc.phases) {
    root[label] = {{"tokens_basic", p.tokens_basic},
                   {"tokens_great", p.tokens_great},
                   {"a", p.ceiling}};
  }
  return root.dump();
}

CurveSet fit_document(const EstimateDocument& doc, const PricingTable& pricing) {
  if (doc.phases.size() != pricing.size())
    throw ValidationError("pricing table has " + std::to_string(pricing.size()) +
                          " phases, estimate document has " + std::to_string(doc.phases.size()));
  std::vector<PhaseCurve> curves;
  curves.reserve(doc.phases.size());
  for (std::size_t i = 0; i < doc.phases.size(); ++i) {
    if (doc.phases[i].first != pricing[i].first)
      throw ValidationError("phase order mismatch: estimate has '" + doc.phases[i].first +
                            "', pricing has '" + pricing[i].first + "' at position " +
                            std::to_string(i));
    curves.push_back(fit_two_point(doc.phases[i].second, pricing[i].second, doc.phases[i].first));
  }
  return CurveSet(curves);
}

CurveSet inject_noise(const CurveSet& curves, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0))
    throw ValidationError("noise sigma must be >= 0, got " + std::to_string(spec.sigma));
  if (spec.sigma == 0.0) return curves;

  rng::Xoshiro256StarStar stream(spec.seed);
  Eigen::ArrayXd a = curves.ceilings();
  Eigen::ArrayXd b = curves.rates();
  for (Eigen::Index i = 0; i < curves.size(); ++i) {
    a[i] = std::clamp(a[i] * (1.0 + spec.sigma * stream.next_normal()), 0.01, 1.0);
    b[i] = std::max(b[i] * (1.0 + spec.sigma * stream.next_normal()), 0.01);
  }
  return CurveSet(curves.labels(), std::move(a), std::move(b));
}

CurveSet average_estimates(const std::vector<EstimateDocument>& documents,
                           const PricingTable& pricing) {
  if (documents.empty()) throw ValidationError("average_estimates requires at least one document");
  const CurveSet first = fit_document(documents.front(), pricing);
  Eigen::ArrayXd a = first.ceilings();
  Eigen::ArrayXd b = first.rates();
  for (std::size_t d = 1; d < documents.size(); ++d) {
    for (std::size_t i = 0; i < documents[d].phases.size(); ++i) {
      if (i >= documents.front().phases.size() ||
          documents[d].phases[i].first != documents.front().phases[i].first)
        throw ValidationError("document " + std::to_string(d) +
                              " phase labels do not match the first document");
    }
    if (documents[d].phases.size() != documents.front().phases.size())
      throw ValidationError("document " + std::to_string(d) +
                            " phase labels do not match the first document");
    const CurveSet fitted = fit_document(documents[d], pricing);
    a += fitted.ceilings();
    b += fitted.rates();
  }
  const double count = static_cast<double>(documents.size());
  return CurveSet(first.labels(), (a / count).eval(), (b / count).eval());
}

ExternalAllocationDocument parse_external_document(std::string_view text) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("allocation document must be a JSON object");
  ExternalAllocationDocument doc;
  for (const auto& [label, value] : root.items()) {
    if (!value.is_number())
      throw ValidationError("phase '" + label + "': allocation must be a number");
    doc.phases.emplace_back(label, value.get<double>());
  }
  if (doc.phases.empty()) throw ValidationError("allocation document has no phases");
  return doc;
}

Allocation external_to_allocation(const ExternalAllocationDocument& doc,
                                  const std::vector<std::string>& phase_order, double budget_B) {
  if (!(budget_B > 0.0))
    throw ValidationError("budget_B must be > 0, got " + std::to_string(budget_B));

  std::vector<double> raw;
  if (phase_order.empty()) {
    for (const auto& [label, amount] : doc.phases) raw.push_back(amount);
  } else {
    for (const std::string& label : phase_order) {
      const auto it = std::find_if(doc.phases.begin(), doc.phases.end(),
                                   [&](const auto& p) { return p.first == label; });
      if (it == doc.phases.end())
        throw ValidationError("allocation document: missing phase '" + label + "'");
      raw.push_back(it->second);
    }
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0.0)
      throw ValidationError("allocation amounts must be >= 0, got " + std::to_string(raw[i]));
    sum += raw[i];
  }
  if (sum <= 0.0) throw ValidationError("allocation document is all-zero");

  Allocation out;
  out.amounts.resize(static_cast<Eigen::Index>(raw.size()));
  const double scale = budget_B / sum;
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.amounts[static_cast<Eigen::Index>(i)] = raw[i] * scale;
  out.budget_used = out.amounts.sum();
  return out;
}

Allocation parse_external_allocation(std::string_view text,
                                     const std::vector<std::string>& phase_order,
                                     double budget_B) {
  return external_to_allocation(parse_external_document(text), phase_order, budget_B);
}

EstimateDocument stub_estimate(const std::vector<std::string>& phase_labels, std::uint64_t seed) {
  if (phase_labels.empty()) throw ValidationError("stub_estimate requires at least one phase");
  rng::Xoshiro256StarStar stream(rng::derive_stream(seed, {0x57ab}));
  EstimateDocument doc;
  doc.source = "stub:" + std::to_string(seed);
  for (const std::string& label : phase_labels) {
    OperatingPoints p;
    p.tokens_basic = 100 + static_cast<long>(stream.next_double() * 9901.0);
    const long great_span = 20000 - p.tokens_basic;
    p.tokens_great = p.tokens_basic +
                     static_cast<long>(stream.next_double() * static_cast<double>(great_span + 1));
    p.ceiling = 0.05 + 0.95 * stream.next_double();
    p.tokens_basic = std::min(p.tokens_basic, 10000L);
    p.tokens_great = std::min(p.tokens_great, 20000L);
    doc.phases.emplace_back(label, p);
  }
  return doc;
}

}  // namespace zebra
