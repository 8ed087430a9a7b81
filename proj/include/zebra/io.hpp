#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zebra/estimator.hpp"
#include "zebra/simulator.hpp"
#include "zebra/solver.hpp"
#include "zebra/strategies.hpp"

// Document formats. All inputs and outputs are UTF-8 JSON; sweep results
// additionally serialize to RFC-4180 CSV. Output numbers are printed with 17
// significant digits so values round-trip exactly, and nothing in any
// document depends on the clock: identical inputs produce identical bytes.

namespace zebra {

inline constexpr std::string_view kToolName = "zebra";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Minimal JSON writer: insertion-ordered objects, %.17g numbers.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& value(const std::string& v) { return value(std::string_view(v)); }
  JsonWriter& null();

  std::string str() const { return out_; }

 private:
  void comma();
  void value_escaped(std::string_view v);
  std::string out_;
  std::vector<bool> first_in_scope_;
  bool pending_key_ = false;
};

std::string format_number(double v);          ///< %.17g
std::string csv_escape(std::string_view v);   ///< RFC-4180 quoting

/// Key/value pairs echoed into every output document for provenance.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// ---- parsers ----

/// Pricing table: JSON array of {"phase": str, "output_price": num,
/// ["cost_ratio": num], ["input_price": num]}. Array order defines the
/// phase order. An optional trailing "currency" is read by the CLI layer.
PricingTable parse_pricing_table(std::string_view text);
std::vector<std::string> pricing_phase_order(const PricingTable& table);
std::string parse_pricing_currency(std::string_view text);  ///< "" when absent

/// Curves document (fit output / solve input).
struct CurvesDocument {
  CurveSet curves;
  std::string currency;  ///< opaque unit label
  std::vector<std::string> warnings;
};
CurvesDocument parse_curves_document(std::string_view text);
std::string write_curves_document(const CurvesDocument& doc, const ConfigEcho& config);

/// Caps file: JSON object mapping phase label -> upper bound. Labels
/// missing from the file are uncapped.
std::optional<Eigen::ArrayXd> parse_caps(std::string_view text,
                                         const std::vector<std::string>& phase_order);

std::string write_allocation_document(const std::vector<std::string>& labels,
                                      const Allocation& allocation, std::string_view objective,
                                      double budget, std::string_view currency,
                                      const ConfigEcho& config);

/// Pipeline definition for sweeps: {"phases": [{"phase","a","b"}...],
/// "aggregation": str, "reference_cost": num}.
SyntheticPipeline parse_pipeline(std::string_view text);

/// Experiment config: {"alphas": [...], "runs": n, "sigma": s, "seed": n,
/// "strategies": [...]} where a strategy is either an identifier string or
/// {"kind": str, ["ratio": [...]], ["allocation": {...}]}.
ExperimentConfig parse_experiment_config(std::string_view text);

std::string write_sweep_json(const SweepReport& report, const ConfigEcho& config);
std::string write_sweep_csv(const SweepReport& report);

}  // namespace zebra
