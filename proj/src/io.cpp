#include "zebra/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <limits>

#include "zebra/errors.hpp"

namespace zebra {

using ordered_json = nlohmann::ordered_json;

// ---- JsonWriter ----

void JsonWriter::comma() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!first_in_scope_.empty()) {
    if (!first_in_scope_.back()) out_ += ',';
    first_in_scope_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  comma();
  out_ += '{';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  first_in_scope_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  comma();
  out_ += '[';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  first_in_scope_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  comma();
  value_escaped(name);
  out_ += ':';
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  comma();
  out_ += format_number(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  comma();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%" PRId64, v);
  out_ += buf;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  comma();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%" PRIu64, v);
  out_ += buf;
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  comma();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  comma();
  value_escaped(v);
  return *this;
}

JsonWriter& JsonWriter::null() {
  comma();
  out_ += "null";
  return *this;
}

void JsonWriter::value_escaped(std::string_view v) {
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\b': out_ += "\\b"; break;
      case '\f': out_ += "\\f"; break;
      case '\n': out_ += "\\n"; break;
      case '\r': out_ += "\\r"; break;
      case '\t': out_ += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out_ += buf;
        } else {
          out_ += c;
        }
    }
  }
  out_ += '"';
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string_view v) {
  const bool needs_quote = v.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quote) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

ordered_json parse_json(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

double number_field(const ordered_json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + field + "'");
  if (!it->is_number()) throw ValidationError(where + ": field '" + field + "' must be a number");
  return it->get<double>();
}

std::string string_field(const ordered_json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + field + "'");
  if (!it->is_string()) throw ValidationError(where + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

void write_config_echo(JsonWriter& w, const ConfigEcho& config) {
  w.key("tool").value(kToolName);
  w.key("version").value(kToolVersion);
  w.key("config").begin_object();
  for (const auto& [key, val] : config) w.key(key).value(std::string_view(val));
  w.end_object();
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "additive" || name == "zebra-additive") return ObjectiveKind::additive;
  if (name == "mult-offset" || name == "zebra-mult-offset") return ObjectiveKind::mult_offset;
  if (name == "prop-offset" || name == "zebra-prop-offset") return ObjectiveKind::prop_offset;
  throw ValidationError("unknown objective '" + name + "'");
}

}  // namespace

// ---- pricing ----

PricingTable parse_pricing_table(std::string_view text) {
  const ordered_json root = parse_json(text);
  const ordered_json* entries = &root;
  if (root.is_object()) {
    const auto it = root.find("pricing");
    if (it == root.end())
      throw ValidationError("pricing table must be a JSON array or carry a 'pricing' array");
    entries = &*it;
  }
  if (!entries->is_array()) throw ValidationError("pricing table must be a JSON array");

  PricingTable table;
  for (const auto& entry : *entries) {
    const std::string where = "pricing entry " + std::to_string(table.size());
    if (!entry.is_object()) throw ValidationError(where + ": must be a JSON object");
    const std::string phase = string_field(entry, "phase", where);
    PhasePricing pricing;
    pricing.output_price = number_field(entry, "output_price", "phase '" + phase + "'");
    if (entry.contains("cost_ratio"))
      pricing.cost_ratio = number_field(entry, "cost_ratio", "phase '" + phase + "'");
    if (entry.contains("input_price"))
      pricing.input_price = number_field(entry, "input_price", "phase '" + phase + "'");
    validate(pricing);
    table.emplace_back(phase, pricing);
  }
  if (table.empty()) throw ValidationError("pricing table has no phases");
  return table;
}

std::vector<std::string> pricing_phase_order(const PricingTable& table) {
  std::vector<std::string> order;
  order.reserve(table.size());
  for (const auto& [phase, pricing] : table) order.push_back(phase);
  return order;
}

std::string parse_pricing_currency(std::string_view text) {
  const ordered_json root = parse_json(text);
  if (root.is_object() && root.contains("currency") && root["currency"].is_string())
    return root["currency"].get<std::string>();
  return "";
}

// ---- curves ----

CurvesDocument parse_curves_document(std::string_view text) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("curves document must be a JSON object");
  const auto it = root.find("phases");
  if (it == root.end() || !it->is_array())
    throw ValidationError("curves document: missing 'phases' array");

  std::vector<PhaseCurve> curves;
  for (const auto& entry : *it) {
    const std::string where = "curve entry " + std::to_string(curves.size());
    if (!entry.is_object()) throw ValidationError(where + ": must be a JSON object");
    PhaseCurve c;
    c.label = string_field(entry, "phase", where);
    c.ceiling_a = number_field(entry, "a", "phase '" + c.label + "'");
    c.rate_b = number_field(entry, "b", "phase '" + c.label + "'");
    validate(c);
    curves.push_back(std::move(c));
  }
  if (curves.empty()) throw ValidationError("curves document has no phases");

  CurvesDocument doc;
  doc.curves = CurveSet(curves);
  if (root.contains("currency") && root["currency"].is_string())
    doc.currency = root["currency"].get<std::string>();
  return doc;
}

std::string write_curves_document(const CurvesDocument& doc, const ConfigEcho& config) {
  JsonWriter w;
  w.begin_object();
  write_config_echo(w, config);
  w.key("currency").value(std::string_view(doc.currency));
  w.key("units").begin_object();
  w.key("a").value("quality ceiling, dimensionless");
  w.key("b").value("saturation rate, 1 / " + (doc.currency.empty() ? "currency" : doc.currency));
  w.end_object();
  if (!doc.warnings.empty()) {
    w.key("warnings").begin_array();
    for (const auto& warning : doc.warnings) w.value(std::string_view(warning));
    w.end_array();
  }
  w.key("phases").begin_array();
  const CurveSet& curves = doc.curves;
  for (Eigen::Index i = 0; i < curves.size(); ++i) {
    w.begin_object();
    w.key("phase").value(std::string_view(curves.labels()[static_cast<std::size_t>(i)]));
    w.key("a").value(curves.ceilings()[i]);
    w.key("b").value(curves.rates()[i]);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

// ---- caps ----

std::optional<Eigen::ArrayXd> parse_caps(std::string_view text,
                                         const std::vector<std::string>& phase_order) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("caps document must be a JSON object");
  Eigen::ArrayXd caps = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(phase_order.size()),
                                                 std::numeric_limits<double>::infinity());
  bool any = false;
  for (const auto& [label, value] : root.items()) {
    const auto pos = std::find(phase_order.begin(), phase_order.end(), label);
    if (pos == phase_order.end())
      throw ValidationError("caps document: unknown phase '" + label + "'");
    if (!value.is_number())
      throw ValidationError("caps document: cap for '" + label + "' must be a number");
    const double cap = value.get<double>();
    if (!(cap > 0.0))
      throw ValidationError("caps document: cap for '" + label + "' must be > 0");
    caps[static_cast<Eigen::Index>(pos - phase_order.begin())] = cap;
    any = true;
  }
  if (!any) return std::nullopt;
  return caps;
}

// ---- allocations ----

std::string write_allocation_document(const std::vector<std::string>& labels,
                                      const Allocation& allocation, std::string_view objective,
                                      double budget, std::string_view currency,
                                      const ConfigEcho& config) {
  JsonWriter w;
  w.begin_object();
  write_config_echo(w, config);
  w.key("objective").value(objective);
  w.key("currency").value(currency);
  w.key("budget").value(budget);
  w.key("budget_used").value(allocation.budget_used);
  if (allocation.lambda_star)
    w.key("lambda_star").value(*allocation.lambda_star);
  else
    w.key("lambda_star").null();
  if (allocation.objective_value)
    w.key("objective_value").value(*allocation.objective_value);
  else
    w.key("objective_value").null();
  w.key("amounts").begin_object();
  for (Eigen::Index i = 0; i < allocation.amounts.size(); ++i)
    w.key(labels[static_cast<std::size_t>(i)]).value(allocation.amounts[i]);
  w.end_object();
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

// ---- pipeline / experiment config ----

SyntheticPipeline parse_pipeline(std::string_view text) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("pipeline document must be a JSON object");
  const auto phases = root.find("phases");
  if (phases == root.end() || !phases->is_array())
    throw ValidationError("pipeline document: missing 'phases' array");

  std::vector<PhaseCurve> curves;
  for (const auto& entry : *phases) {
    PhaseCurve c;
    c.label = string_field(entry, "phase", "pipeline phase");
    c.ceiling_a = number_field(entry, "a", "phase '" + c.label + "'");
    c.rate_b = number_field(entry, "b", "phase '" + c.label + "'");
    validate(c);
    curves.push_back(std::move(c));
  }

  SyntheticPipeline pipeline;
  pipeline.truth = CurveSet(curves);
  pipeline.reference_cost = number_field(root, "reference_cost", "pipeline document");
  const std::string aggregation = root.contains("aggregation")
                                      ? string_field(root, "aggregation", "pipeline document")
                                      : "additive";
  switch (objective_kind_from_string(aggregation)) {
    case ObjectiveKind::additive: pipeline.aggregation = Objective::additive(); break;
    case ObjectiveKind::mult_offset: pipeline.aggregation = Objective::mult_offset(); break;
    case ObjectiveKind::prop_offset:
      pipeline.aggregation = Objective::prop_offset_from(pipeline.truth);
      break;
  }
  validate(pipeline);
  return pipeline;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  const ordered_json root = parse_json(text);
  if (!root.is_object()) throw ValidationError("experiment config must be a JSON object");

  ExperimentConfig config;
  if (root.contains("alphas")) {
    config.alphas.clear();
    for (const auto& a : root["alphas"]) {
      if (!a.is_number()) throw ValidationError("config alphas must be numbers");
      config.alphas.push_back(a.get<double>());
    }
  }
  if (root.contains("runs")) config.runs = root["runs"].get<int>();
  if (root.contains("sigma")) config.noise_sigma = root["sigma"].get<double>();
  if (root.contains("seed")) config.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("tolerance")) config.solve.tolerance = root["tolerance"].get<double>();

  const auto strategies = root.find("strategies");
  if (strategies == root.end() || !strategies->is_array() || strategies->empty())
    throw ValidationError("experiment config: missing non-empty 'strategies' array");
  for (const auto& entry : *strategies) {
    StrategySpec spec;
    if (entry.is_string()) {
      spec.kind = strategy_from_string(entry.get<std::string>());
    } else if (entry.is_object()) {
      spec.kind = strategy_from_string(string_field(entry, "kind", "strategy entry"));
      if (entry.contains("ratio")) {
        const auto& ratio = entry["ratio"];
        if (!ratio.is_array()) throw ValidationError("strategy ratio must be an array");
        Eigen::ArrayXd fractions(static_cast<Eigen::Index>(ratio.size()));
        Eigen::Index i = 0;
        for (const auto& f : ratio) fractions[i++] = f.get<double>();
        spec.ratio = std::move(fractions);
      }
      if (entry.contains("allocation")) {
        ExternalAllocationDocument doc;
        for (const auto& [label, amount] : entry["allocation"].items()) {
          if (!amount.is_number())
            throw ValidationError("strategy allocation for '" + label + "' must be a number");
          doc.phases.emplace_back(label, amount.get<double>());
        }
        spec.external_doc = std::move(doc);
      }
    } else {
      throw ValidationError("strategy entries must be strings or objects");
    }
    if (spec.kind == StrategyKind::fixed_ratio && !spec.ratio)
      throw ValidationError("fixed-ratio strategy requires a 'ratio' array");
    if (spec.kind == StrategyKind::external && !spec.external_doc)
      throw ValidationError("external strategy requires an 'allocation' object");
    config.strategies.push_back(std::move(spec));
  }
  return config;
}

// ---- sweep outputs ----

std::string write_sweep_json(const SweepReport& report, const ConfigEcho& config) {
  JsonWriter w;
  w.begin_object();
  write_config_echo(w, config);
  w.key("phases").begin_array();
  for (const auto& label : report.phase_labels) w.value(std::string_view(label));
  w.end_array();
  w.key("nb_reference").value(report.nb_reference);

  w.key("cells").begin_array();
  for (const CellSummary& cell : report.cells) {
    w.begin_object();
    w.key("alpha").value(cell.alpha);
    w.key("strategy").value(std::string_view(cell.strategy));
    w.key("runs").value(cell.runs);
    w.key("mean_quality").value(cell.mean_quality);
    w.key("retention_ratio_of_means").value(cell.retention_ratio_of_means);
    w.key("retention_mean_of_ratios").value(cell.retention_mean_of_ratios);
    w.key("mean_fractions").begin_array();
    for (Eigen::Index i = 0; i < cell.mean_fractions.size(); ++i)
      w.value(cell.mean_fractions[i]);
    w.end_array();
    w.end_object();
  }
  w.end_array();

  w.key("runs").begin_array();
  for (const RunRecord& run : report.runs) {
    w.begin_object();
    w.key("alpha").value(run.alpha);
    w.key("strategy").value(std::string_view(run.strategy));
    w.key("seed").value(run.seed);
    w.key("budget").value(run.budget);
    w.key("budget_used").value(run.budget_used);
    w.key("quality").value(run.quality);
    if (run.lambda_star)
      w.key("lambda_star").value(*run.lambda_star);
    else
      w.key("lambda_star").null();
    w.key("amounts").begin_array();
    for (Eigen::Index i = 0; i < run.amounts.size(); ++i) w.value(run.amounts[i]);
    w.end_array();
    w.key("fractions").begin_array();
    for (Eigen::Index i = 0; i < run.fractions.size(); ++i) w.value(run.fractions[i]);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

std::string write_sweep_csv(const SweepReport& report) {
  std::string out = "alpha,strategy,seed,budget,budget_used,quality,nb_reference,retention";
  for (const auto& label : report.phase_labels) out += ",frac_" + csv_escape(label);
  out += "\r\n";
  for (const RunRecord& run : report.runs) {
    out += format_number(run.alpha);
    out += ',';
    out += csv_escape(run.strategy);
    out += ',';
    out += std::to_string(run.seed);
    out += ',';
    out += format_number(run.budget);
    out += ',';
    out += format_number(run.budget_used);
    out += ',';
    out += format_number(run.quality);
    out += ',';
    out += format_number(report.nb_reference);
    out += ',';
    out += format_number(run.quality / report.nb_reference);
    for (Eigen::Index i = 0; i < run.fractions.size(); ++i) {
      out += ',';
      out += format_number(run.fractions[i]);
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace zebra
