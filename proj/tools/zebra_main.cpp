// zebra: fit phase utility curves, solve budget allocations, and run
// synthetic-pipeline sweeps. See README.md for file formats.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "zebra/errors.hpp"
#include "zebra/estimator.hpp"
#include "zebra/io.hpp"
#include "zebra/simulator.hpp"
#include "zebra/solver.hpp"
#include "zebra/strategies.hpp"

namespace {

using namespace zebra;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

Objective objective_from_name(const std::string& name, const CurveSet& curves) {
  if (name == "additive" || name == "zebra-additive") return Objective::additive();
  if (name == "mult-offset" || name == "zebra-mult-offset") return Objective::mult_offset();
  if (name == "prop-offset" || name == "zebra-prop-offset")
    return Objective::prop_offset_from(curves);
  throw ValidationError("unknown objective '" + name + "'");
}

struct BudgetFlags {
  std::optional<double> budget;
  std::optional<double> alpha;
  std::optional<double> reference_cost;

  double resolve() const {
    const bool has_alpha_pair = alpha.has_value() && reference_cost.has_value();
    if (budget.has_value() == has_alpha_pair)
      throw ValidationError(
          "supply exactly one of --budget or the pair --alpha --reference-cost");
    if (alpha.has_value() != reference_cost.has_value())
      throw ValidationError("--alpha and --reference-cost must be supplied together");
    if (budget) {
      if (!(*budget > 0.0)) throw ValidationError("--budget must be > 0");
      return *budget;
    }
    return budget_from_alpha(*alpha, *reference_cost);
  }
};

int run_fit(const std::string& estimates_path, const std::string& pricing_path,
            const std::string& out_path) {
  const std::string pricing_text = slurp(pricing_path);
  const PricingTable pricing = parse_pricing_table(pricing_text);

  EstimateDocument estimate =
      parse_estimate(slurp(estimates_path), pricing_phase_order(pricing), estimates_path);

  CurvesDocument doc;
  doc.curves = fit_document(estimate, pricing);
  doc.currency = parse_pricing_currency(pricing_text);
  if (doc.currency.empty()) doc.currency = "USD";
  doc.warnings = estimate.warnings;
  for (const auto& [phase, phase_pricing] : pricing)
    if (phase_pricing.input_price)
      doc.warnings.push_back("phase '" + phase +
                             "': input_price is recorded but not used by the two-point fit");

  ConfigEcho config{{"command", "fit"}, {"estimates", estimates_path}, {"pricing", pricing_path}};
  spill(out_path, write_curves_document(doc, config));
  return 0;
}

int run_solve(const std::string& curves_path, const BudgetFlags& budget_flags,
              const std::string& objective_name, const std::string& caps_path, double tolerance,
              const std::string& out_path) {
  const CurvesDocument doc = parse_curves_document(slurp(curves_path));
  const double budget = budget_flags.resolve();
  const Objective objective = objective_from_name(objective_name, doc.curves);

  SolveConfig config;
  config.budget_B = budget;
  config.tolerance = tolerance;
  if (!caps_path.empty()) config.caps = parse_caps(slurp(caps_path), doc.curves.labels());

  const Allocation allocation = solve(doc.curves, objective, config);

  ConfigEcho echo{{"command", "solve"},
                  {"curves", curves_path},
                  {"objective", objective_name},
                  {"budget", format_number(budget)},
                  {"tolerance", format_number(config.effective_tolerance())}};
  if (!caps_path.empty()) echo.emplace_back("caps", caps_path);
  spill(out_path, write_allocation_document(doc.curves.labels(), allocation, objective_name,
                                            budget, doc.currency, echo));
  return 0;
}

int run_sweep(const std::string& pipeline_path, const std::string& config_path,
              const std::string& out_prefix, int jobs) {
  const SyntheticPipeline pipeline = parse_pipeline(slurp(pipeline_path));
  ExperimentConfig config = parse_experiment_config(slurp(config_path));
  config.jobs = jobs;

  const SweepReport report = sweep(pipeline, config);

  ConfigEcho echo{{"command", "sweep"},
                  {"pipeline", pipeline_path},
                  {"experiment_config", config_path},
                  {"seed", std::to_string(config.seed)},
                  {"sigma", format_number(config.noise_sigma)},
                  {"runs", std::to_string(config.runs)},
                  {"jobs", std::to_string(jobs)}};
  spill(out_prefix + ".json", write_sweep_json(report, echo));
  spill(out_prefix + ".csv", write_sweep_csv(report));
  return 0;
}

int run_noise(const std::string& curves_path, double sigma, std::uint64_t seed,
              const std::string& out_path) {
  CurvesDocument doc = parse_curves_document(slurp(curves_path));
  doc.curves = inject_noise(doc.curves, NoiseSpec{sigma, seed});

  ConfigEcho echo{{"command", "noise"},
                  {"curves", curves_path},
                  {"sigma", format_number(sigma)},
                  {"seed", std::to_string(seed)}};
  spill(out_path, write_curves_document(doc, echo));
  return 0;
}

int run_reallocate(const std::string& curves_path, double spent, double budget,
                   const std::string& objective_name, const std::string& out_path) {
  const CurvesDocument doc = parse_curves_document(slurp(curves_path));
  const Objective objective = objective_from_name(objective_name, doc.curves);
  const Allocation allocation = reallocate(doc.curves, objective, spent, budget);

  ConfigEcho echo{{"command", "reallocate"},
                  {"curves", curves_path},
                  {"objective", objective_name},
                  {"spent", format_number(spent)},
                  {"budget", format_number(budget)}};
  spill(out_path, write_allocation_document(doc.curves.labels(), allocation, objective_name,
                                            budget - spent, doc.currency, echo));
  return 0;
}

void report_error(const char* type, const std::string& message,
                  std::optional<std::size_t> byte_offset = std::nullopt) {
  JsonWriter w;
  w.begin_object();
  w.key("error").begin_object();
  w.key("type").value(type);
  w.key("message").value(message);
  if (byte_offset) w.key("byte_offset").value(static_cast<std::uint64_t>(*byte_offset));
  w.end_object();
  w.end_object();
  std::cerr << w.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget allocation over saturating phase-utility curves"};
  app.require_subcommand(1);

  // fit
  std::string estimates_path, pricing_path, fit_out;
  auto* fit = app.add_subcommand("fit", "fit curves from a two-point estimate document");
  fit->add_option("--estimates", estimates_path, "estimate document (JSON)")->required();
  fit->add_option("--pricing", pricing_path, "pricing table (JSON array)")->required();
  fit->add_option("--out", fit_out, "output curves document")->required();

  // solve
  std::string solve_curves, solve_objective = "zebra-additive", solve_caps, solve_out;
  BudgetFlags solve_budget;
  double solve_tolerance = 0.0;
  auto* solve_cmd = app.add_subcommand("solve", "solve the budget allocation for given curves");
  solve_cmd->add_option("--curves", solve_curves, "curves document")->required();
  solve_cmd->add_option("--budget", solve_budget.budget, "total budget B");
  solve_cmd->add_option("--alpha", solve_budget.alpha, "budget multiplier in (0, 1]");
  solve_cmd->add_option("--reference-cost", solve_budget.reference_cost,
                        "mean unconstrained cost");
  solve_cmd->add_option("--objective", solve_objective, "objective name")->required();
  solve_cmd->add_option("--caps", solve_caps, "per-phase caps (JSON object)");
  solve_cmd->add_option("--tolerance", solve_tolerance, "budget-residual tolerance");
  solve_cmd->add_option("--out", solve_out, "output allocation document")->required();

  // sweep
  std::string sweep_pipeline, sweep_config, sweep_prefix;
  int sweep_jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a strategy battery across budget levels");
  sweep_cmd->add_option("--pipeline", sweep_pipeline, "pipeline definition (JSON)")->required();
  sweep_cmd->add_option("--config", sweep_config, "experiment config (JSON)")->required();
  sweep_cmd->add_option("--out-prefix", sweep_prefix, "output prefix (.json/.csv)")->required();
  sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads");

  // noise
  std::string noise_curves, noise_out;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  auto* noise_cmd = app.add_subcommand("noise", "perturb curves with multiplicative noise");
  noise_cmd->add_option("--curves", noise_curves, "curves document")->required();
  noise_cmd->add_option("--sigma", noise_sigma, "relative standard deviation")->required();
  noise_cmd->add_option("--seed", noise_seed, "stream seed")->required();
  noise_cmd->add_option("--out", noise_out, "output curves document")->required();

  // reallocate
  std::string re_curves, re_objective = "zebra-additive", re_out;
  double re_spent = 0.0, re_budget = 0.0;
  auto* re_cmd = app.add_subcommand("reallocate",
                                    "re-solve remaining phases on the leftover budget");
  re_cmd->add_option("--curves", re_curves, "remaining-phase curves document")->required();
  re_cmd->add_option("--spent", re_spent, "budget already spent")->required();
  re_cmd->add_option("--budget", re_budget, "original total budget")->required();
  re_cmd->add_option("--objective", re_objective, "objective name")->required();
  re_cmd->add_option("--out", re_out, "output allocation document")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return run_fit(estimates_path, pricing_path, fit_out);
    if (solve_cmd->parsed())
      return run_solve(solve_curves, solve_budget, solve_objective, solve_caps, solve_tolerance,
                       solve_out);
    if (sweep_cmd->parsed()) return run_sweep(sweep_pipeline, sweep_config, sweep_prefix,
                                              sweep_jobs);
    if (noise_cmd->parsed()) return run_noise(noise_curves, noise_sigma, noise_seed, noise_out);
    if (re_cmd->parsed())
      return run_reallocate(re_curves, re_spent, re_budget, re_objective, re_out);
  } catch (const ParseError& e) {
    report_error("parse", e.what(), e.byte_offset());
    return 1;
  } catch (const ValidationError& e) {
    report_error("validation", e.what());
    return 1;
  } catch (const DomainError& e) {
    report_error("domain", e.what());
    return 1;
  } catch (const SolverError& e) {
    report_error("solver", std::string(e.what()) + " [bracket " + format_number(e.lambda_lo()) +
                               ", " + format_number(e.lambda_hi()) + "]");
    return 1;
  } catch (const ResourceError& e) {
    report_error("resource", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
