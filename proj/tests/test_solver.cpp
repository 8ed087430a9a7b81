#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "zebra/rng.hpp"
#include "zebra/solver.hpp"

using namespace zebra;

namespace {

SolveConfig config_for(double budget) {
  SolveConfig c;
  c.budget_B = budget;
  return c;
}

}  // namespace

TEST_CASE("additive solve reproduces the pipeline fixture") {
  const CurveSet curves = fixtures::fitted_curves();
  const Allocation alloc = solve(curves, Objective::additive(), config_for(fixtures::kBudget));
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(alloc.amounts[i] - fixtures::kAdditiveAllocation[i]) < 2e-5);
  CHECK(std::abs(alloc.budget_used - fixtures::kBudget) < 1e-9);
  CHECK(alloc.lambda_star.has_value());
  CHECK(*alloc.lambda_star == doctest::Approx(13.218).epsilon(1e-3));
}

TEST_CASE("mult-offset solve reproduces the pipeline fixture") {
  const CurveSet curves = fixtures::fitted_curves();
  const Allocation alloc = solve(curves, Objective::mult_offset(), config_for(fixtures::kBudget));
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(alloc.amounts[i] - fixtures::kMultOffsetAllocation[i]) < 2e-5);
  CHECK(std::abs(alloc.budget_used - fixtures::kBudget) < 1e-9);
}

TEST_CASE("single phase gets the whole budget") {
  const CurveSet one({"only"}, Eigen::ArrayXd::Constant(1, 0.7),
                     Eigen::ArrayXd::Constant(1, 20.0));
  for (const Objective& obj : {Objective::additive(), Objective::mult_offset()}) {
    const Allocation alloc = solve(one, obj, config_for(0.05));
    CHECK(alloc.amounts[0] == doctest::Approx(0.05).epsilon(1e-12));
  }
}

TEST_CASE("identical phases split the budget evenly") {
  const int n = 5;
  const CurveSet same(std::vector<std::string>(n, "p"),
                      Eigen::ArrayXd::Constant(n, 0.6), Eigen::ArrayXd::Constant(n, 35.0));
  for (const Objective& obj : {Objective::additive(), Objective::mult_offset()}) {
    const Allocation alloc = solve(same, obj, config_for(0.25));
    for (int i = 0; i < n; ++i)
      CHECK(alloc.amounts[i] == doctest::Approx(0.05).epsilon(1e-6));
  }
}

TEST_CASE("two-phase additive starvation, hand-constructed") {
  // At x1 = B the first phase's marginal is 90 e^{-1} = 33.1, far above the
  // second phase's marginal at zero (0.1), so phase 2 must starve.
  const CurveSet curves({"strong", "weak"}, (Eigen::ArrayXd(2) << 0.9, 0.1).finished(),
                        (Eigen::ArrayXd(2) << 100.0, 1.0).finished());
  const Allocation alloc = solve(curves, Objective::additive(), config_for(0.01));
  CHECK(alloc.amounts[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(alloc.amounts[1] == 0.0);

  // Grid oracle agrees that pouring everything into phase 1 is optimal.
  const Allocation grid =
      grid_oracle(curves, Objective::additive(), config_for(0.01), 101);
  CHECK(grid.amounts[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(grid.amounts[1] == 0.0);
}

TEST_CASE("total_response basics") {
  const CurveSet curves = fixtures::fitted_curves();
  // Every phase is starved at or above the largest marginal at zero.
  double max_threshold = 0.0;
  for (Eigen::Index i = 0; i < curves.size(); ++i)
    max_threshold = std::max(
        max_threshold, starvation_threshold(curves.curve(i), ObjectiveKind::additive));
  CHECK(total_response(curves, max_threshold, Objective::additive()) == 0.0);
  CHECK(total_response(curves, max_threshold * 10.0, Objective::additive()) == 0.0);

  // Single phase: lambda chosen to invert the closed form exactly at B.
  const double a = 0.75, b = 40.0, B = 0.03;
  const CurveSet one({"p"}, Eigen::ArrayXd::Constant(1, a), Eigen::ArrayXd::Constant(1, b));
  CHECK(total_response(one, a * b * std::exp(-b * B), Objective::additive()) ==
        doctest::Approx(B).epsilon(1e-12));

  // Two identical phases respond twice as much as one at every price.
  const CurveSet two({"p", "q"}, Eigen::ArrayXd::Constant(2, a),
                     Eigen::ArrayXd::Constant(2, b));
  rng::Xoshiro256StarStar stream(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double lambda = std::pow(10.0, -1.0 + 3.0 * stream.next_double());
    CHECK(total_response(two, lambda, Objective::mult_offset()) ==
          doctest::Approx(2.0 * total_response(one, lambda, Objective::mult_offset()))
              .epsilon(1e-12));
  }
  CHECK_THROWS_AS(total_response(one, 0.0, Objective::additive()), DomainError);
}

TEST_CASE("total_response is non-increasing in lambda") {
  rng::Xoshiro256StarStar stream(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 4);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();
    const double l1 = std::pow(10.0, -1.0 + 4.0 * stream.next_double());
    const double l2 = l1 * (1.0 + 2.0 * stream.next_double());
    CHECK(total_response(curves, l1, obj) >= total_response(curves, l2, obj));
  }
}

TEST_CASE("budget feasibility and exact budget use") {
  rng::Xoshiro256StarStar stream(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracles::random_instance(stream, 1 + trial % 5);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj =
        trial % 3 == 0
            ? Objective::additive()
            : (trial % 3 == 1 ? Objective::mult_offset()
                              : Objective::prop_offset(
                                    Eigen::ArrayXd::Constant(curves.size(), 0.5)));
    const Allocation alloc = solve(curves, obj, config_for(inst.budget));
    CHECK(alloc.amounts.minCoeff() >= 0.0);
    CHECK(std::abs(alloc.budget_used - inst.budget) <= 1e-9 * inst.budget);
  }
}

TEST_CASE("KKT residuals at interior phases") {
  rng::Xoshiro256StarStar stream(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 3);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();
    const Allocation alloc = solve(curves, obj, config_for(inst.budget));
    REQUIRE(alloc.lambda_star.has_value());
    for (Eigen::Index i = 0; i < curves.size(); ++i) {
      if (alloc.amounts[i] <= 0.0) continue;
      const double marginal = objective_marginal(curves.curve(i), alloc.amounts[i], obj.kind);
      CHECK(std::abs(marginal - *alloc.lambda_star) <= 1e-6 * *alloc.lambda_star);
    }
  }
}

TEST_CASE("solver dominates arbitrary feasible allocations") {
  rng::Xoshiro256StarStar stream(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 4);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();
    const Allocation alloc = solve(curves, obj, config_for(inst.budget));

    // Random feasible competitor: a normalized random split of the budget.
    Eigen::ArrayXd y(curves.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = stream.next_double();
    y *= inst.budget / y.sum();
    CHECK(*alloc.objective_value >= evaluate(curves, y, obj) - 1e-9);

    const Eigen::ArrayXd uniform =
        Eigen::ArrayXd::Constant(curves.size(), inst.budget / curves.size());
    CHECK(*alloc.objective_value >= evaluate(curves, uniform, obj) - 1e-9);
  }
}

TEST_CASE("currency invariance") {
  rng::Xoshiro256StarStar stream(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracles::random_instance(stream, 3);
    const CurveSet curves = oracles::to_curve_set(inst);
    const double factor = std::pow(10.0, -2.0 + 4.0 * stream.next_double());
    const CurveSet scaled(curves.labels(), curves.ceilings(),
                          (curves.rates() / factor).eval());
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();
    const Allocation base = solve(curves, obj, config_for(inst.budget));
    const Allocation rescaled = solve(scaled, obj, config_for(inst.budget * factor));
    // The two dual searches stop at slightly different residuals, so compare
    // against the scaled problem's own budget tolerance.
    const double tol = 10.0 * config_for(inst.budget * factor).effective_tolerance();
    for (Eigen::Index i = 0; i < curves.size(); ++i)
      CHECK(std::abs(rescaled.amounts[i] - base.amounts[i] * factor) <= tol);
    CHECK(*rescaled.objective_value ==
          doctest::Approx(*base.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("caps saturating the budget return every phase at its cap") {
  const CurveSet curves = fixtures::fitted_curves();
  Eigen::ArrayXd caps(4);
  caps << 0.001, 0.002, 0.003, 0.004;  // sums to 0.01 < B
  SolveConfig config = config_for(fixtures::kBudget);
  config.caps = caps;
  const Allocation alloc = solve(curves, Objective::additive(), config);
  for (int i = 0; i < 4; ++i) CHECK(alloc.amounts[i] == caps[i]);
  CHECK(alloc.budget_used == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(*alloc.lambda_star == 0.0);
}

TEST_CASE("binding cap diverts budget to the other phases") {
  const CurveSet curves = fixtures::fitted_curves();
  SolveConfig config = config_for(fixtures::kBudget);
  Eigen::ArrayXd caps = Eigen::ArrayXd::Constant(4, fixtures::kBudget);
  caps[3] = 0.005;  // refine would take ~0.0128 uncapped
  config.caps = caps;
  const Allocation capped = solve(curves, Objective::additive(), config);
  CHECK(capped.amounts[3] == doctest::Approx(0.005).epsilon(1e-9));
  CHECK(std::abs(capped.budget_used - fixtures::kBudget) <= 1e-9 * fixtures::kBudget);

  // The capped optimum must match the grid oracle over the capped simplex.
  const Allocation grid = grid_oracle(curves, Objective::additive(), config, 401);
  CHECK(*capped.objective_value >= *grid.objective_value - 1e-12);
}

TEST_CASE("grid oracle sandwich on random instances") {
  rng::Xoshiro256StarStar stream(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 3);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();
    const Allocation exact = solve(curves, obj, config_for(inst.budget));
    const Allocation coarse = grid_oracle(curves, obj, config_for(inst.budget), 101);
    const Allocation fine = grid_oracle(curves, obj, config_for(inst.budget), 401);
    CHECK(*exact.objective_value >= *coarse.objective_value - 1e-12);
    CHECK(*exact.objective_value >= *fine.objective_value - 1e-12);
    // Refining the grid closes the gap.
    CHECK(*fine.objective_value >= *coarse.objective_value - 1e-12);
  }
}

TEST_CASE("box KKT conditions hold under random caps") {
  // Interior phases equalize at lambda*; capped phases have marginal above
  // it, starved phases below, and the budget stays feasible throughout.
  rng::Xoshiro256StarStar stream(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 4);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Objective obj = trial % 2 ? Objective::mult_offset() : Objective::additive();

    Eigen::ArrayXd caps(curves.size());
    for (Eigen::Index i = 0; i < caps.size(); ++i)
      caps[i] = (0.1 + stream.next_double()) * inst.budget;
    SolveConfig config = config_for(inst.budget);
    config.caps = caps;

    const Allocation alloc = solve(curves, obj, config);
    REQUIRE(alloc.lambda_star.has_value());
    const double lambda = *alloc.lambda_star;
    const double cap_total = caps.sum();

    CHECK(alloc.budget_used <= std::min(inst.budget, cap_total) * (1.0 + 1e-9));
    if (cap_total <= inst.budget) {
      CHECK(lambda == 0.0);
      for (Eigen::Index i = 0; i < caps.size(); ++i) CHECK(alloc.amounts[i] == caps[i]);
      continue;
    }
    CHECK(std::abs(alloc.budget_used - inst.budget) <= 1e-9 * inst.budget);
    for (Eigen::Index i = 0; i < caps.size(); ++i) {
      CHECK(alloc.amounts[i] <= caps[i] * (1.0 + 1e-12));
      const double m = objective_marginal(curves.curve(i), alloc.amounts[i], obj.kind);
      if (alloc.amounts[i] <= 0.0) {
        CHECK(m <= lambda * (1.0 + 1e-6));
      } else if (alloc.amounts[i] >= caps[i] * (1.0 - 1e-12)) {
        CHECK(m >= lambda * (1.0 - 1e-6));
      } else {
        CHECK(std::abs(m - lambda) <= 1e-6 * lambda);
      }
    }
  }
}

TEST_CASE("grid oracle trivial cases") {
  const CurveSet one({"p"}, Eigen::ArrayXd::Constant(1, 0.7),
                     Eigen::ArrayXd::Constant(1, 25.0));
  const Allocation single = grid_oracle(one, Objective::additive(), config_for(0.04), 101);
  CHECK(single.amounts[0] == doctest::Approx(0.04).epsilon(1e-15));
  CHECK(*single.objective_value ==
        doctest::Approx(*solve(one, Objective::additive(), config_for(0.04)).objective_value)
            .epsilon(1e-12));

  const CurveSet two({"p", "q"}, Eigen::ArrayXd::Constant(2, 0.7),
                     Eigen::ArrayXd::Constant(2, 25.0));
  const Allocation split = grid_oracle(two, Objective::mult_offset(), config_for(0.04), 101);
  CHECK(split.amounts[0] == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(split.amounts[1] == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("grid oracle guards its resource budget") {
  const CurveSet curves = fixtures::fitted_curves();
  CHECK_THROWS_AS(
      grid_oracle(curves, Objective::additive(), config_for(0.01), 10),
      ValidationError);
  CHECK_THROWS_AS(
      grid_oracle(curves, Objective::additive(), config_for(0.01), 100001, 1000),
      ResourceError);
}

TEST_CASE("log-transform route agrees with the closed-form solver") {
  // Solve mult-offset as an additive problem over log g terms with numeric
  // marginal inversion, then compare per-phase amounts.
  rng::Xoshiro256StarStar stream(10);
  for (int trial = 0; trial < 25; ++trial) {
    const auto inst = oracles::random_instance(stream, 2 + trial % 3);
    const CurveSet curves = oracles::to_curve_set(inst);
    const Allocation direct = solve(curves, Objective::mult_offset(), config_for(inst.budget));

    oracles::NumericWaterFilling generic(
        static_cast<std::size_t>(curves.size()),
        [&](std::size_t i, double x) {
          const double a = inst.a[i], b = inst.b[i];
          const double decay = a * std::exp(-b * x);
          return b * decay / (1.0 - decay);  // d/dx log g(x)
        },
        inst.budget);
    const std::vector<double> log_route = generic.solve(inst.budget, 1e-13 * inst.budget);

    const double tol = 10.0 * config_for(inst.budget).effective_tolerance();
    for (Eigen::Index i = 0; i < curves.size(); ++i)
      CHECK(std::abs(direct.amounts[i] - log_route[static_cast<std::size_t>(i)]) <= tol);
  }
}

TEST_CASE("solver error paths") {
  CHECK_THROWS_AS(solve(CurveSet{}, Objective::additive(), config_for(1.0)), ValidationError);

  // A budget so large that lambda* underflows cannot be bracketed within the
  // 60-halving budget; the error carries the final bracket.
  const CurveSet steep({"p"}, Eigen::ArrayXd::Constant(1, 0.9),
                       Eigen::ArrayXd::Constant(1, 5000.0));
  CHECK_THROWS_AS(solve(steep, Objective::additive(), config_for(1.0)), SolverError);

  const CurveSet curves = fixtures::fitted_curves();
  SolveConfig config = config_for(fixtures::kBudget);
  config.budget_B = 0.0;
  CHECK_THROWS_AS(solve(curves, Objective::additive(), config), ValidationError);

  config = config_for(fixtures::kBudget);
  config.max_iterations = 1;
  config.tolerance = 1e-18;
  try {
    solve(curves, Objective::additive(), config);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.lambda_lo() > 0.0);
    CHECK(e.lambda_hi() > e.lambda_lo());
  }

  config = config_for(fixtures::kBudget);
  config.caps = Eigen::ArrayXd::Constant(3, 1.0);  // wrong length
  CHECK_THROWS_AS(solve(curves, Objective::additive(), config), ValidationError);
}

TEST_CASE("reallocate") {
  const CurveSet curves = fixtures::fitted_curves();
  const Objective obj = Objective::additive();

  SUBCASE("zero spend reproduces the one-shot solve") {
    const Allocation oneshot = solve(curves, obj, config_for(fixtures::kBudget));
    const Allocation redo = reallocate(curves, obj, 0.0, fixtures::kBudget);
    for (int i = 0; i < 4; ++i)
      CHECK(redo.amounts[i] == doctest::Approx(oneshot.amounts[i]).epsilon(1e-12));
  }

  SUBCASE("full spend returns the all-zero allocation") {
    const Allocation empty = reallocate(curves, obj, fixtures::kBudget, fixtures::kBudget);
    CHECK(empty.amounts.maxCoeff() == 0.0);
    CHECK(empty.budget_used == 0.0);
  }

  SUBCASE("partial spend re-solves the remaining phases") {
    const Allocation oneshot = solve(curves, obj, config_for(fixtures::kBudget));
    const double spent = oneshot.amounts[0] + oneshot.amounts[1];
    const CurveSet remaining = curves.tail(2);
    const Allocation redo = reallocate(remaining, obj, spent, fixtures::kBudget);
    REQUIRE(redo.lambda_star.has_value());

    // Two-phase marginal equalization at the re-solved point.
    for (Eigen::Index i = 0; i < 2; ++i) {
      if (redo.amounts[i] <= 0.0) continue;
      CHECK(objective_marginal(remaining.curve(i), redo.amounts[i], obj.kind) ==
            doctest::Approx(*redo.lambda_star).epsilon(1e-6));
    }

    // And it must beat the grid oracle over the remaining budget.
    const Allocation grid =
        grid_oracle(remaining, obj, config_for(fixtures::kBudget - spent), 401);
    CHECK(*redo.objective_value >= *grid.objective_value - 1e-12);

    // Restriction of the one-shot optimum re-solves to itself.
    CHECK(redo.amounts[0] == doctest::Approx(oneshot.amounts[2]).epsilon(1e-6));
    CHECK(redo.amounts[1] == doctest::Approx(oneshot.amounts[3]).epsilon(1e-6));
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(reallocate(curves, obj, 2.0, 1.0), ValidationError);
    CHECK_THROWS_AS(reallocate(curves, obj, -0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(reallocate(CurveSet{}, obj, 0.0, 1.0), ValidationError);
  }
}
