#include "eivpd/baselines.hpp"
#include "eivpd/errors.hpp"
#include "eivpd/optimizer.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace eivpd;

namespace {

ObjectiveFn quadratic(Eigen::Vector2d c)
{
  return [c](const Eigen::VectorXd& b) { return -(b - c).squaredNorm(); };
}

Bounds box(double lo, double hi)
{
  return { Eigen::Vector2d::Constant(lo), Eigen::Vector2d::Constant(hi) };
}

} // namespace

TEST_CASE("bounds: containment and mirror reflection")
{
  const Bounds b = box(0.0, 2.0);
  CHECK(b.contains(Eigen::Vector2d(0.0, 2.0)));
  CHECK_FALSE(b.contains(Eigen::Vector2d(-0.1, 1.0)));
  CHECK_FALSE(b.contains(Eigen::Vector3d(1, 1, 1)));
  const Eigen::VectorXd r = b.reflect(Eigen::Vector2d(2.5, -0.5));
  CHECK(r[0] == doctest::Approx(1.5));
  CHECK(r[1] == doctest::Approx(0.5));
  const Eigen::VectorXd far = b.reflect(Eigen::Vector2d(7.0, -9.0));
  CHECK(b.contains(far));
  CHECK(far[0] == doctest::Approx(1.0));
  CHECK(far[1] == doctest::Approx(1.0));
  CHECK(b.reflect(Eigen::Vector2d(0.3, 1.7)) == Eigen::Vector2d(0.3, 1.7));
}

TEST_CASE("Nelder-Mead finds the optimum of a quadratic stub")
{
  SearchConfig cfg;
  cfg.bounds = box(-3.0, 3.0);
  cfg.starts = { Eigen::Vector2d(-2.0, 2.5), Eigen::Vector2d(0.0, 0.0) };
  const EstimateReport r = maximize_function(quadratic({ 1.0, 1.0 }), cfg);
  CHECK(r.converged);
  CHECK((r.b_hat - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() < 10 * cfg.tol_x);
  CHECK(r.objective_at_opt >= -1e-10);
  CHECK_FALSE(r.flat_objective);
  CHECK(r.n_evals > 0);
}

TEST_CASE("optimum on the boundary stays inside the box")
{
  SearchConfig cfg;
  cfg.bounds = box(0.0, 2.0);
  cfg.starts = { Eigen::Vector2d(1.0, 1.0) };
  const EstimateReport r = maximize_function(quadratic({ 3.0, 1.0 }), cfg);
  CHECK(cfg.bounds->contains(r.b_hat));
  CHECK(r.b_hat[0] == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r.b_hat[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("best start wins and the objective beats every start")
{
  // Two separated bumps; the taller one is at (2, 2).
  const ObjectiveFn f = [](const Eigen::VectorXd& b) {
    const double a = (b - Eigen::Vector2d(-2, -2)).squaredNorm();
    const double c = (b - Eigen::Vector2d(2, 2)).squaredNorm();
    return std::exp(-a) + 2.0 * std::exp(-c);
  };
  SearchConfig cfg;
  cfg.bounds = box(-4.0, 4.0);
  cfg.starts = { Eigen::Vector2d(-2.2, -1.9), Eigen::Vector2d(1.5, 2.4) };
  const EstimateReport r = maximize_function(f, cfg);
  CHECK(r.b_hat[0] == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r.start_used == cfg.starts[1]);
  for (const auto& s : cfg.starts)
    CHECK(r.objective_at_opt >= f(s));
}

TEST_CASE("flat objective is reported")
{
  SearchConfig cfg;
  cfg.bounds = box(-1.0, 1.0);
  cfg.starts = { Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(-0.5, 0.1) };
  const EstimateReport r = maximize_function([](const Eigen::VectorXd&) { return -2.0; }, cfg);
  CHECK(r.flat_objective);
  // Tie-break: lexicographically smallest terminal point among equal values.
  CHECK(r.start_used == cfg.starts[1]);
}

TEST_CASE("infeasible and invalid configurations")
{
  SearchConfig cfg;
  cfg.bounds = box(-1.0, 1.0);
  cfg.starts = { Eigen::Vector2d(0.0, 0.0) };
  const ObjectiveFn never = [](const Eigen::VectorXd&) { return -INFINITY; };
  CHECK_THROWS_AS(maximize_function(never, cfg), OptimizationFailed);
  const ObjectiveFn nan = [](const Eigen::VectorXd&) { return std::nan(""); };
  CHECK_THROWS_AS(maximize_function(nan, cfg), OptimizationFailed);

  SearchConfig outside = cfg;
  outside.starts = { Eigen::Vector2d(2.0, 0.0) };
  CHECK_THROWS_AS(maximize_function(quadratic({ 0, 0 }), outside), InvalidSpec);

  SearchConfig inverted = cfg;
  inverted.bounds = Bounds{ Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 2) };
  CHECK_THROWS_AS(maximize_function(quadratic({ 0, 0 }), inverted), InvalidSpec);

  SearchConfig none = cfg;
  none.starts.clear();
  CHECK_THROWS_AS(maximize_function(quadratic({ 0, 0 }), none), InvalidSpec);
}

TEST_CASE("a start whose objective is NaN is abandoned, others continue")
{
  const ObjectiveFn f = [](const Eigen::VectorXd& b) {
    return b[0] < -0.5 ? std::nan("") : -(b - Eigen::Vector2d(0.5, 0.5)).squaredNorm();
  };
  SearchConfig cfg;
  cfg.bounds = box(-1.0, 1.0);
  cfg.starts = { Eigen::Vector2d(-0.9, 0.0), Eigen::Vector2d(0.2, 0.2) };
  const EstimateReport r = maximize_function(f, cfg);
  CHECK(r.b_hat[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r.diagnostics.at("aborted_starts") == "1");
}

TEST_CASE("grid_refine on stubs")
{
  const Eigen::VectorXd best = grid_refine(quadratic({ 0.3, -0.7 }), box(-1.0, 1.0), 5);
  CHECK(best[0] == doctest::Approx(0.5));
  CHECK(best[1] == doctest::Approx(-0.5));
  CHECK_THROWS_AS(grid_refine(quadratic({ 0, 0 }), box(-1, 1), 2), InvalidSpec);
}

TEST_CASE("grid_refine on noiseless data lands on the truth")
{
  const Dataset d = gen_dataset(test::noiseless_design(500, 3));
  const Eigen::VectorXd best = grid_refine(d, ObjectiveSpec{}, box(0.0, 2.0), 3);
  CHECK(best == Eigen::Vector2d(1.0, 1.0));
}

TEST_CASE("PD estimate on noiseless data recovers the truth")
{
  const Dataset d = gen_dataset(test::noiseless_design(1000, 8));
  SearchConfig cfg;
  cfg.bounds = box(0.0, 2.0);
  cfg.starts = { Eigen::Vector2d(0.6, 1.5), Eigen::Vector2d(1.0, 1.0) };
  const EstimateReport r = maximize(d, ObjectiveSpec{}, cfg);
  CHECK(r.objective_at_opt >= -cfg.tol_f);
  CHECK((r.b_hat - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(r.method == Method::PD);
}

TEST_CASE("default bounds and starts follow OLS")
{
  const Eigen::Vector2d b_ols(0.8, -0.2);
  const Bounds b = default_bounds(b_ols);
  CHECK(b.lo[0] == doctest::Approx(0.8 - 5.0));
  CHECK(b.hi[1] == doctest::Approx(-0.2 + 2.0));
  const auto starts = default_starts(b_ols, b, 1, 9);
  REQUIRE(starts.size() == 6);
  CHECK(starts[0] == b_ols);
  CHECK(starts[1][0] == doctest::Approx(0.3));
  CHECK(starts[1][1] == -0.2);
  for (const auto& s : starts)
    CHECK(b.contains(s));
  CHECK(default_starts(b_ols, b, 1, 9)[5] == starts[5]);
}

TEST_CASE("PD estimate is deterministic and uses OLS defaults")
{
  const Dataset d = gen_dataset(table1_design(2, true, 1000, 12));
  const EstimateReport a = maximize(d, ObjectiveSpec{}, SearchConfig{});
  const EstimateReport b = maximize(d, ObjectiveSpec{}, SearchConfig{});
  CHECK(a.b_hat == b.b_hat);
  CHECK(a.objective_at_opt == b.objective_at_opt);
  CHECK(a.n_evals == b.n_evals);
  CHECK(a.start_used == b.start_used);
  CHECK(a.converged);
  CHECK(std::abs(a.b_hat[0] - 1.0) < 0.5);

  const Objective obj(d, ObjectiveSpec{});
  const Eigen::VectorXd b_ols = ols(d).b_hat;
  const Bounds box_ols = default_bounds(b_ols);
  CHECK(box_ols.contains(a.b_hat));
  for (const auto& s : default_starts(b_ols, box_ols, 1, 0))
    CHECK(a.objective_at_opt >= obj.evaluate(s).value);
}

TEST_CASE("PD estimate is location invariant")
{
  const Dataset d = gen_dataset(table1_design(1, true, 1000, 31));
  const Dataset s = test::shifted(d, Eigen::Vector2d(5.0, -3.0), 12.0);
  const EstimateReport a = maximize(d, ObjectiveSpec{}, SearchConfig{});
  const EstimateReport b = maximize(s, ObjectiveSpec{}, SearchConfig{});
  CHECK((a.b_hat - b.b_hat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("PD estimate is scale equivariant on noiseless data")
{
  Dataset d = gen_dataset(test::noiseless_design(1000, 41));
  d.x.col(0) *= 2.0;
  d.latent.reset();
  SearchConfig cfg;
  cfg.bounds = box(0.0, 2.0);
  cfg.starts = { Eigen::Vector2d(0.5, 1.0), Eigen::Vector2d(0.8, 0.8) };
  const EstimateReport r = maximize(d, ObjectiveSpec{}, cfg);
  CHECK(r.b_hat[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(r.b_hat[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("PD estimate rejects tiny samples")
{
  Dataset d = gen_dataset(table1_design(1, true, 4, 1));
  d.x.conservativeResize(3, 2);
  d.y.conservativeResize(3);
  d.latent.reset();
  CHECK_THROWS_AS(maximize(d, ObjectiveSpec{}, SearchConfig{}), InsufficientData);
}
