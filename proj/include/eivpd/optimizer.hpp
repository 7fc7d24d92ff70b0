#pragma once

#include "eivpd/objective.hpp"
#include "eivpd/report.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace eivpd {

//! Compact search box B = prod_k [lo_k, hi_k].
struct Bounds
{
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  bool contains(const Eigen::VectorXd& b) const;
  //! Folds b back into the box by mirror reflection at the faces.
  Eigen::VectorXd reflect(Eigen::VectorXd b) const;
};

struct SearchConfig
{
  //! Empty: derived from OLS as b_ols -/+ (5 |b_ols| + 1).
  std::optional<Bounds> bounds;
  //! Empty: OLS, OLS -/+ 0.5 e_k, and `random_starts` uniform draws in B.
  std::vector<Eigen::VectorXd> starts;
  int random_starts = 1;
  std::uint64_t seed = 0;
  double tol_x = 1e-6;
  double tol_f = 1e-10;
  int max_iter = 2000;
  double initial_step = 0.25; // simplex edge, capped at a quarter of the box
  int restarts = 1;           // fresh simplexes around each terminal point
  int probe_points = 8;       // random points for the flat-objective check
  int threads = 1;
};

//! Objective to maximize. Return -inf where the point is infeasible
//! (e.g. trimmed grid); NaN aborts the current start.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

//! One bounded Nelder-Mead run (maximization).
struct LocalSearchResult
{
  Eigen::VectorXd x;
  double value = 0.0;
  int n_evals = 0;
  int iterations = 0;
  bool converged = false;
  bool aborted = false;
  bool small_simplex = false; // diameter < tol_x
  bool small_spread = false;  // objective spread < tol_f
};

LocalSearchResult nelder_mead_maximize(const ObjectiveFn& f,
                                       const Eigen::VectorXd& start,
                                       const Bounds& bounds,
                                       const SearchConfig& cfg);

//! Multistart maximization of an arbitrary objective. cfg.bounds and
//! cfg.starts must be set. Throws OptimizationFailed when no start produces
//! a finite value.
EstimateReport maximize_function(const ObjectiveFn& f, const SearchConfig& cfg);

//! The PD estimate: argmax of Q_N over B.
EstimateReport maximize(const Dataset& data, const ObjectiveSpec& spec, SearchConfig cfg);

//! Box derived from an OLS slope vector.
Bounds default_bounds(const Eigen::VectorXd& b_ols);
//! OLS point, its 2K axis perturbations by +/-0.5 and random draws in B.
std::vector<Eigen::VectorXd> default_starts(const Eigen::VectorXd& b_ols,
                                            const Bounds& bounds,
                                            int random_starts,
                                            std::uint64_t seed);

//! Best node of a per_axis^K lattice spanning the box (first in
//! lexicographic order among ties).
Eigen::VectorXd grid_refine(const ObjectiveFn& f, const Bounds& box, int per_axis);
Eigen::VectorXd grid_refine(const Dataset& data,
                            const ObjectiveSpec& spec,
                            const Bounds& box,
                            int per_axis);

} // namespace eivpd
