#pragma once

#include "eivpd/datagen.hpp"
#include "eivpd/ecf.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace eivpd {

//! Pointwise quantiles of one pair's curve at one node.
struct CurveBand
{
  double q_lo_re, q50_re, q_hi_re;
  double q_lo_im, q50_im, q_hi_im;
  int n_reps; // replications contributing (0 on truncated nodes)
};

//! Second-derivative curves along s = (u, ..., u, 0) across replications.
struct DerivativeCurveSet
{
  std::vector<double> u_grid;
  std::vector<VarPair> pairs;
  //! values[p][r][j]: pair p, replication r, node j.
  std::vector<std::vector<std::vector<cplx>>> values;
  //! Node j is truncated when |s0| fell below the floor in any replication.
  std::vector<bool> truncated;
  //! bands[p][j], computed at levels (lower, 0.5, upper).
  std::vector<std::vector<CurveBand>> bands;
  double lower = 0.05;
  double upper = 0.95;
  int reps = 0;
};

struct CurveOptions
{
  int reps = 100;
  std::vector<double> u_grid; // empty: 41 nodes on [-1, 1]
  double denom_floor = 0.05;
  double lower = 0.05;
  double upper = 0.95;
  int threads = 1;
};

std::vector<double> default_curve_grid();

//! Draws `reps` datasets (seed derive_seed(design.seed, r)) and evaluates
//! pd_hat for every residual pair at s = (u 1_K, 0). Requires reps >= 20.
DerivativeCurveSet curve_bands(const DesignSpec& design, const CurveOptions& opts);

//! Recomputes the bands of `curves` at other quantile levels.
void compute_bands(DerivativeCurveSet& curves, double lower, double upper);

struct PairVerdict
{
  VarPair pair;
  bool variation = false;
  //! max_u q_lo - min_u q_hi for the real and imaginary parts; positive
  //! means no constant fits inside the band.
  double margin_re = 0.0;
  double margin_im = 0.0;
  double margin() const { return std::max(margin_re, margin_im); }
};

//! Band-envelope test: "variation" iff no horizontal line lies within the
//! band at every non-truncated node, for the real or imaginary part.
std::vector<PairVerdict> constant_fit_check(const DerivativeCurveSet& curves);

//! Observational-equivalence construction: X~* = X* + U, U~ = 0,
//! eps~ = eps + sum_k beta_k (X*_k (1 - c_k) - c_k U_k), beta~ = c beta.
struct EquivalenceReport
{
  Eigen::VectorXd c;
  Eigen::VectorXd beta_tilde;
  int n = 0;
  double max_abs_diff_x = 0.0;
  double max_abs_diff_y = 0.0;
  double tolerance = 0.0; // rounding bound used for exact_match
  bool exact_match = false;
  double corr_xstar1_eps = 0.0; // corr(X~*_1, eps~)
  double corr_threshold = 0.0;  // 4 / sqrt(N)
  bool dependence_detected = false;
  Dataset base;  // observables of the original model
  Dataset tilde; // observables rebuilt from the tilde model
};

//! Throws InvalidScaling when some c_k is 0 or 1, and InvalidSpec when the
//! base design has neither measurement error nor a nondegenerate eps.
EquivalenceReport equivalence_demo(const DesignSpec& base, const Eigen::VectorXd& c);

} // namespace eivpd
