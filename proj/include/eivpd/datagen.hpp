#pragma once

#include "eivpd/laws.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eivpd {

//! Full description of a simulation design.
struct DesignSpec
{
  int K = 2;
  Law latent_law = NormalLaw{};
  Eigen::MatrixXd target_cov;    // K x K, SPD
  Eigen::VectorXd intercepts;    // alpha_1..alpha_K, alpha_Y (K + 1 entries)
  Eigen::VectorXd beta_true;     // K entries
  std::vector<Law> meas_error_law; // one per regressor; PointMass{0} = none
  Law eps_law = NormalLaw{};
  int n_obs = 1000;
  std::uint64_t seed = 1;
};

//! Result of validating a DesignSpec. Hard violations throw; soft ones are
//! reported here.
struct DesignCheck
{
  bool heavy_tail_warning = false; // t with 2 < df <= 4
};

//! Throws InvalidSpec on any hard violation.
DesignCheck validate(const DesignSpec& spec);

//! Latent draws retained for synthetic datasets.
struct Latent
{
  Eigen::MatrixXd x_star; // N x K, without intercepts
  Eigen::MatrixXd u;      // N x K
  Eigen::VectorXd eps;    // N
};

//! Observed sample (x, y), optionally with the latent draws that built it.
struct Dataset
{
  Eigen::MatrixXd x; // N x K
  Eigen::VectorXd y; // N
  std::optional<Latent> latent;

  int n() const { return static_cast<int>(y.size()); }
  int k() const { return static_cast<int>(x.cols()); }
};

//! Throws InvalidSpec on size mismatch or non-finite entries.
void check_dataset(const Dataset& data);

//! Centers and scales each raw column with the law's analytic mean and
//! variance, then maps every row z to L z with L the lower Cholesky factor of
//! target_cov. The population covariance of the result is target_cov.
Eigen::MatrixXd standardize_and_correlate(const Eigen::MatrixXd& raw,
                                          const Law& law,
                                          const Eigen::MatrixXd& target_cov);

//! Draws one dataset; bit-identical for identical specs.
//!
//! X_k = alpha_k + X*_k + U_k and Y = alpha_Y + sum_k beta_k X*_k + eps, with
//! U_1..U_K, eps and X* drawn from independent RNG streams of spec.seed.
//! For CommonFactorExp, X*_k = Z_k + Z_0 (Z iid Exp(1)) and target_cov must
//! equal the implied covariance (2 on the diagonal, 1 off it).
Dataset gen_dataset(const DesignSpec& spec);

// --- presets -------------------------------------------------------------

//! The three regressor laws of the comparison study: 1 = beta(1,2),
//! 2 = chisq(5), 3 = t(5). Var 2, cov 1, beta = (1,1), intercepts (1,1,1),
//! eps ~ N(0,1), U_k ~ N(0,1) when with_error.
DesignSpec table1_design(int design, bool with_error, int n_obs, std::uint64_t seed);

//! t(10) variant used for the near-normal curve check.
DesignSpec t10_design(bool with_error, int n_obs, std::uint64_t seed);

//! CommonFactorExp latent design with eps ~ N(0,1) and optional N(0,1) errors.
DesignSpec common_factor_design(bool with_error, int n_obs, std::uint64_t seed);

//! Jointly normal latent regressors (var 2, cov 1).
DesignSpec normal_design(bool with_error, int n_obs, std::uint64_t seed);

//! Looks up a preset by name: design1, design2, design3, t10, common_factor,
//! normal.
DesignSpec preset_design(const std::string& name, bool with_error, int n_obs,
                         std::uint64_t seed);

//! Analytic OLS probability limit (Sxx + Suu)^-1 Sxx beta.
Eigen::VectorXd ols_plim(const DesignSpec& spec);

} // namespace eivpd
