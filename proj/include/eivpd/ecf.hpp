#pragma once

#include "eivpd/datagen.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace eivpd {

using cplx = std::complex<double>;

//! Selects one observed variable: a regressor X_k (0-based) or the outcome Y.
class Var
{
public:
  static constexpr Var x(int k) { return Var(k); }
  static constexpr Var y() { return Var(-1); }

  constexpr bool is_y() const { return k_ < 0; }
  constexpr int index() const { return k_; }
  //! Column slot in a (K+1)-wide table whose last column is Y.
  constexpr int slot(int K) const { return is_y() ? K : k_; }
  std::string label() const;

  friend constexpr bool operator==(Var, Var) = default;

private:
  constexpr explicit Var(int k) : k_(k) {}
  int k_;
};

struct VarPair
{
  Var first;
  Var second;
  std::string label() const { return first.label() + ":" + second.label(); }
  friend constexpr bool operator==(const VarPair&, const VarPair&) = default;
};

//! Residual pairs in canonical order: (x_i, x_j) for i < j, then (x_k, y).
//! K(K-1)/2 + K entries.
std::vector<VarPair> residual_pairs(int K);

//! Complex ECF sums at one frequency vector s:
//!   s0       = (1/N) sum_n e^{i t_n}
//!   s1[a]    = (1/N) sum_n A_n e^{i t_n}
//!   s2[a, b] = (1/N) sum_n A_n B_n e^{i t_n}
//! over A, B in {X_1..X_K, Y} (Y is the last slot) and t_n = <(X_n, Y_n), s>.
struct WeightedEcfSums
{
  cplx s0;
  Eigen::VectorXcd s1; // K + 1
  Eigen::MatrixXcd s2; // (K + 1) x (K + 1), symmetric
};

//! Precomputed per-observation table of 1, A_n and A_n B_n, reused across
//! frequencies. Sums are formed blockwise and reduced pairwise in a fixed
//! order, so results do not depend on threading.
class EcfKernel
{
public:
  explicit EcfKernel(const Dataset& data);

  int n() const { return n_; }
  int k() const { return k_; }

  //! Sums along the estimation line s = (b_1 u, ..., b_K u, -u), i.e.
  //! t_n = u (sum_k b_k X_kn - Y_n).
  WeightedEcfSums along_line(const Eigen::VectorXd& b, double u) const;

  //! Sums at an arbitrary frequency vector s of length K + 1.
  WeightedEcfSums at(const Eigen::VectorXd& s) const;

  //! Sums for every u in `us`, sharing the projection v_n = b.X_n - Y_n.
  std::vector<WeightedEcfSums> along_line(const Eigen::VectorXd& b,
                                          const std::vector<double>& us) const;

private:
  WeightedEcfSums accumulate(const std::vector<double>& phase) const;
  WeightedEcfSums unpack(const std::vector<double>& re,
                         const std::vector<double>& im) const;

  int n_;
  int k_;
  int width_;                 // 1 + (K+1) + (K+1)(K+2)/2
  std::vector<double> table_; // row-major n_ x width_
  Eigen::MatrixXd cols_;      // N x (K+1), last column Y
};

WeightedEcfSums weighted_sums(const Dataset& data, const Eigen::VectorXd& b, double u);
WeightedEcfSums weighted_sums_at(const Dataset& data, const Eigen::VectorXd& s);

//! Estimated second-order partial derivative of the observed LCF.
struct PdEstimate
{
  cplx value;
  VarPair pair;
  double at_u = 0.0;
  double denom_mag = 0.0; // |s0|
};

//! s1(a) s1(b) / s0^2 - s2(a, b) / s0. Throws DenominatorUnderflow when
//! |s0| < denom_floor or s0 == 0. `at_u` is recorded only.
PdEstimate pd_hat(const WeightedEcfSums& sums,
                  VarPair pair,
                  double denom_floor = 0.0,
                  double at_u = 0.0);

//! Plug-in covariance with divisor N. Throws InsufficientData when N < 2.
double sample_cov(const Dataset& data, Var a, Var b);

//! All plug-in covariances as a (K+1) x (K+1) matrix (Y last). Computed from
//! the u = 0 sums, so cov + pd_hat at the origin is exactly zero.
Eigen::MatrixXd sample_cov_matrix(const Dataset& data);
Eigen::MatrixXd sample_cov_matrix(const EcfKernel& kernel);

} // namespace eivpd
