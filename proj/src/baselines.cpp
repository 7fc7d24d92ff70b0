#include "eivpd/baselines.hpp"

#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace eivpd {

namespace {

Eigen::MatrixXd demeaned(const Eigen::MatrixXd& m)
{
  return m.rowwise() - m.colwise().mean();
}

} // namespace

EstimateReport ols(const Dataset& data)
{
  check_dataset(data);
  const int N = data.n();
  const int K = data.k();
  if (N < K + 1)
    throw SingularDesign("OLS needs more observations than coefficients");

  Eigen::MatrixXd design(N, K + 1);
  design.col(0).setOnes();
  design.rightCols(K) = data.x;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < K + 1)
    throw SingularDesign("OLS design matrix is rank deficient");
  const Eigen::VectorXd coef = qr.solve(data.y);

  EstimateReport r;
  r.method = Method::OLS;
  r.b_hat = coef.tail(K);
  r.objective_at_opt = std::numeric_limits<double>::quiet_NaN();
  r.converged = true;
  r.start_used = Eigen::VectorXd::Zero(K);
  r.diagnostics["intercept"] = format_double(coef[0]);
  return r;
}

Eigen::MatrixXd build_instruments(const Dataset& data, const IvSpec& spec)
{
  check_dataset(data);
  const int N = data.n();
  const int K = data.k();
  if (N < 10)
    throw InsufficientData("instrument construction needs N >= 10");

  const Eigen::MatrixXd xt = demeaned(data.x);
  const Eigen::VectorXd yt = data.y.array() - data.y.mean();

  // Column j < K is x_j, column K is y; covariances with divisor N.
  Eigen::MatrixXd v(N, K + 1);
  v.leftCols(K) = xt;
  v.col(K) = yt;
  const Eigen::MatrixXd cov = (v.transpose() * v) / static_cast<double>(N);

  std::vector<Eigen::VectorXd> cols;
  auto triple = [&](int a, int b, int c) {
    Eigen::VectorXd z = v.col(a).cwiseProduct(v.col(b)).cwiseProduct(v.col(c));
    z -= v.col(a) * cov(b, c) + v.col(b) * cov(a, c) + v.col(c) * cov(a, b);
    cols.push_back(std::move(z));
  };

  if (spec.instrument_kind == IvSpec::Kind::C3) {
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j)
        cols.push_back(xt.col(i).cwiseProduct(xt.col(j)));
    for (int k = 0; k < K; ++k)
      cols.push_back(xt.col(k).cwiseProduct(yt));
  } else {
    for (int i = 0; i < K; ++i)
      for (int j = i; j < K; ++j)
        for (int l = j; l < K; ++l)
          if (!(i == j && j == l))
            triple(i, j, l);
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j)
        triple(i, j, K);
  }

  Eigen::MatrixXd z(N, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    z.col(static_cast<Eigen::Index>(c)) = cols[c];
  return z;
}

EstimateReport iv_estimate(const Dataset& data, const IvSpec& spec)
{
  if (!(spec.ridge >= 0))
    throw InvalidSpec("ridge must be nonnegative");
  const int N = data.n();
  const int K = data.k();
  const Eigen::MatrixXd z = demeaned(build_instruments(data, spec));
  const int m = static_cast<int>(z.cols());
  if (m < K)
    throw Underidentified("fewer instruments (" + std::to_string(m) + ") than regressors (" +
                          std::to_string(K) + ")");

  const Eigen::MatrixXd xt = demeaned(data.x);
  const Eigen::VectorXd yt = data.y.array() - data.y.mean();

  Eigen::MatrixXd gram = z.transpose() * z;
  const Eigen::MatrixXd cross = z.transpose() * xt; // m x K
  const Eigen::VectorXd zy = z.transpose() * yt;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double emax = eig.eigenvalues().maxCoeff();
  const double emin = eig.eigenvalues().minCoeff();
  const bool ridged = !(emin > 0) || emax / emin > 1e12;
  if (ridged)
    gram.diagonal().array() += spec.ridge * std::max(gram.trace() / m, 1.0);

  const Eigen::LDLT<Eigen::MatrixXd> gram_solver(gram);
  const Eigen::MatrixXd w_cross = gram_solver.solve(cross); // G^-1 A
  const Eigen::MatrixXd normal = cross.transpose() * w_cross; // A' G^-1 A
  const Eigen::VectorXd rhs = w_cross.transpose() * zy;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> solver(normal);
  if (solver.rank() < K)
    throw SingularDesign("instrument/regressor cross-moment matrix is rank deficient");
  const Eigen::VectorXd b = solver.solve(rhs);

  // First-stage strength: smallest singular value of Z'X, a robust rank
  // statistic (that singular value over its delta-method standard error) and
  // the Cragg-Donald minimum-eigenvalue statistic, reported only.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues()[K - 1];
  const Eigen::VectorXd g =
    (z * svd.matrixU().col(K - 1)).cwiseProduct(xt * svd.matrixV().col(K - 1));
  const double g_var = (g.array() - g.mean()).square().mean();
  const double rank_t = smin / std::sqrt(static_cast<double>(N) * g_var);
  const Eigen::MatrixXd resid = xt - z * w_cross;
  const double dof = std::max(1, N - m);
  const Eigen::MatrixXd svv = (resid.transpose() * resid) / dof;
  double cragg_donald = std::numeric_limits<double>::quiet_NaN();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(normal, svv, Eigen::EigenvaluesOnly);
  if (gen.info() == Eigen::Success)
    cragg_donald = gen.eigenvalues().minCoeff() / m;

  EstimateReport r;
  r.method = spec.instrument_kind == IvSpec::Kind::C3 ? Method::C3 : Method::C4;
  r.b_hat = b;
  r.objective_at_opt = std::numeric_limits<double>::quiet_NaN();
  r.converged = b.allFinite();
  r.start_used = Eigen::VectorXd::Zero(K);
  r.weak_instrument = smin < 1e-3 * N || !(rank_t >= 2.0);
  r.diagnostics["n_instruments"] = std::to_string(m);
  r.diagnostics["min_singular_cross_moment"] = format_double(smin);
  r.diagnostics["rank_t"] = format_double(rank_t);
  r.diagnostics["cragg_donald"] = format_double(cragg_donald);
  r.diagnostics["ridge_applied"] = ridged ? "true" : "false";
  return r;
}

} // namespace eivpd
