#include "eivpd/datagen.hpp"

#include "eivpd/errors.hpp"
#include "eivpd/rng.hpp"

#include <cmath>

namespace eivpd {

namespace {

// RNG stream ids within one dataset seed.
constexpr std::uint64_t kLatentStream = 1;
constexpr std::uint64_t kEpsStream = 2;
constexpr std::uint64_t kErrorStreamBase = 16;

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& cov)
{
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw InvalidSpec("target covariance must be a non-empty square matrix");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 0)
    throw InvalidSpec("target covariance not SPD (not symmetric)");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw InvalidSpec("target covariance not SPD");
  Eigen::MatrixXd L = llt.matrixL();
  if (!(L.diagonal().array() > 0).all())
    throw InvalidSpec("target covariance not SPD");
  return L;
}

Eigen::MatrixXd common_factor_cov(int K)
{
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(K, K);
  c.diagonal().setConstant(2.0);
  return c;
}

} // namespace

DesignCheck validate(const DesignSpec& spec)
{
  DesignCheck check;
  const int K = spec.K;
  if (K < 1 || K > 10)
    throw InvalidSpec("K must be in [1, 10]");
  if (spec.target_cov.rows() != K || spec.target_cov.cols() != K)
    throw InvalidSpec("target_cov must be K x K");
  if (spec.intercepts.size() != K + 1)
    throw InvalidSpec("intercepts must hold K + 1 values (alpha_1..alpha_K, alpha_Y)");
  if (spec.beta_true.size() != K)
    throw InvalidSpec("beta_true must hold K values");
  if (static_cast<int>(spec.meas_error_law.size()) != K)
    throw InvalidSpec("meas_error_law must hold one law per regressor");
  if (spec.n_obs < K + 2)
    throw InvalidSpec("n_obs must be at least K + 2");
  if (!spec.target_cov.allFinite() || !spec.intercepts.allFinite() ||
      !spec.beta_true.allFinite())
    throw InvalidSpec("design parameters must be finite");

  lower_cholesky(spec.target_cov);

  if (std::holds_alternative<CommonFactorExp>(spec.latent_law)) {
    if ((spec.target_cov - common_factor_cov(K)).cwiseAbs().maxCoeff() > 0)
      throw InvalidSpec("common_factor_exp fixes target_cov to 2 on the diagonal, 1 off it");
  } else if (const auto* t = std::get_if<StudentTLaw>(&spec.latent_law)) {
    if (t->df <= 2)
      throw InvalidSpec("t latent law needs df > 2 (finite variance)");
    check.heavy_tail_warning = t->df <= 4;
  } else if (is_point_mass(spec.latent_law)) {
    throw InvalidSpec("latent law must not be degenerate");
  }
  analytic_moments(spec.latent_law);

  for (const auto& law : spec.meas_error_law) {
    if (std::holds_alternative<CommonFactorExp>(law))
      throw InvalidSpec("common_factor_exp is not an error law");
    analytic_moments(law);
  }
  if (std::holds_alternative<CommonFactorExp>(spec.eps_law))
    throw InvalidSpec("common_factor_exp is not an error law");
  analytic_moments(spec.eps_law);
  return check;
}

void check_dataset(const Dataset& data)
{
  if (data.x.rows() != data.y.size())
    throw InvalidSpec("x and y must have the same number of rows");
  if (data.x.cols() < 1)
    throw InvalidSpec("dataset needs at least one regressor");
  if (!data.x.allFinite() || !data.y.allFinite())
    throw InvalidSpec("dataset contains non-finite entries");
}

Eigen::MatrixXd standardize_and_correlate(const Eigen::MatrixXd& raw,
                                          const Law& law,
                                          const Eigen::MatrixXd& target_cov)
{
  const LawMoments m = analytic_moments(law);
  if (!(m.variance > 0) || !std::isfinite(m.variance))
    throw InvalidSpec("law has no usable analytic variance");
  if (raw.cols() != target_cov.rows())
    throw InvalidSpec("raw draws and target_cov disagree on K");
  const Eigen::MatrixXd L = lower_cholesky(target_cov);
  const double sd = std::sqrt(m.variance);

  const Eigen::Index N = raw.rows();
  const Eigen::Index K = raw.cols();
  Eigen::MatrixXd z(N, K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index n = 0; n < N; ++n)
      z(n, k) = (raw(n, k) - m.mean) / sd;

  Eigen::MatrixXd out(N, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index n = 0; n < N; ++n) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j <= k; ++j)
        acc += L(k, j) * z(n, j);
      out(n, k) = acc;
    }
  }
  return out;
}

Dataset gen_dataset(const DesignSpec& spec)
{
  validate(spec);
  const int N = spec.n_obs;
  const int K = spec.K;

  Latent lat;
  lat.x_star.resize(N, K);
  lat.u.resize(N, K);
  lat.eps.resize(N);

  auto latent_rng = make_stream(spec.seed, kLatentStream);
  if (std::holds_alternative<CommonFactorExp>(spec.latent_law)) {
    // Z_0 first, then Z_1..Z_K, column by column.
    Eigen::MatrixXd z(N, K + 1);
    fill_draws(ExponentialLaw{ 1.0 }, latent_rng, { z.data(), static_cast<std::size_t>(z.size()) });
    for (int k = 0; k < K; ++k)
      lat.x_star.col(k) = z.col(k + 1) + z.col(0);
  } else {
    Eigen::MatrixXd raw(N, K);
    fill_draws(spec.latent_law, latent_rng, { raw.data(), static_cast<std::size_t>(raw.size()) });
    lat.x_star = standardize_and_correlate(raw, spec.latent_law, spec.target_cov);
  }

  for (int k = 0; k < K; ++k) {
    auto rng = make_stream(spec.seed, kErrorStreamBase + static_cast<std::uint64_t>(k));
    fill_draws(spec.meas_error_law[k], rng, { lat.u.col(k).data(), static_cast<std::size_t>(N) });
  }
  {
    auto rng = make_stream(spec.seed, kEpsStream);
    fill_draws(spec.eps_law, rng, { lat.eps.data(), static_cast<std::size_t>(N) });
  }

  Dataset data;
  data.x.resize(N, K);
  data.y.resize(N);
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n)
      data.x(n, k) = spec.intercepts[k] + lat.x_star(n, k) + lat.u(n, k);
  for (int n = 0; n < N; ++n) {
    double signal = 0.0;
    for (int k = 0; k < K; ++k)
      signal += spec.beta_true[k] * lat.x_star(n, k);
    data.y[n] = spec.intercepts[K] + signal + lat.eps[n];
  }
  data.latent = std::move(lat);
  return data;
}

DesignSpec table1_design(int design, bool with_error, int n_obs, std::uint64_t seed)
{
  DesignSpec s;
  s.K = 2;
  switch (design) {
    case 1:
      s.latent_law = BetaLaw{ 1.0, 2.0 };
      break;
    case 2:
      s.latent_law = ChiSquareLaw{ 5.0 };
      break;
    case 3:
      s.latent_law = StudentTLaw{ 5.0 };
      break;
    default:
      throw InvalidSpec("design must be 1, 2 or 3");
  }
  s.target_cov = common_factor_cov(2);
  s.intercepts = Eigen::Vector3d(1.0, 1.0, 1.0);
  s.beta_true = Eigen::Vector2d(1.0, 1.0);
  const Law err = with_error ? Law{ NormalLaw{ 0.0, 1.0 } } : Law{ PointMass{ 0.0 } };
  s.meas_error_law = { err, err };
  s.eps_law = NormalLaw{ 0.0, 1.0 };
  s.n_obs = n_obs;
  s.seed = seed;
  return s;
}

DesignSpec t10_design(bool with_error, int n_obs, std::uint64_t seed)
{
  DesignSpec s = table1_design(3, with_error, n_obs, seed);
  s.latent_law = StudentTLaw{ 10.0 };
  return s;
}

DesignSpec common_factor_design(bool with_error, int n_obs, std::uint64_t seed)
{
  DesignSpec s = table1_design(1, with_error, n_obs, seed);
  s.latent_law = CommonFactorExp{};
  return s;
}

DesignSpec normal_design(bool with_error, int n_obs, std::uint64_t seed)
{
  DesignSpec s = table1_design(1, with_error, n_obs, seed);
  s.latent_law = NormalLaw{ 0.0, 1.0 };
  return s;
}

DesignSpec preset_design(const std::string& name, bool with_error, int n_obs,
                         std::uint64_t seed)
{
  if (name == "design1")
    return table1_design(1, with_error, n_obs, seed);
  if (name == "design2")
    return table1_design(2, with_error, n_obs, seed);
  if (name == "design3")
    return table1_design(3, with_error, n_obs, seed);
  if (name == "t10")
    return t10_design(with_error, n_obs, seed);
  if (name == "common_factor")
    return common_factor_design(with_error, n_obs, seed);
  if (name == "normal")
    return normal_design(with_error, n_obs, seed);
  throw InvalidSpec("unknown design preset: " + name);
}

Eigen::VectorXd ols_plim(const DesignSpec& spec)
{
  validate(spec);
  Eigen::MatrixXd sum = spec.target_cov;
  for (int k = 0; k < spec.K; ++k)
    sum(k, k) += analytic_moments(spec.meas_error_law[k]).variance;
  return sum.ldlt().solve(spec.target_cov * spec.beta_true);
}

} // namespace eivpd
