#include "eivpd/diagnostics.hpp"

#include "eivpd/errors.hpp"
#include "eivpd/parallel.hpp"
#include "eivpd/rng.hpp"
#include "eivpd/stats.hpp"

#include <cmath>
#include <limits>

namespace eivpd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

std::vector<double> default_curve_grid()
{
  std::vector<double> grid(41);
  for (int j = 0; j < 41; ++j)
    grid[j] = (j - 20) / 20.0;
  return grid;
}

DerivativeCurveSet curve_bands(const DesignSpec& design, const CurveOptions& opts)
{
  if (opts.reps < 20)
    throw InvalidSpec("curve bands need at least 20 replications");
  if (!(opts.lower >= 0 && opts.lower < 0.5 && opts.upper > 0.5 && opts.upper <= 1))
    throw InvalidSpec("band levels must satisfy 0 <= lower < 0.5 < upper <= 1");
  validate(design);

  DerivativeCurveSet out;
  out.u_grid = opts.u_grid.empty() ? default_curve_grid() : opts.u_grid;
  out.pairs = residual_pairs(design.K);
  out.reps = opts.reps;
  const int J = static_cast<int>(out.u_grid.size());
  const int P = static_cast<int>(out.pairs.size());
  if (J == 0)
    throw InvalidSpec("curve grid is empty");

  out.values.assign(P, std::vector<std::vector<cplx>>(opts.reps, std::vector<cplx>(J)));
  std::vector<std::vector<char>> underflow(opts.reps, std::vector<char>(J, 0));

  parallel_for(opts.reps, opts.threads, [&](int r) {
    DesignSpec spec = design;
    spec.seed = derive_seed(design.seed, static_cast<std::uint64_t>(r));
    const EcfKernel kernel(gen_dataset(spec));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(design.K + 1);
    for (int j = 0; j < J; ++j) {
      s.head(design.K).setConstant(out.u_grid[j]);
      const WeightedEcfSums sums = kernel.at(s);
      for (int p = 0; p < P; ++p) {
        try {
          out.values[p][r][j] = pd_hat(sums, out.pairs[p], opts.denom_floor, out.u_grid[j]).value;
        } catch (const DenominatorUnderflow&) {
          out.values[p][r][j] = { kNaN, kNaN };
          underflow[r][j] = 1;
        }
      }
    }
  });

  out.truncated.assign(J, false);
  for (int r = 0; r < opts.reps; ++r)
    for (int j = 0; j < J; ++j)
      if (underflow[r][j])
        out.truncated[j] = true;

  compute_bands(out, opts.lower, opts.upper);
  return out;
}

void compute_bands(DerivativeCurveSet& curves, double lower, double upper)
{
  curves.lower = lower;
  curves.upper = upper;
  const std::size_t P = curves.pairs.size();
  const std::size_t J = curves.u_grid.size();
  curves.bands.assign(P, std::vector<CurveBand>(J));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t j = 0; j < J; ++j) {
      CurveBand& band = curves.bands[p][j];
      if (curves.truncated[j]) {
        band = { kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, 0 };
        continue;
      }
      std::vector<double> re, im;
      re.reserve(curves.values[p].size());
      im.reserve(curves.values[p].size());
      for (const auto& rep : curves.values[p]) {
        re.push_back(rep[j].real());
        im.push_back(rep[j].imag());
      }
      band.q_lo_re = quantile(re, lower);
      band.q50_re = quantile(re, 0.5);
      band.q_hi_re = quantile(re, upper);
      band.q_lo_im = quantile(im, lower);
      band.q50_im = quantile(im, 0.5);
      band.q_hi_im = quantile(im, upper);
      band.n_reps = static_cast<int>(re.size());
    }
  }
}

std::vector<PairVerdict> constant_fit_check(const DerivativeCurveSet& curves)
{
  std::vector<PairVerdict> verdicts;
  for (std::size_t p = 0; p < curves.pairs.size(); ++p) {
    double max_lo_re = -INFINITY, min_hi_re = INFINITY;
    double max_lo_im = -INFINITY, min_hi_im = INFINITY;
    bool any = false;
    for (std::size_t j = 0; j < curves.u_grid.size(); ++j) {
      if (curves.truncated[j])
        continue;
      const CurveBand& b = curves.bands[p][j];
      max_lo_re = std::max(max_lo_re, b.q_lo_re);
      min_hi_re = std::min(min_hi_re, b.q_hi_re);
      max_lo_im = std::max(max_lo_im, b.q_lo_im);
      min_hi_im = std::min(min_hi_im, b.q_hi_im);
      any = true;
    }
    PairVerdict v{ curves.pairs[p] };
    if (any) {
      v.margin_re = max_lo_re - min_hi_re;
      v.margin_im = max_lo_im - min_hi_im;
      v.variation = v.margin_re > 0 || v.margin_im > 0;
    } else {
      v.margin_re = v.margin_im = kNaN;
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

EquivalenceReport equivalence_demo(const DesignSpec& base, const Eigen::VectorXd& c)
{
  validate(base);
  const int K = base.K;
  if (c.size() != K)
    throw InvalidSpec("scaling vector must have K entries");
  for (int k = 0; k < K; ++k)
    if (c[k] == 0.0 || c[k] == 1.0 || !std::isfinite(c[k]))
      throw InvalidScaling("scaling factors must be finite and differ from 0 and 1");
  bool has_noise = !is_point_mass(base.eps_law);
  for (const auto& law : base.meas_error_law)
    has_noise = has_noise || !is_point_mass(law);
  if (!has_noise)
    throw InvalidSpec("equivalence demo needs measurement error or a nondegenerate eps");

  EquivalenceReport rep;
  rep.c = c;
  rep.beta_tilde = c.cwiseProduct(base.beta_true);
  rep.base = gen_dataset(base);
  const Latent& lat = *rep.base.latent;
  const int N = rep.base.n();
  rep.n = N;

  Latent tl;
  tl.x_star = lat.x_star + lat.u;
  tl.u = Eigen::MatrixXd::Zero(N, K);
  tl.eps = lat.eps;
  for (int k = 0; k < K; ++k)
    tl.eps += base.beta_true[k] *
              ((1.0 - c[k]) * lat.x_star.col(k) - c[k] * lat.u.col(k));

  Dataset& td = rep.tilde;
  td.x.resize(N, K);
  td.y.resize(N);
  for (int n = 0; n < N; ++n) {
    double signal = 0.0;
    for (int k = 0; k < K; ++k) {
      td.x(n, k) = base.intercepts[k] + tl.x_star(n, k) + tl.u(n, k);
      signal += rep.beta_tilde[k] * tl.x_star(n, k);
    }
    td.y[n] = base.intercepts[K] + signal + tl.eps[n];
  }
  td.latent = tl;

  rep.max_abs_diff_x = (td.x - rep.base.x).cwiseAbs().maxCoeff();
  rep.max_abs_diff_y = (td.y - rep.base.y).cwiseAbs().maxCoeff();
  // Both sides are the same algebraic expression summed in different orders;
  // allow a few ulps of the largest intermediate term per operation.
  double scale = std::max(rep.base.x.cwiseAbs().maxCoeff(), rep.base.y.cwiseAbs().maxCoeff());
  scale = std::max(scale, (lat.x_star.cwiseAbs().maxCoeff() + lat.u.cwiseAbs().maxCoeff()) *
                            (c.cwiseAbs().maxCoeff() + 1.0) * base.beta_true.cwiseAbs().maxCoeff());
  rep.tolerance = 16.0 * (K + 2) * std::numeric_limits<double>::epsilon() * scale;
  rep.exact_match = rep.max_abs_diff_x <= rep.tolerance && rep.max_abs_diff_y <= rep.tolerance;

  const Eigen::VectorXd x1 = tl.x_star.col(0);
  rep.corr_xstar1_eps = correlation({ x1.data(), static_cast<std::size_t>(N) },
                                    { tl.eps.data(), static_cast<std::size_t>(N) });
  rep.corr_threshold = 4.0 / std::sqrt(static_cast<double>(N));
  rep.dependence_detected = std::abs(rep.corr_xstar1_eps) > rep.corr_threshold;
  return rep;
}

} // namespace eivpd
