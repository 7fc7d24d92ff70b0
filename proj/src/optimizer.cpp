#include "eivpd/optimizer.hpp"

#include "eivpd/baselines.hpp"
#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"
#include "eivpd/parallel.hpp"
#include "eivpd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eivpd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRandomStartStream = 0x5157a27;
constexpr std::uint64_t kProbeStream = 0x9b0be5;

struct Vertex
{
  Eigen::VectorXd x;
  double f;
};

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

void check_bounds(const Bounds& b)
{
  if (b.lo.size() != b.hi.size() || b.lo.size() == 0)
    throw InvalidSpec("bounds must have matching non-empty lo/hi vectors");
  for (Eigen::Index k = 0; k < b.lo.size(); ++k)
    if (!(b.lo[k] < b.hi[k]) || !std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k]))
      throw InvalidSpec("bounds need finite lo < hi on every axis");
}

Eigen::VectorXd uniform_point(const Bounds& b, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(b.lo.size());
  for (Eigen::Index k = 0; k < x.size(); ++k)
    x[k] = b.lo[k] + unit(rng) * (b.hi[k] - b.lo[k]);
  return x;
}

// Single Nelder-Mead pass with standard coefficients (1, 2, 1/2, 1/2).
LocalSearchResult nelder_mead_once(const ObjectiveFn& f,
                                   const Eigen::VectorXd& start,
                                   const Bounds& bounds,
                                   const SearchConfig& cfg,
                                   int max_iter)
{
  const Eigen::Index K = start.size();
  LocalSearchResult res;

  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.n_evals;
    return f(x);
  };

  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(K + 1));
  const Eigen::VectorXd x0 = bounds.reflect(start);
  simplex.push_back({ x0, eval(x0) });
  for (Eigen::Index k = 0; k < K; ++k) {
    const double width = bounds.hi[k] - bounds.lo[k];
    const double step = std::min(cfg.initial_step, 0.25 * width);
    Eigen::VectorXd x = x0;
    x[k] += (x0[k] + step <= bounds.hi[k]) ? step : -step;
    simplex.push_back({ x, eval(x) });
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f > b.f; };

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    for (const auto& v : simplex) {
      if (std::isnan(v.f)) {
        res.aborted = true;
        break;
      }
    }
    if (res.aborted)
      break;
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    if (simplex.front().f == kNegInf) {
      res.aborted = true;
      break;
    }

    double diameter = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
      diameter = std::max(diameter, (simplex[i].x - simplex[0].x).cwiseAbs().maxCoeff());
    const double spread = simplex.front().f - simplex.back().f;
    res.small_simplex = diameter < cfg.tol_x;
    res.small_spread = std::isfinite(spread) && spread < cfg.tol_f;
    if (res.small_simplex || res.small_spread) {
      res.converged = true;
      break;
    }

    Vertex& worst = simplex.back();
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(K);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
      centroid += simplex[i].x;
    centroid /= static_cast<double>(K);

    const Eigen::VectorXd xr = bounds.reflect(centroid + (centroid - worst.x));
    const double fr = eval(xr);
    const double f_best = simplex.front().f;
    const double f_second_worst = simplex[simplex.size() - 2].f;

    if (fr > f_best) {
      const Eigen::VectorXd xe = bounds.reflect(centroid + 2.0 * (centroid - worst.x));
      const double fe = eval(xe);
      worst = fe > fr ? Vertex{ xe, fe } : Vertex{ xr, fr };
      continue;
    }
    if (fr > f_second_worst) {
      worst = { xr, fr };
      continue;
    }
    if (fr > worst.f) {
      const Eigen::VectorXd xc = bounds.reflect(centroid + 0.5 * (xr - centroid));
      const double fc = eval(xc);
      if (fc >= fr) {
        worst = { xc, fc };
        continue;
      }
    } else {
      const Eigen::VectorXd xc = bounds.reflect(centroid + 0.5 * (worst.x - centroid));
      const double fc = eval(xc);
      if (fc > worst.f) {
        worst = { xc, fc };
        continue;
      }
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i].x = bounds.reflect(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
      simplex[i].f = eval(simplex[i].x);
    }
  }

  std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) {
    if (std::isnan(a.f))
      return false;
    if (std::isnan(b.f))
      return true;
    return a.f > b.f;
  });
  res.x = simplex.front().x;
  res.value = simplex.front().f;
  if (!std::isfinite(res.value))
    res.aborted = true;
  return res;
}

} // namespace

bool Bounds::contains(const Eigen::VectorXd& b) const
{
  if (b.size() != lo.size())
    return false;
  for (Eigen::Index k = 0; k < b.size(); ++k)
    if (!(b[k] >= lo[k] && b[k] <= hi[k]))
      return false;
  return true;
}

Eigen::VectorXd Bounds::reflect(Eigen::VectorXd b) const
{
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    if (b[k] >= lo[k] && b[k] <= hi[k])
      continue;
    const double w = hi[k] - lo[k];
    double t = std::fmod(b[k] - lo[k], 2.0 * w);
    if (t < 0)
      t += 2.0 * w;
    if (t > w)
      t = 2.0 * w - t;
    b[k] = std::clamp(lo[k] + t, lo[k], hi[k]);
  }
  return b;
}

LocalSearchResult nelder_mead_maximize(const ObjectiveFn& f,
                                       const Eigen::VectorXd& start,
                                       const Bounds& bounds,
                                       const SearchConfig& cfg)
{
  check_bounds(bounds);
  if (start.size() != bounds.lo.size())
    throw InvalidSpec("start dimension does not match the bounds");

  int budget = cfg.max_iter;
  LocalSearchResult best = nelder_mead_once(f, start, bounds, cfg, budget);
  budget -= best.iterations;
  int total_evals = best.n_evals;
  int total_iters = best.iterations;
  for (int r = 0; r < cfg.restarts && !best.aborted && best.converged && budget > 0; ++r) {
    LocalSearchResult again = nelder_mead_once(f, best.x, bounds, cfg, budget);
    budget -= again.iterations;
    total_evals += again.n_evals;
    total_iters += again.iterations;
    if (again.aborted || !(again.value > best.value + cfg.tol_f)) {
      if (!again.aborted && again.value > best.value) {
        best.x = again.x;
        best.value = again.value;
      }
      break;
    }
    best = again;
    r = -1; // improvement: keep restarting while the budget lasts
    if (budget <= 0)
      break;
  }
  best.n_evals = total_evals;
  best.iterations = total_iters;
  return best;
}

EstimateReport maximize_function(const ObjectiveFn& f, const SearchConfig& cfg)
{
  if (!cfg.bounds)
    throw InvalidSpec("maximize_function needs explicit bounds");
  const Bounds& bounds = *cfg.bounds;
  check_bounds(bounds);
  if (cfg.starts.empty())
    throw InvalidSpec("maximize_function needs at least one start");
  if (!(cfg.tol_x > 0) || !(cfg.tol_f > 0) || cfg.max_iter < 1)
    throw InvalidSpec("tolerances must be positive and max_iter >= 1");
  for (const auto& s : cfg.starts)
    if (!bounds.contains(s))
      throw InvalidSpec("every start must lie inside the bounds");

  const int n_starts = static_cast<int>(cfg.starts.size());
  std::vector<LocalSearchResult> runs(static_cast<std::size_t>(n_starts));
  std::vector<double> start_values(static_cast<std::size_t>(n_starts));
  parallel_for(n_starts, cfg.threads, [&](int i) {
    runs[i] = nelder_mead_maximize(f, cfg.starts[i], bounds, cfg);
  });

  int best = -1;
  int n_evals = 0;
  for (int i = 0; i < n_starts; ++i) {
    n_evals += runs[i].n_evals;
    if (runs[i].aborted || !std::isfinite(runs[i].value))
      continue;
    if (best < 0 || runs[i].value > runs[best].value ||
        (runs[i].value == runs[best].value && lex_less(runs[i].x, runs[best].x)))
      best = i;
  }
  if (best < 0)
    throw OptimizationFailed("no start produced a finite objective value");

  // Flat-objective check over terminal values and random probes.
  std::vector<double> values;
  for (const auto& r : runs)
    if (!r.aborted && std::isfinite(r.value))
      values.push_back(r.value);
  auto probe_rng = make_stream(cfg.seed, kProbeStream);
  for (int p = 0; p < cfg.probe_points; ++p) {
    const double v = f(uniform_point(bounds, probe_rng));
    ++n_evals;
    if (std::isfinite(v))
      values.push_back(v);
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());

  EstimateReport rep;
  rep.method = Method::PD;
  rep.b_hat = runs[best].x;
  rep.objective_at_opt = runs[best].value;
  rep.n_evals = n_evals;
  rep.converged = runs[best].converged;
  rep.start_used = cfg.starts[best];
  rep.flat_objective = (*hi_it - *lo_it) < cfg.tol_f;
  rep.diagnostics["n_starts"] = std::to_string(n_starts);
  rep.diagnostics["converged_simplex"] = runs[best].small_simplex ? "true" : "false";
  rep.diagnostics["converged_spread"] = runs[best].small_spread ? "true" : "false";
  rep.diagnostics["iterations"] = std::to_string(runs[best].iterations);
  int aborted = 0;
  for (const auto& r : runs)
    aborted += r.aborted ? 1 : 0;
  rep.diagnostics["aborted_starts"] = std::to_string(aborted);
  return rep;
}

Bounds default_bounds(const Eigen::VectorXd& b_ols)
{
  const Eigen::VectorXd half = 5.0 * b_ols.cwiseAbs().array() + 1.0;
  return { b_ols - half, b_ols + half };
}

std::vector<Eigen::VectorXd> default_starts(const Eigen::VectorXd& b_ols,
                                            const Bounds& bounds,
                                            int random_starts,
                                            std::uint64_t seed)
{
  auto clamp_in = [&](Eigen::VectorXd x) {
    return x.cwiseMax(bounds.lo).cwiseMin(bounds.hi).eval();
  };
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(clamp_in(b_ols));
  for (Eigen::Index k = 0; k < b_ols.size(); ++k) {
    for (double d : { -0.5, 0.5 }) {
      Eigen::VectorXd x = b_ols;
      x[k] += d;
      starts.push_back(clamp_in(x));
    }
  }
  auto rng = make_stream(seed, kRandomStartStream);
  for (int r = 0; r < random_starts; ++r)
    starts.push_back(uniform_point(bounds, rng));
  return starts;
}

EstimateReport maximize(const Dataset& data, const ObjectiveSpec& spec, SearchConfig cfg)
{
  check_dataset(data);
  if (data.n() < data.k() + 2)
    throw InsufficientData("PD estimation needs N >= K + 2");
  const Objective objective(data, spec);
  const ObjectiveFn f = [&objective](const Eigen::VectorXd& b) {
    return objective.evaluate(b).value;
  };

  if (!cfg.bounds || cfg.starts.empty()) {
    std::optional<Eigen::VectorXd> b_ols;
    try {
      b_ols = ols(data).b_hat;
    } catch (const SingularDesign&) {
    }
    if (!cfg.bounds) {
      if (!b_ols)
        throw OptimizationFailed("OLS is singular and no search bounds were given");
      cfg.bounds = default_bounds(*b_ols);
    }
    if (cfg.starts.empty()) {
      const Eigen::VectorXd anchor =
        b_ols && cfg.bounds->contains(*b_ols) ? *b_ols : grid_refine(f, *cfg.bounds, 5);
      cfg.starts = default_starts(anchor, *cfg.bounds, cfg.random_starts, cfg.seed);
    }
  }

  EstimateReport rep = maximize_function(f, cfg);
  const ObjectiveValue at_opt = objective.evaluate(rep.b_hat);
  rep.diagnostics["masked_nodes_at_opt"] = std::to_string(at_opt.n_masked);
  rep.diagnostics["bounds_lo"] = format_vector(cfg.bounds->lo);
  rep.diagnostics["bounds_hi"] = format_vector(cfg.bounds->hi);
  return rep;
}

Eigen::VectorXd grid_refine(const ObjectiveFn& f, const Bounds& box, int per_axis)
{
  check_bounds(box);
  if (per_axis < 3)
    throw InvalidSpec("grid_refine needs per_axis >= 3");
  const Eigen::Index K = box.lo.size();
  std::vector<int> idx(static_cast<std::size_t>(K), 0);
  Eigen::VectorXd best;
  double best_f = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    Eigen::VectorXd x(K);
    for (Eigen::Index k = 0; k < K; ++k)
      x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / (per_axis - 1);
    const double v = f(x);
    if (!std::isnan(v) && (best.size() == 0 || std::isnan(best_f) || v > best_f)) {
      best = x;
      best_f = v;
    }
    Eigen::Index k = K - 1;
    while (k >= 0 && ++idx[k] == per_axis) {
      idx[k] = 0;
      --k;
    }
    if (k < 0)
      break;
  }
  if (best.size() == 0)
    best = 0.5 * (box.lo + box.hi);
  return best;
}

Eigen::VectorXd grid_refine(const Dataset& data,
                            const ObjectiveSpec& spec,
                            const Bounds& box,
                            int per_axis)
{
  const Objective objective(data, spec);
  return grid_refine([&objective](const Eigen::VectorXd& b) { return objective.evaluate(b).value; },
                     box,
                     per_axis);
}

} // namespace eivpd
