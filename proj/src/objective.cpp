#include "eivpd/objective.hpp"

#include "eivpd/errors.hpp"

#include <cmath>
#include <limits>

namespace eivpd {

double WeightSpec::density(double u) const
{
  const double a = std::abs(u);
  if (a > u_max)
    return 0.0;
  switch (kind) {
    case Kind::uniform_symmetric:
      return 1.0 / (2.0 * u_max);
    case Kind::trunc_gaussian:
      return std::exp(-0.5 * (a / sigma) * (a / sigma));
  }
  return 0.0;
}

void validate(const ObjectiveSpec& spec)
{
  const WeightSpec& w = spec.weight;
  if (!(w.u_max > 0) || !std::isfinite(w.u_max))
    throw InvalidSpec("weight support is empty: u_max must be positive");
  if (w.kind == WeightSpec::Kind::trunc_gaussian && !(w.sigma > 0))
    throw InvalidSpec("truncated Gaussian weight needs sigma > 0");
  for (double pw : w.per_pair_weights)
    if (!(pw >= 0) || !std::isfinite(pw))
      throw InvalidSpec("per-pair weights must be finite and nonnegative");
  if (spec.grid_size < 5 || spec.grid_size % 2 == 0)
    throw InvalidSpec("grid_size must be odd and at least 5");
  if (!(spec.denom_floor > 0) || spec.denom_floor > 0.5)
    throw InvalidSpec("denom_floor must lie in (0, 0.5]");
}

QuadratureGrid make_grid(const ObjectiveSpec& spec)
{
  validate(spec);
  const int M = spec.grid_size;
  const int c = M / 2;
  const double h = spec.weight.u_max / c;

  QuadratureGrid g;
  g.denom_floor = spec.denom_floor;
  g.nodes.resize(M);
  g.weights.resize(M);
  for (int j = 0; j < M; ++j) {
    const int off = j - c;
    g.nodes[j] = off * h;
    // composite Simpson; M odd gives an even number of panels
    const double rule = (j == 0 || j == M - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    g.weights[j] = rule * h / 3.0 * spec.weight.density(std::abs(off) * h);
  }
  double total = 0.0;
  for (double w : g.weights)
    total += w;
  if (!(total > 0))
    throw InvalidSpec("weight function has no mass on the grid");
  for (double& w : g.weights)
    w /= total;
  return g;
}

std::vector<PairResidual> residuals_at(const Dataset& data,
                                       const Eigen::VectorXd& b,
                                       double u,
                                       double denom_floor)
{
  const EcfKernel kernel(data);
  const Eigen::MatrixXd cov = sample_cov_matrix(kernel);
  const WeightedEcfSums sums = kernel.along_line(b, u);
  const int K = data.k();
  std::vector<PairResidual> out;
  for (const VarPair& p : residual_pairs(K)) {
    const PdEstimate pd = pd_hat(sums, p, denom_floor, u);
    out.push_back({ p, cov(p.first.slot(K), p.second.slot(K)) + pd.value });
  }
  return out;
}

double aggregate_objective(const QuadratureGrid& grid,
                           const std::vector<bool>& mask,
                           const std::vector<std::vector<cplx>>& residuals,
                           const std::vector<double>& pair_weights)
{
  const int M = grid.size();
  if (static_cast<int>(mask.size()) != M || static_cast<int>(residuals.size()) != M)
    throw InvalidSpec("mask and residual table must cover every node");
  double mass = 0.0;
  double total = 0.0;
  for (int j = 0; j < M; ++j) {
    if (!mask[j])
      continue;
    const auto& row = residuals[j];
    if (row.size() != pair_weights.size())
      throw InvalidSpec("residual row does not match the pair weights");
    double node = 0.0;
    for (std::size_t p = 0; p < row.size(); ++p)
      node += pair_weights[p] * (row[p].real() * row[p].real() + row[p].imag() * row[p].imag());
    mass += grid.weights[j];
    total += grid.weights[j] * node;
  }
  if (!(mass > 0))
    return -std::numeric_limits<double>::infinity();
  return -(total / mass);
}

Objective::Objective(const Dataset& data, ObjectiveSpec spec)
  : kernel_(data)
  , spec_(std::move(spec))
  , grid_(make_grid(spec_))
  , pairs_(residual_pairs(data.k()))
{
  if (data.n() < 2)
    throw InsufficientData("objective needs N >= 2");
  pair_weights_ = spec_.weight.per_pair_weights;
  if (pair_weights_.empty())
    pair_weights_.assign(pairs_.size(), 1.0);
  if (pair_weights_.size() != pairs_.size())
    throw InvalidSpec("per_pair_weights must have one entry per residual pair");
  cov_ = sample_cov_matrix(kernel_);
}

std::vector<std::vector<cplx>> Objective::residual_table(const Eigen::VectorXd& b,
                                                         std::vector<double>* denom_mag) const
{
  const int K = kernel_.k();
  const auto sums = kernel_.along_line(b, grid_.nodes);
  std::vector<std::vector<cplx>> table(sums.size());
  if (denom_mag)
    denom_mag->assign(sums.size(), 0.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < sums.size(); ++j) {
    const double mag = std::abs(sums[j].s0);
    if (denom_mag)
      (*denom_mag)[j] = mag;
    auto& row = table[j];
    row.reserve(pairs_.size());
    for (const VarPair& p : pairs_) {
      if (mag < grid_.denom_floor || mag == 0.0) {
        row.emplace_back(nan, nan);
        continue;
      }
      const PdEstimate pd = pd_hat(sums[j], p, 0.0, grid_.nodes[j]);
      row.push_back(cov_(p.first.slot(K), p.second.slot(K)) + pd.value);
    }
  }
  return table;
}

ObjectiveValue Objective::finish(std::vector<bool> mask,
                                 const std::vector<std::vector<cplx>>& residuals) const
{
  ObjectiveValue out;
  out.n_masked = 0;
  for (bool used : mask)
    out.n_masked += used ? 0 : 1;
  out.mask = std::move(mask);
  out.degenerate = 2 * out.n_masked > grid_.size();
  out.value = out.degenerate ? -std::numeric_limits<double>::infinity()
                             : aggregate_objective(grid_, out.mask, residuals, pair_weights_);
  return out;
}

ObjectiveValue Objective::evaluate(const Eigen::VectorXd& b) const
{
  const int M = grid_.size();
  const int c = grid_.center();
  const int K = kernel_.k();
  const std::vector<double> half(grid_.nodes.begin() + c, grid_.nodes.end());
  const auto sums = kernel_.along_line(b, half);

  // Sums at -u are the conjugates of those at u, so |residual|^2 and |s0|
  // are even in u and the negative half is mirrored.
  std::vector<bool> mask(M, false);
  std::vector<std::vector<cplx>> table(M);
  for (int h = 0; h < static_cast<int>(half.size()); ++h) {
    const double mag = std::abs(sums[h].s0);
    const bool used = mag >= grid_.denom_floor && mag > 0.0;
    std::vector<cplx> row;
    if (used) {
      row.reserve(pairs_.size());
      for (const VarPair& p : pairs_)
        row.push_back(cov_(p.first.slot(K), p.second.slot(K)) +
                      pd_hat(sums[h], p, 0.0, half[h]).value);
    }
    mask[c + h] = used;
    mask[c - h] = used;
    table[c - h] = row;
    for (auto& r : row)
      r = std::conj(r);
    table[c + h] = std::move(row);
  }
  return finish(std::move(mask), table);
}

ObjectiveValue Objective::evaluate_full_grid(const Eigen::VectorXd& b) const
{
  std::vector<double> mags;
  auto table = residual_table(b, &mags);
  std::vector<bool> mask(mags.size());
  for (std::size_t j = 0; j < mags.size(); ++j)
    mask[j] = mags[j] >= grid_.denom_floor && mags[j] > 0.0;
  return finish(std::move(mask), table);
}

double q_hat(const Dataset& data, const Eigen::VectorXd& b, const ObjectiveSpec& spec)
{
  const Objective objective(data, spec);
  const ObjectiveValue v = objective.evaluate(b);
  if (v.degenerate)
    throw GridDegenerate("more than half of the quadrature nodes were trimmed (" +
                         std::to_string(v.n_masked) + " of " +
                         std::to_string(objective.grid().size()) + ")");
  return v.value;
}

std::vector<ProfilePoint> profile_curve(const Dataset& data,
                                        const Eigen::VectorXd& b_base,
                                        int axis,
                                        const std::vector<double>& deltas,
                                        const ObjectiveSpec& spec)
{
  if (axis < 0 || axis >= data.k())
    throw InvalidSpec("profile axis out of range");
  if (b_base.size() != data.k())
    throw InvalidSpec("b_base must have K entries");
  const Objective objective(data, spec);
  std::vector<ProfilePoint> out;
  out.reserve(deltas.size());
  for (double d : deltas) {
    Eigen::VectorXd b = b_base;
    b[axis] += d;
    const ObjectiveValue v = objective.evaluate(b);
    out.push_back({ d, v.value, v.degenerate });
  }
  return out;
}

} // namespace eivpd
