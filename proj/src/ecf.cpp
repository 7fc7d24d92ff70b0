#include "eivpd/ecf.hpp"

#include "eivpd/errors.hpp"

#include <cmath>

namespace eivpd {

namespace {

constexpr int kBlock = 128;

// Explicit complex products: std::complex division may rescale its operands,
// which would break exactness at s0 = 1 + 0i.
cplx mul(cplx a, cplx b)
{
  return { a.real() * b.real() - a.imag() * b.imag(),
           a.real() * b.imag() + a.imag() * b.real() };
}

cplx div(cplx num, cplx den)
{
  const double mag2 = den.real() * den.real() + den.imag() * den.imag();
  if (!(mag2 > 0) || !std::isnormal(mag2))
    return num / den;
  return { (num.real() * den.real() + num.imag() * den.imag()) / mag2,
           (num.imag() * den.real() - num.real() * den.imag()) / mag2 };
}

// Pairwise reduction of block partials, fixed order.
double pairwise(const double* v, std::size_t count, std::size_t stride)
{
  if (count == 1)
    return v[0];
  const std::size_t half = count / 2;
  return pairwise(v, half, stride) + pairwise(v + half * stride, count - half, stride);
}

} // namespace

std::string Var::label() const
{
  return is_y() ? std::string("y") : "x" + std::to_string(k_ + 1);
}

std::vector<VarPair> residual_pairs(int K)
{
  std::vector<VarPair> pairs;
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j)
      pairs.push_back({ Var::x(i), Var::x(j) });
  for (int i = 0; i < K; ++i)
    pairs.push_back({ Var::x(i), Var::y() });
  return pairs;
}

EcfKernel::EcfKernel(const Dataset& data)
  : n_(data.n())
  , k_(data.k())
{
  check_dataset(data);
  const int m = k_ + 1;
  width_ = 1 + m + m * (m + 1) / 2;
  cols_.resize(n_, m);
  cols_.leftCols(k_) = data.x;
  cols_.col(k_) = data.y;

  table_.resize(static_cast<std::size_t>(n_) * width_);
  for (int r = 0; r < n_; ++r) {
    double* row = &table_[static_cast<std::size_t>(r) * width_];
    int w = 0;
    row[w++] = 1.0;
    for (int a = 0; a < m; ++a)
      row[w++] = cols_(r, a);
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b)
        row[w++] = cols_(r, a) * cols_(r, b);
  }
}

WeightedEcfSums EcfKernel::accumulate(const std::vector<double>& phase) const
{
  const int W = width_;
  const int nblocks = n_ == 0 ? 1 : (n_ + kBlock - 1) / kBlock;
  std::vector<double> re(static_cast<std::size_t>(nblocks) * W, 0.0);
  std::vector<double> im(static_cast<std::size_t>(nblocks) * W, 0.0);

  for (int blk = 0; blk < nblocks; ++blk) {
    double* bre = &re[static_cast<std::size_t>(blk) * W];
    double* bim = &im[static_cast<std::size_t>(blk) * W];
    const int lo = blk * kBlock;
    const int hi = std::min(n_, lo + kBlock);
    for (int r = lo; r < hi; ++r) {
      const double c = std::cos(phase[r]);
      const double s = std::sin(phase[r]);
      const double* row = &table_[static_cast<std::size_t>(r) * W];
      for (int w = 0; w < W; ++w) {
        bre[w] += row[w] * c;
        bim[w] += row[w] * s;
      }
    }
  }

  std::vector<double> tot_re(W), tot_im(W);
  for (int w = 0; w < W; ++w) {
    // Division (not multiplication by 1/N) keeps sum(1)/N == 1 exactly.
    tot_re[w] = pairwise(&re[w], nblocks, W) / static_cast<double>(n_);
    tot_im[w] = pairwise(&im[w], nblocks, W) / static_cast<double>(n_);
  }
  return unpack(tot_re, tot_im);
}

WeightedEcfSums EcfKernel::unpack(const std::vector<double>& re,
                                  const std::vector<double>& im) const
{
  const int m = k_ + 1;
  WeightedEcfSums out;
  out.s1.resize(m);
  out.s2.resize(m, m);
  int w = 0;
  out.s0 = { re[w], im[w] };
  ++w;
  for (int a = 0; a < m; ++a, ++w)
    out.s1[a] = { re[w], im[w] };
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b, ++w) {
      out.s2(a, b) = { re[w], im[w] };
      out.s2(b, a) = out.s2(a, b);
    }
  return out;
}

WeightedEcfSums EcfKernel::along_line(const Eigen::VectorXd& b, double u) const
{
  if (b.size() != k_)
    throw InvalidSpec("b must have K entries");
  std::vector<double> phase(n_);
  for (int r = 0; r < n_; ++r) {
    double v = 0.0;
    for (int k = 0; k < k_; ++k)
      v += b[k] * cols_(r, k);
    v -= cols_(r, k_);
    phase[r] = u * v;
  }
  return accumulate(phase);
}

std::vector<WeightedEcfSums> EcfKernel::along_line(const Eigen::VectorXd& b,
                                                   const std::vector<double>& us) const
{
  if (b.size() != k_)
    throw InvalidSpec("b must have K entries");
  std::vector<double> v(n_);
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = 0; k < k_; ++k)
      acc += b[k] * cols_(r, k);
    v[r] = acc - cols_(r, k_);
  }
  std::vector<WeightedEcfSums> out;
  out.reserve(us.size());
  std::vector<double> phase(n_);
  for (double u : us) {
    for (int r = 0; r < n_; ++r)
      phase[r] = u * v[r];
    out.push_back(accumulate(phase));
  }
  return out;
}

WeightedEcfSums EcfKernel::at(const Eigen::VectorXd& s) const
{
  if (s.size() != k_ + 1)
    throw InvalidSpec("frequency vector must have K + 1 entries");
  std::vector<double> phase(n_);
  for (int r = 0; r < n_; ++r) {
    double t = 0.0;
    for (int a = 0; a <= k_; ++a)
      t += s[a] * cols_(r, a);
    phase[r] = t;
  }
  return accumulate(phase);
}

WeightedEcfSums weighted_sums(const Dataset& data, const Eigen::VectorXd& b, double u)
{
  return EcfKernel(data).along_line(b, u);
}

WeightedEcfSums weighted_sums_at(const Dataset& data, const Eigen::VectorXd& s)
{
  return EcfKernel(data).at(s);
}

PdEstimate pd_hat(const WeightedEcfSums& sums, VarPair pair, double denom_floor, double at_u)
{
  const int K = static_cast<int>(sums.s1.size()) - 1;
  const int a = pair.first.slot(K);
  const int b = pair.second.slot(K);
  if (a < 0 || a > K || b < 0 || b > K)
    throw InvalidSpec("pair index out of range");

  const double mag = std::abs(sums.s0);
  if (mag == 0.0 || mag < denom_floor)
    throw DenominatorUnderflow(mag, at_u);

  // (s1a s1b - s2ab s0) / s0^2
  const cplx num = mul(sums.s1[a], sums.s1[b]) - mul(sums.s2(a, b), sums.s0);
  const cplx den = mul(sums.s0, sums.s0);
  return { div(num, den), pair, at_u, mag };
}

Eigen::MatrixXd sample_cov_matrix(const EcfKernel& kernel)
{
  if (kernel.n() < 2)
    throw InsufficientData("covariance needs N >= 2");
  const int m = kernel.k() + 1;
  const WeightedEcfSums origin = kernel.at(Eigen::VectorXd::Zero(m));
  Eigen::MatrixXd cov(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      cov(a, b) = origin.s2(a, b).real() - origin.s1[a].real() * origin.s1[b].real();
  return cov;
}

Eigen::MatrixXd sample_cov_matrix(const Dataset& data)
{
  if (data.n() < 2)
    throw InsufficientData("covariance needs N >= 2");
  return sample_cov_matrix(EcfKernel(data));
}

double sample_cov(const Dataset& data, Var a, Var b)
{
  const Eigen::MatrixXd cov = sample_cov_matrix(data);
  const int K = data.k();
  return cov(a.slot(K), b.slot(K));
}

} // namespace eivpd
