#include "eivpd/stats.hpp"

#include "eivpd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace eivpd {

double mean(std::span<const double> v)
{
  if (v.empty())
    throw InsufficientData("mean of an empty sample");
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v)
{
  if (v.size() < 2)
    return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double p)
{
  if (v.empty())
    throw InsufficientData("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double correlation(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size() || a.size() < 2)
    throw InsufficientData("correlation needs two samples of equal size >= 2");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace eivpd
