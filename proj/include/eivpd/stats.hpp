#pragma once

#include <span>
#include <vector>

namespace eivpd {

double mean(std::span<const double> v);
//! Sample standard deviation (divisor n - 1); 0 for fewer than 2 values.
double stddev(std::span<const double> v);
//! Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted data.
double quantile(std::vector<double> v, double p);
//! Pearson correlation.
double correlation(std::span<const double> a, std::span<const double> b);

} // namespace eivpd
