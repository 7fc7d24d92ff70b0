#pragma once

#include "eivpd/datagen.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace eivpd::test {

//! Design 2 regressors with U = 0 and eps = 0.
inline DesignSpec noiseless_design(int n_obs = 500, std::uint64_t seed = 11)
{
  DesignSpec s = table1_design(2, false, n_obs, seed);
  s.eps_law = PointMass{ 0.0 };
  return s;
}

inline Dataset shifted(Dataset d, const Eigen::VectorXd& dx, double dy)
{
  for (int k = 0; k < d.k(); ++k)
    d.x.col(k).array() += dx[k];
  d.y.array() += dy;
  d.latent.reset();
  return d;
}

inline double rel_diff(double a, double b)
{
  return std::abs(a - b) / std::max({ std::abs(a), std::abs(b), 1e-300 });
}

} // namespace eivpd::test
