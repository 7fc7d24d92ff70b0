#pragma once

#include "eivpd/datagen.hpp"
#include "eivpd/report.hpp"

#include <Eigen/Dense>

namespace eivpd {

//! Least squares with an intercept column; the intercept is reported in
//! diagnostics["intercept"]. Throws SingularDesign on rank deficiency.
EstimateReport ols(const Dataset& data);

struct IvSpec
{
  enum class Kind
  {
    C3,
    C4
  };
  Kind instrument_kind = Kind::C3;
  double ridge = 1e-10;
};

//! Higher-moment product instruments built from demeaned data.
//!
//! C3: x_i x_j (i < j) and x_k y.
//! C4: x_i x_j x_l (i <= j <= l, not all equal) and x_i x_j y (i < j), each
//! with its Gaussian part removed: abc - a cov(b,c) - b cov(a,c) - c cov(a,b).
Eigen::MatrixXd build_instruments(const Dataset& data, const IvSpec& spec);

//! Two-stage least squares of demeaned y on demeaned x with the product
//! instruments. Throws Underidentified when there are fewer instruments than
//! regressors.
EstimateReport iv_estimate(const Dataset& data, const IvSpec& spec);

} // namespace eivpd
