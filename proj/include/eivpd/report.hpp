#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>

namespace eivpd {

enum class Method
{
  PD,
  OLS,
  C3,
  C4
};

std::string to_string(Method m);
//! Accepts "pd", "ols", "c3", "c4" in any case.
Method parse_method(const std::string& name);

//! Result of any estimator in the library.
struct EstimateReport
{
  Method method = Method::PD;
  Eigen::VectorXd b_hat;
  double objective_at_opt = 0.0; // Q_N for PD, NaN for the moment estimators
  int n_evals = 0;
  bool converged = false;
  Eigen::VectorXd start_used;
  bool flat_objective = false;  // suspected non-identification
  bool weak_instrument = false; // C3/C4 only
  std::map<std::string, std::string> diagnostics;
};

//! Header matching report_csv_row for K coefficients:
//! method,b1..bK,objective,n_evals,converged,flags
std::string report_csv_header(int K);
std::string report_csv_row(const EstimateReport& report);
//! Verbose "key = value" block.
std::string report_text(const EstimateReport& report);

} // namespace eivpd
