#include "eivpd/report.hpp"

#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"

#include <cctype>

namespace eivpd {

std::string to_string(Method m)
{
  switch (m) {
    case Method::PD:
      return "PD";
    case Method::OLS:
      return "OLS";
    case Method::C3:
      return "C3";
    case Method::C4:
      return "C4";
  }
  return "?";
}

Method parse_method(const std::string& name)
{
  std::string n;
  for (char c : name)
    n.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (n == "PD")
    return Method::PD;
  if (n == "OLS")
    return Method::OLS;
  if (n == "C3")
    return Method::C3;
  if (n == "C4")
    return Method::C4;
  throw InvalidSpec("unknown method: " + name);
}

namespace {

std::string flags_of(const EstimateReport& r)
{
  std::string f;
  auto add = [&](const char* s) { f += (f.empty() ? "" : "|") + std::string(s); };
  if (r.flat_objective)
    add("flat_objective");
  if (r.weak_instrument)
    add("weak_instrument");
  return f;
}

} // namespace

std::string report_csv_header(int K)
{
  std::string h = "method";
  for (int k = 0; k < K; ++k)
    h += ",b" + std::to_string(k + 1);
  return h + ",objective,n_evals,converged,flags";
}

std::string report_csv_row(const EstimateReport& r)
{
  std::string row = to_string(r.method);
  for (Eigen::Index k = 0; k < r.b_hat.size(); ++k)
    row += "," + format_double(r.b_hat[k]);
  row += "," + format_double(r.objective_at_opt);
  row += "," + std::to_string(r.n_evals);
  row += std::string(",") + (r.converged ? "1" : "0");
  row += "," + flags_of(r);
  return row;
}

std::string report_text(const EstimateReport& r)
{
  std::string out;
  out += "method = " + to_string(r.method) + "\n";
  out += "b_hat = " + format_vector(r.b_hat) + "\n";
  out += "objective_at_opt = " + format_double(r.objective_at_opt) + "\n";
  out += "n_evals = " + std::to_string(r.n_evals) + "\n";
  out += std::string("converged = ") + (r.converged ? "true" : "false") + "\n";
  out += "start_used = " + format_vector(r.start_used) + "\n";
  out += std::string("flat_objective = ") + (r.flat_objective ? "true" : "false") + "\n";
  out += std::string("weak_instrument = ") + (r.weak_instrument ? "true" : "false") + "\n";
  for (const auto& [k, v] : r.diagnostics)
    out += k + " = " + v + "\n";
  return out;
}

} // namespace eivpd
