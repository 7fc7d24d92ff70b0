#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>

namespace eivpd {

// Marginal laws used for latent regressors and error terms. Parameter
// conventions follow the usual textbook parametrizations.

struct PointMass
{
  double at = 0.0;
};
struct BetaLaw
{
  double a = 1.0;
  double b = 1.0;
};
struct ChiSquareLaw
{
  double df = 1.0;
};
struct StudentTLaw
{
  double df = 5.0;
};
struct NormalLaw
{
  double mean = 0.0;
  double variance = 1.0;
};
struct ExponentialLaw
{
  double rate = 1.0;
};
//! Joint latent construction X*_k = Z_k + Z_0 with Z iid Exp(1). Only valid
//! as a latent law; its LCF is available in closed form.
struct CommonFactorExp
{};

using Law = std::variant<PointMass,
                         BetaLaw,
                         ChiSquareLaw,
                         StudentTLaw,
                         NormalLaw,
                         ExponentialLaw,
                         CommonFactorExp>;

//! Analytic first two moments of a marginal law.
struct LawMoments
{
  double mean;
  double variance;
};

//! Throws InvalidSpec when the law has no finite variance or bad parameters.
LawMoments analytic_moments(const Law& law);

//! True when the law is degenerate (a point mass).
bool is_point_mass(const Law& law);

//! Fills `out` with iid draws. CommonFactorExp is rejected here; it is a
//! joint construction handled by the data generator.
void fill_draws(const Law& law, std::mt19937_64& rng, std::span<double> out);

//! Parses forms like "beta(1,2)", "chisq(5)", "t(5)", "normal(0,1)",
//! "exp(1)", "common_factor_exp", "none" and "point(0)".
Law parse_law(const std::string& text);
std::string to_string(const Law& law);

} // namespace eivpd
