#include "eivpd/laws.hpp"

#include "eivpd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace eivpd {

namespace {

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template<class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_num(double v)
{
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& msg)
{
  if (!ok)
    throw InvalidSpec(msg);
}

} // namespace

LawMoments analytic_moments(const Law& law)
{
  return std::visit(
    overloaded{
      [](const PointMass& p) { return LawMoments{ p.at, 0.0 }; },
      [](const BetaLaw& p) {
        require(p.a > 0 && p.b > 0, "beta parameters must be positive");
        const double s = p.a + p.b;
        return LawMoments{ p.a / s, p.a * p.b / (s * s * (s + 1.0)) };
      },
      [](const ChiSquareLaw& p) {
        require(p.df > 0, "chi-square df must be positive");
        return LawMoments{ p.df, 2.0 * p.df };
      },
      [](const StudentTLaw& p) {
        require(p.df > 2, "t distribution needs df > 2 for a finite variance");
        return LawMoments{ 0.0, p.df / (p.df - 2.0) };
      },
      [](const NormalLaw& p) {
        require(p.variance >= 0, "normal variance must be nonnegative");
        return LawMoments{ p.mean, p.variance };
      },
      [](const ExponentialLaw& p) {
        require(p.rate > 0, "exponential rate must be positive");
        return LawMoments{ 1.0 / p.rate, 1.0 / (p.rate * p.rate) };
      },
      // Per-coordinate moments of Z_k + Z_0.
      [](const CommonFactorExp&) { return LawMoments{ 2.0, 2.0 }; },
    },
    law);
}

bool is_point_mass(const Law& law)
{
  if (std::holds_alternative<PointMass>(law))
    return true;
  if (const auto* n = std::get_if<NormalLaw>(&law))
    return n->variance == 0.0;
  return false;
}

void fill_draws(const Law& law, std::mt19937_64& rng, std::span<double> out)
{
  analytic_moments(law); // parameter validation
  std::visit(
    overloaded{
      [&](const PointMass& p) { std::fill(out.begin(), out.end(), p.at); },
      [&](const BetaLaw& p) {
        std::gamma_distribution<double> ga(p.a, 1.0);
        std::gamma_distribution<double> gb(p.b, 1.0);
        for (auto& v : out) {
          const double x = ga(rng);
          const double y = gb(rng);
          v = x / (x + y);
        }
      },
      [&](const ChiSquareLaw& p) {
        std::chi_squared_distribution<double> d(p.df);
        for (auto& v : out)
          v = d(rng);
      },
      [&](const StudentTLaw& p) {
        std::student_t_distribution<double> d(p.df);
        for (auto& v : out)
          v = d(rng);
      },
      [&](const NormalLaw& p) {
        if (p.variance == 0.0) {
          std::fill(out.begin(), out.end(), p.mean);
          return;
        }
        std::normal_distribution<double> d(p.mean, std::sqrt(p.variance));
        for (auto& v : out)
          v = d(rng);
      },
      [&](const ExponentialLaw& p) {
        std::exponential_distribution<double> d(p.rate);
        for (auto& v : out)
          v = d(rng);
      },
      [&](const CommonFactorExp&) {
        throw InvalidSpec("common_factor_exp is a joint latent construction");
      },
    },
    law);
}

Law parse_law(const std::string& text)
{
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

  std::string name = s;
  std::vector<double> args;
  if (const auto open = s.find('('); open != std::string::npos) {
    if (s.back() != ')')
      throw InvalidSpec("malformed law: " + text);
    name = s.substr(0, open);
    std::stringstream in(s.substr(open + 1, s.size() - open - 2));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        if (used != tok.size())
          throw InvalidSpec("bad number");
      } catch (const std::exception&) {
        throw InvalidSpec("malformed law argument '" + tok + "' in " + text);
      }
    }
  }

  auto want = [&](std::size_t n) {
    if (args.size() != n)
      throw InvalidSpec("law " + name + " expects " + std::to_string(n) +
                        " argument(s): " + text);
  };

  if (name == "none" || name == "zero") {
    want(0);
    return PointMass{ 0.0 };
  }
  if (name == "point") {
    want(1);
    return PointMass{ args[0] };
  }
  if (name == "beta") {
    want(2);
    return BetaLaw{ args[0], args[1] };
  }
  if (name == "chisq" || name == "chi2" || name == "chisquare") {
    want(1);
    return ChiSquareLaw{ args[0] };
  }
  if (name == "t" || name == "student_t") {
    want(1);
    return StudentTLaw{ args[0] };
  }
  if (name == "normal") {
    want(2);
    return NormalLaw{ args[0], args[1] };
  }
  if (name == "exp" || name == "exponential") {
    want(1);
    return ExponentialLaw{ args[0] };
  }
  if (name == "common_factor_exp") {
    want(0);
    return CommonFactorExp{};
  }
  throw InvalidSpec("unknown law: " + text);
}

std::string to_string(const Law& law)
{
  return std::visit(
    overloaded{
      [](const PointMass& p) {
        return p.at == 0.0 ? std::string("none") : "point(" + fmt_num(p.at) + ")";
      },
      [](const BetaLaw& p) {
        return "beta(" + fmt_num(p.a) + "," + fmt_num(p.b) + ")";
      },
      [](const ChiSquareLaw& p) { return "chisq(" + fmt_num(p.df) + ")"; },
      [](const StudentTLaw& p) { return "t(" + fmt_num(p.df) + ")"; },
      [](const NormalLaw& p) {
        return "normal(" + fmt_num(p.mean) + "," + fmt_num(p.variance) + ")";
      },
      [](const ExponentialLaw& p) { return "exp(" + fmt_num(p.rate) + ")"; },
      [](const CommonFactorExp&) { return std::string("common_factor_exp"); },
    },
    law);
}

} // namespace eivpd
