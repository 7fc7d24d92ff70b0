#include "eivpd/errors.hpp"
#include "eivpd/laws.hpp"
#include "eivpd/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace eivpd;

TEST_CASE("analytic moments of the supported laws")
{
  auto m = analytic_moments(ChiSquareLaw{ 5 });
  CHECK(m.mean == 5.0);
  CHECK(m.variance == 10.0);

  m = analytic_moments(BetaLaw{ 1, 2 });
  CHECK(m.mean == doctest::Approx(1.0 / 3.0));
  CHECK(m.variance == doctest::Approx(1.0 / 18.0));

  m = analytic_moments(StudentTLaw{ 5 });
  CHECK(m.mean == 0.0);
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));

  m = analytic_moments(ExponentialLaw{ 2 });
  CHECK(m.mean == 0.5);
  CHECK(m.variance == 0.25);

  m = analytic_moments(NormalLaw{ 1.5, 4.0 });
  CHECK(m.mean == 1.5);
  CHECK(m.variance == 4.0);

  CHECK(analytic_moments(PointMass{ 3.0 }).variance == 0.0);
  CHECK_THROWS_AS(analytic_moments(StudentTLaw{ 2 }), InvalidSpec);
  CHECK_THROWS_AS(analytic_moments(BetaLaw{ -1, 2 }), InvalidSpec);
  CHECK_THROWS_AS(analytic_moments(ChiSquareLaw{ 0 }), InvalidSpec);
}

TEST_CASE("sample moments of draws agree with analytic moments")
{
  const std::vector<Law> laws{ BetaLaw{ 1, 2 }, ChiSquareLaw{ 5 }, StudentTLaw{ 10 },
                               NormalLaw{ -1, 2 }, ExponentialLaw{ 3 } };
  const std::size_t N = 200000;
  std::mt19937_64 rng(42);
  for (const auto& law : laws) {
    CAPTURE(to_string(law));
    std::vector<double> v(N);
    fill_draws(law, rng, v);
    const auto m = analytic_moments(law);
    const double se = std::sqrt(m.variance / N);
    CHECK(std::abs(mean(v) - m.mean) < 5 * se);
    CHECK(stddev(v) * stddev(v) == doctest::Approx(m.variance).epsilon(0.05));
  }
}

TEST_CASE("draws are reproducible for a fixed generator state")
{
  std::vector<double> a(100), b(100);
  std::mt19937_64 r1(7), r2(7);
  fill_draws(BetaLaw{ 1, 2 }, r1, a);
  fill_draws(BetaLaw{ 1, 2 }, r2, b);
  CHECK(a == b);
}

TEST_CASE("point mass and joint construction")
{
  std::vector<double> v(10, 1.0);
  std::mt19937_64 rng(1);
  fill_draws(PointMass{ 0.25 }, rng, v);
  for (double x : v)
    CHECK(x == 0.25);
  CHECK(is_point_mass(PointMass{}));
  CHECK(is_point_mass(NormalLaw{ 0, 0 }));
  CHECK_FALSE(is_point_mass(NormalLaw{}));
  CHECK_THROWS_AS(fill_draws(CommonFactorExp{}, rng, v), InvalidSpec);
}

TEST_CASE("law text round trip")
{
  for (const char* text : { "beta(1,2)", "chisq(5)", "t(5)", "normal(0,1)", "exp(1)",
                            "common_factor_exp", "none", "point(2)" }) {
    CAPTURE(text);
    const Law law = parse_law(text);
    CHECK(to_string(parse_law(to_string(law))) == to_string(law));
  }
  CHECK(std::holds_alternative<ChiSquareLaw>(parse_law("chi2(3)")));
  CHECK(std::holds_alternative<PointMass>(parse_law("zero")));
  CHECK(std::get<BetaLaw>(parse_law(" beta( 1 , 2 ) ")).b == 2.0);
  CHECK_THROWS_AS(parse_law("gamma(2)"), InvalidSpec);
  CHECK_THROWS_AS(parse_law("beta(1)"), InvalidSpec);
  CHECK_THROWS_AS(parse_law("t(x)"), InvalidSpec);
  CHECK_THROWS_AS(parse_law("normal(0,1"), InvalidSpec);
}
