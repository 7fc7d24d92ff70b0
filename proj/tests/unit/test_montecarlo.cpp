#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"
#include "eivpd/montecarlo.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace eivpd;

TEST_CASE("OLS study on noiseless data")
{
  McStudySpec s;
  s.design = test::noiseless_design(200, 0);
  s.reps = 2;
  s.methods = { Method::OLS };
  const McResult r = run_study(s);
  REQUIRE(r.summary.size() == 1);
  const MethodSummary& m = r.summary[0];
  CHECK(m.n_ok == 2);
  CHECK(m.coef[0].mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.coef[0].sd < 1e-12);
}

TEST_CASE("study summaries are reproducible from the records")
{
  McStudySpec s;
  s.design = table1_design(2, true, 300, 0);
  s.reps = 6;
  s.methods = { Method::OLS, Method::C3, Method::PD };
  s.master_seed = 99;
  const McResult r = run_study(s);
  REQUIRE(r.records.size() == 18);

  for (const auto& m : r.summary) {
    std::vector<double> b1;
    for (const auto& rec : r.records)
      if (rec.method == m.method && !rec.failed)
        b1.push_back(rec.report.b_hat[0]);
    CHECK(m.n_ok + m.n_failed == s.reps);
    double mu = 0.0;
    for (double v : b1)
      mu += v;
    mu /= b1.size();
    CHECK(std::abs(m.coef[0].mean - mu) < 1e-12);
    CHECK(m.coef[0].mean >= *std::min_element(b1.begin(), b1.end()));
    CHECK(m.coef[0].mean <= *std::max_element(b1.begin(), b1.end()));
  }

  // Permuting record order leaves the summary unchanged.
  auto shuffled = r.records;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto again = summarize(shuffled, s.methods, 2);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].coef[0].mean == doctest::Approx(r.summary[i].coef[0].mean).epsilon(1e-14));
    CHECK(again[i].coef[0].sd == doctest::Approx(r.summary[i].coef[0].sd).epsilon(1e-12));
    CHECK(again[i].coef[0].q50 == r.summary[i].coef[0].q50);
  }
}

TEST_CASE("studies are deterministic across thread counts")
{
  McStudySpec s;
  s.design = table1_design(1, true, 300, 0);
  s.reps = 4;
  s.methods = { Method::PD, Method::C4 };
  s.threads = 1;
  std::ostringstream a, b;
  write_records_csv(a, run_study(s), "# test");
  s.threads = 3;
  write_records_csv(b, run_study(s), "# test");
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# test\nrep,seed,method,b1,b2,objective", 0) == 0);
}

TEST_CASE("failures are counted, not thrown")
{
  McStudySpec s;
  DesignSpec d = table1_design(2, true, 50, 0);
  d.K = 1;
  d.target_cov = Eigen::MatrixXd::Constant(1, 1, 2.0);
  d.intercepts = Eigen::Vector2d(1, 1);
  d.beta_true = Eigen::VectorXd::Ones(1);
  d.meas_error_law.assign(1, NormalLaw{});
  s.design = d;
  s.reps = 3;
  s.methods = { Method::C4, Method::OLS };
  const McResult r = run_study(s);
  CHECK(r.summary[0].method_failed);
  CHECK(r.summary[0].n_failed == 3);
  CHECK(r.summary[1].n_ok == 3);
  std::ostringstream out;
  write_summary_csv(out, r, "");
  CHECK(out.str().find("C4,b1,nan,nan,nan,nan,nan,0,3,MethodFailed") != std::string::npos);
}

TEST_CASE("study spec validation")
{
  McStudySpec s;
  s.design = table1_design(1, true, 100, 0);
  s.reps = 1;
  CHECK_THROWS_AS(run_study(s), InvalidSpec);
  s.reps = 2;
  s.methods.clear();
  CHECK_THROWS_AS(run_study(s), InvalidSpec);
}

TEST_CASE("consistency sweep")
{
  ConsistencySpec c;
  c.design = test::noiseless_design(100, 0);
  c.n_values = { 100, 400 };
  c.reps = 2;
  c.methods = { Method::OLS };
  const auto rows = consistency_sweep(c);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows)
    CHECK(r.rmse < 1e-12);

  c.design = table1_design(2, true, 100, 0);
  c.n_values = { 2000, 20000 };
  c.reps = 5;
  const auto att = consistency_sweep(c);
  CHECK(att[1].rmse == doctest::Approx(0.25).epsilon(0.1));

  c.n_values = { 400, 100 };
  CHECK_THROWS_AS(consistency_sweep(c), InvalidSpec);
  c.n_values = { 400 };
  CHECK_THROWS_AS(consistency_sweep(c), InvalidSpec);
}

TEST_CASE("table output shape")
{
  Table1Spec t;
  t.reps = 2;
  t.n_obs = 200;
  t.methods = { Method::OLS, Method::C3 };
  const auto cells = run_table1(t);
  REQUIRE(cells.size() == 6);
  std::ostringstream out;
  write_table1_csv(out, cells, "");
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "design,with_error,method,coef,mean,sd,q05,q50,q95,n_ok,n_failed,status");
  while (std::getline(in, line))
    ++rows;
  CHECK(rows == 6 * 2 * 2);
  CHECK(cells[0].design == 1);
  CHECK_FALSE(cells[0].with_error);
  CHECK(cells[5].with_error);
}
