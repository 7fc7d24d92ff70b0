#include "eivpd/montecarlo.hpp"

#include "eivpd/baselines.hpp"
#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"
#include "eivpd/parallel.hpp"
#include "eivpd/rng.hpp"
#include "eivpd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace eivpd {

namespace {

void check_methods(const std::vector<Method>& methods)
{
  if (methods.empty())
    throw InvalidSpec("at least one method is required");
}

void put_provenance(std::ostream& out, const std::string& provenance)
{
  if (!provenance.empty())
    out << provenance << '\n';
}

} // namespace

EstimateReport run_method(Method m,
                          const Dataset& data,
                          const ObjectiveSpec& objective,
                          SearchConfig search)
{
  switch (m) {
    case Method::PD:
      return maximize(data, objective, std::move(search));
    case Method::OLS:
      return ols(data);
    case Method::C3:
      return iv_estimate(data, { IvSpec::Kind::C3 });
    case Method::C4:
      return iv_estimate(data, { IvSpec::Kind::C4 });
  }
  throw InvalidSpec("unknown method");
}

McResult run_study(const McStudySpec& spec)
{
  if (spec.reps < 2)
    throw InvalidSpec("a study needs at least two replications");
  check_methods(spec.methods);
  validate(spec.design);
  validate(spec.objective);

  const int M = static_cast<int>(spec.methods.size());
  McResult result;
  result.K = spec.design.K;
  result.records.resize(static_cast<std::size_t>(spec.reps) * M);

  parallel_for(spec.reps, spec.threads, [&](int r) {
    DesignSpec design = spec.design;
    design.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(r));
    const Dataset data = gen_dataset(design);
    for (int i = 0; i < M; ++i) {
      McRecord& rec = result.records[static_cast<std::size_t>(r) * M + i];
      rec.rep = r;
      rec.seed = design.seed;
      rec.method = spec.methods[i];
      SearchConfig search = spec.search;
      search.seed = design.seed;
      try {
        rec.report = run_method(rec.method, data, spec.objective, std::move(search));
      } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  });

  result.summary = summarize(result.records, spec.methods, result.K);
  return result;
}

std::vector<MethodSummary> summarize(const std::vector<McRecord>& records,
                                     const std::vector<Method>& methods,
                                     int K)
{
  std::vector<MethodSummary> out;
  for (Method m : methods) {
    MethodSummary s;
    s.method = m;
    std::vector<std::vector<double>> est(static_cast<std::size_t>(K));
    for (const auto& rec : records) {
      if (rec.method != m)
        continue;
      if (rec.failed) {
        ++s.n_failed;
        continue;
      }
      ++s.n_ok;
      s.weak_instrument += rec.report.weak_instrument ? 1 : 0;
      s.flat_objective += rec.report.flat_objective ? 1 : 0;
      for (int k = 0; k < K; ++k)
        est[k].push_back(rec.report.b_hat[k]);
    }
    s.method_failed = s.n_ok == 0;
    if (!s.method_failed) {
      for (int k = 0; k < K; ++k) {
        CoefSummary c;
        c.mean = mean(est[k]);
        c.sd = stddev(est[k]);
        c.q05 = quantile(est[k], 0.05);
        c.q50 = quantile(est[k], 0.5);
        c.q95 = quantile(est[k], 0.95);
        s.coef.push_back(c);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

void write_record_rows(std::ostream& out, const std::string& prefix, const McResult& result)
{
  for (const auto& rec : result.records) {
    out << prefix << rec.rep << ',' << rec.seed << ',';
    if (rec.failed) {
      out << to_string(rec.method);
      for (int k = 0; k < result.K; ++k)
        out << ",nan";
      std::string msg = rec.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << ",nan,0,0,," << msg << '\n';
    } else {
      out << report_csv_row(rec.report) << ",\n";
    }
  }
}

} // namespace

void write_records_csv(std::ostream& out, const McResult& result, const std::string& provenance)
{
  put_provenance(out, provenance);
  out << "rep,seed," << report_csv_header(result.K) << ",error\n";
  write_record_rows(out, "", result);
}

namespace {

void write_summary_rows(std::ostream& out, const std::string& prefix, const McResult& result)
{
  for (const auto& s : result.summary) {
    const char* status = s.method_failed ? "MethodFailed" : "ok";
    for (int k = 0; k < result.K; ++k) {
      out << prefix << to_string(s.method) << ",b" << (k + 1) << ',';
      if (s.method_failed) {
        out << "nan,nan,nan,nan,nan";
      } else {
        const CoefSummary& c = s.coef[k];
        out << format_double(c.mean) << ',' << format_double(c.sd) << ',' << format_double(c.q05)
            << ',' << format_double(c.q50) << ',' << format_double(c.q95);
      }
      out << ',' << s.n_ok << ',' << s.n_failed << ',' << status << '\n';
    }
  }
}

} // namespace

void write_summary_csv(std::ostream& out, const McResult& result, const std::string& provenance)
{
  put_provenance(out, provenance);
  out << "method,coef,mean,sd,q05,q50,q95,n_ok,n_failed,status\n";
  write_summary_rows(out, "", result);
}

std::vector<Table1Cell> run_table1(const Table1Spec& spec)
{
  std::vector<Table1Cell> cells;
  int index = 0;
  for (bool with_error : { false, true }) {
    for (int design = 1; design <= 3; ++design, ++index) {
      McStudySpec study;
      study.design = table1_design(design, with_error, spec.n_obs, 0);
      study.reps = spec.reps;
      study.methods = spec.methods;
      study.objective = spec.objective;
      study.search = spec.search;
      study.master_seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(index));
      study.threads = spec.threads;
      cells.push_back({ design, with_error, run_study(study) });
    }
  }
  return cells;
}

void write_table1_csv(std::ostream& out,
                      const std::vector<Table1Cell>& cells,
                      const std::string& provenance)
{
  put_provenance(out, provenance);
  out << "design,with_error,method,coef,mean,sd,q05,q50,q95,n_ok,n_failed,status\n";
  for (const auto& cell : cells)
    write_summary_rows(out,
                       std::to_string(cell.design) + "," + (cell.with_error ? "1" : "0") + ",",
                       cell.result);
}

void write_table1_records_csv(std::ostream& out,
                              const std::vector<Table1Cell>& cells,
                              const std::string& provenance)
{
  put_provenance(out, provenance);
  out << "design,with_error,rep,seed," << report_csv_header(2) << ",error\n";
  for (const auto& cell : cells)
    write_record_rows(out,
                      std::to_string(cell.design) + "," + (cell.with_error ? "1" : "0") + ",",
                      cell.result);
}

std::vector<ConsistencyRow> consistency_sweep(const ConsistencySpec& spec)
{
  if (spec.n_values.size() < 2)
    throw InvalidSpec("consistency sweep needs at least two sample sizes");
  for (std::size_t i = 1; i < spec.n_values.size(); ++i)
    if (spec.n_values[i] <= spec.n_values[i - 1])
      throw InvalidSpec("sample sizes must be strictly ascending");

  std::vector<ConsistencyRow> rows;
  for (std::size_t i = 0; i < spec.n_values.size(); ++i) {
    McStudySpec study;
    study.design = spec.design;
    study.design.n_obs = spec.n_values[i];
    study.reps = spec.reps;
    study.methods = spec.methods;
    study.objective = spec.objective;
    study.search = spec.search;
    study.master_seed = derive_seed(spec.master_seed, i);
    study.threads = spec.threads;
    const McResult res = run_study(study);
    for (Method m : spec.methods) {
      ConsistencyRow row;
      row.n_obs = spec.n_values[i];
      row.method = m;
      double ss = 0.0;
      for (const auto& rec : res.records) {
        if (rec.method != m)
          continue;
        if (rec.failed) {
          ++row.n_failed;
          continue;
        }
        const double d = rec.report.b_hat[0] - spec.design.beta_true[0];
        ss += d * d;
        ++row.n_ok;
      }
      row.rmse = row.n_ok > 0 ? std::sqrt(ss / row.n_ok) : std::nan("");
      rows.push_back(row);
    }
  }
  return rows;
}

void write_consistency_csv(std::ostream& out,
                           const std::vector<ConsistencyRow>& rows,
                           const std::string& provenance)
{
  put_provenance(out, provenance);
  out << "n_obs,method,rmse,n_ok,n_failed\n";
  for (const auto& r : rows)
    out << r.n_obs << ',' << to_string(r.method) << ',' << format_double(r.rmse) << ','
        << r.n_ok << ',' << r.n_failed << '\n';
}

} // namespace eivpd
