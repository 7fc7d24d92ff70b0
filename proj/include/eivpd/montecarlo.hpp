#pragma once

#include "eivpd/datagen.hpp"
#include "eivpd/objective.hpp"
#include "eivpd/optimizer.hpp"
#include "eivpd/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace eivpd {

struct McStudySpec
{
  DesignSpec design;
  int reps = 100;
  std::vector<Method> methods{ Method::PD, Method::OLS, Method::C3, Method::C4 };
  ObjectiveSpec objective;
  SearchConfig search;
  std::uint64_t master_seed = 1;
  int threads = 1; // replications in flight
};

//! One method on one replication.
struct McRecord
{
  int rep = 0;
  std::uint64_t seed = 0; // dataset seed
  Method method = Method::PD;
  bool failed = false;
  std::string error;
  EstimateReport report;
};

struct CoefSummary
{
  double mean = 0.0;
  double sd = 0.0; // divisor n - 1
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

struct MethodSummary
{
  Method method = Method::PD;
  int n_ok = 0;
  int n_failed = 0;
  bool method_failed = false; // every replication failed
  int weak_instrument = 0;
  int flat_objective = 0;
  std::vector<CoefSummary> coef; // empty when method_failed
};

struct McResult
{
  int K = 0;
  std::vector<McRecord> records; // ordered by (rep, method)
  std::vector<MethodSummary> summary;
};

//! Runs every method on `reps` datasets. Dataset r uses seed
//! derive_seed(master_seed, r). Estimator failures are recorded and counted,
//! never rethrown.
McResult run_study(const McStudySpec& spec);

//! Summary statistics of the successful records, per method.
std::vector<MethodSummary> summarize(const std::vector<McRecord>& records,
                                     const std::vector<Method>& methods,
                                     int K);

//! Runs one estimator on one dataset.
EstimateReport run_method(Method m,
                          const Dataset& data,
                          const ObjectiveSpec& objective,
                          SearchConfig search);

//! Long format: rep,seed,method,b1..bK,objective,n_evals,converged,flags,error
void write_records_csv(std::ostream& out, const McResult& result, const std::string& provenance);
//! method,coef,mean,sd,q05,q50,q95,n_ok,n_failed,status
void write_summary_csv(std::ostream& out, const McResult& result, const std::string& provenance);

// --- comparison table -------------------------------------------------------

struct Table1Cell
{
  int design = 1;
  bool with_error = false;
  McResult result;
};

struct Table1Spec
{
  int reps = 100;
  int n_obs = 1000;
  std::vector<Method> methods{ Method::PD, Method::OLS, Method::C3, Method::C4 };
  ObjectiveSpec objective;
  SearchConfig search;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

//! Designs 1..3 x {no error, N(0,1) error}. Cell i uses master seed
//! derive_seed(master_seed, i).
std::vector<Table1Cell> run_table1(const Table1Spec& spec);

//! design,with_error,method,coef,mean,sd,q05,q50,q95,n_ok,n_failed,status
void write_table1_csv(std::ostream& out,
                      const std::vector<Table1Cell>& cells,
                      const std::string& provenance);
//! design,with_error,rep,seed,method,b1..bK,objective,n_evals,converged,flags,error
void write_table1_records_csv(std::ostream& out,
                              const std::vector<Table1Cell>& cells,
                              const std::string& provenance);

// --- consistency ----------------------------------------------------------

struct ConsistencyRow
{
  int n_obs = 0;
  Method method = Method::PD;
  double rmse = 0.0; // of b1 about beta_1, over successful replications
  int n_ok = 0;
  int n_failed = 0;
};

struct ConsistencySpec
{
  DesignSpec design;
  std::vector<int> n_values;
  int reps = 100;
  std::vector<Method> methods{ Method::PD };
  ObjectiveSpec objective;
  SearchConfig search;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

//! RMSE per (N, method). n_values must be ascending with at least two entries.
std::vector<ConsistencyRow> consistency_sweep(const ConsistencySpec& spec);

//! n_obs,method,rmse,n_ok,n_failed
void write_consistency_csv(std::ostream& out,
                           const std::vector<ConsistencyRow>& rows,
                           const std::string& provenance);

} // namespace eivpd
