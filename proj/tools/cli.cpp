#include "cli.hpp"

#include "eivpd/baselines.hpp"
#include "eivpd/diagnostics.hpp"
#include "eivpd/errors.hpp"
#include "eivpd/io.hpp"
#include "eivpd/montecarlo.hpp"
#include "eivpd/optimizer.hpp"
#include "eivpd/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace eivpd::cli {

namespace {

namespace fs = std::filesystem;

struct KeyInfo
{
  const char* key;
  const char* help;
};

// Every config key; each one is also a flag (underscores become dashes).
constexpr KeyInfo kKeys[] = {
  { "preset", "design preset: design1, design2, design3, t10, common_factor, normal" },
  { "with_error", "add N(0,1) measurement error to the preset (true/false)" },
  { "K", "number of regressors" },
  { "latent_law", "law of the latent regressors, e.g. chisq(5)" },
  { "target_cov", "latent covariance, rows separated by ';'" },
  { "intercepts", "alpha_1..alpha_K,alpha_Y" },
  { "beta_true", "true slopes" },
  { "meas_error_law", "measurement error law(s), ';'-separated per regressor" },
  { "eps_law", "law of the equation error" },
  { "n_obs", "sample size" },
  { "seed", "master seed" },
  { "u_max", "half-width of the frequency weight support" },
  { "grid_size", "number of quadrature nodes (odd)" },
  { "denom_floor", "trimming floor for |s0|" },
  { "weight", "weight function: uniform or trunc_gaussian" },
  { "sigma", "scale of the truncated Gaussian weight" },
  { "pair_weights", "comma-separated weight per residual pair" },
  { "bounds", "search box as lo1,..,loK;hi1,..,hiK" },
  { "random_starts", "random starts added to the default start set" },
  { "tol_x", "simplex diameter tolerance" },
  { "tol_f", "objective spread tolerance" },
  { "max_iter", "iteration cap per local search" },
  { "method", "estimator for estimate: pd, ols, c3, c4" },
  { "methods", "comma-separated estimators for studies" },
  { "reps", "Monte Carlo replications" },
  { "threads", "worker threads (falls back to EIV_THREADS)" },
  { "c", "scaling vector for the equivalence demo" },
  { "n_values", "ascending sample sizes for the consistency sweep" },
  { "curve_u_max", "largest |u| of the derivative-curve grid" },
  { "curve_points", "number of derivative-curve nodes (odd)" },
  { "band_lower", "lower band quantile" },
  { "band_upper", "upper band quantile" },
  { "latent", "gen: also write latent columns (true/false)" },
  { "input", "dataset CSV for estimate" },
  { "profile_width", "estimate: half-width of the objective profile around b_hat" },
  { "profile_points", "estimate: points per profile axis" },
};

bool known_key(const std::string& key)
{
  for (const auto& k : kKeys)
    if (key == k.key)
      return true;
  return false;
}

class UsageError : public Error
{
public:
  using Error::Error;
};

struct Context
{
  Config cfg;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;

  const std::string* find(const std::string& key) const
  {
    const auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const
  {
    const auto* v = find(key);
    return v ? *v : fallback;
  }
  double num(const std::string& key, double fallback) const
  {
    const auto* v = find(key);
    if (!v)
      return fallback;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size())
        throw std::invalid_argument(*v);
      return d;
    } catch (const std::exception&) {
      throw UsageError("key '" + key + "' expects a number, got '" + *v + "'");
    }
  }
  int integer(const std::string& key, int fallback) const
  {
    const double d = num(key, fallback);
    if (d != static_cast<int>(d))
      throw UsageError("key '" + key + "' expects an integer");
    return static_cast<int>(d);
  }
  std::uint64_t seed() const
  {
    const auto* v = find("seed");
    if (!v)
      return 1;
    try {
      return std::stoull(*v);
    } catch (const std::exception&) {
      throw UsageError("seed must be a nonnegative integer");
    }
  }
  int threads() const
  {
    const int t = integer("threads", default_threads());
    if (t < 1)
      throw UsageError("threads must be >= 1");
    return t;
  }
  std::string provenance() const { return provenance_line(cfg, seed()); }
};

void write_file(const fs::path& path, const std::string& body)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error("cannot open output file: " + path.string());
  f << body;
  if (!f)
    throw Error("failed writing: " + path.string());
}

ObjectiveSpec objective_from(const Context& ctx)
{
  ObjectiveSpec spec;
  spec.weight.u_max = ctx.num("u_max", spec.weight.u_max);
  spec.weight.sigma = ctx.num("sigma", spec.weight.sigma);
  const std::string w = ctx.str("weight", "uniform");
  if (w == "uniform")
    spec.weight.kind = WeightSpec::Kind::uniform_symmetric;
  else if (w == "trunc_gaussian")
    spec.weight.kind = WeightSpec::Kind::trunc_gaussian;
  else
    throw UsageError("unknown weight: " + w);
  if (const auto* v = ctx.find("pair_weights")) {
    const Eigen::VectorXd pw = parse_vector(*v);
    spec.weight.per_pair_weights.assign(pw.data(), pw.data() + pw.size());
  }
  spec.grid_size = ctx.integer("grid_size", spec.grid_size);
  spec.denom_floor = ctx.num("denom_floor", spec.denom_floor);
  validate(spec);
  return spec;
}

SearchConfig search_from(const Context& ctx, int K)
{
  SearchConfig cfg;
  if (const auto* v = ctx.find("bounds")) {
    const Eigen::MatrixXd m = parse_matrix(*v);
    if (m.rows() != 2 || m.cols() != K)
      throw UsageError("bounds must be lo1,..,loK;hi1,..,hiK with K = " + std::to_string(K));
    cfg.bounds = Bounds{ m.row(0).transpose(), m.row(1).transpose() };
  }
  cfg.random_starts = ctx.integer("random_starts", cfg.random_starts);
  cfg.tol_x = ctx.num("tol_x", cfg.tol_x);
  cfg.tol_f = ctx.num("tol_f", cfg.tol_f);
  cfg.max_iter = ctx.integer("max_iter", cfg.max_iter);
  cfg.seed = ctx.seed();
  return cfg;
}

std::vector<Method> methods_from(const Context& ctx, const std::string& fallback)
{
  std::vector<Method> out;
  std::stringstream ss(ctx.str("methods", fallback));
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(parse_method(item));
  if (out.empty())
    throw UsageError("no methods given");
  return out;
}

DesignSpec design_from(const Context& ctx, const std::string& default_preset)
{
  Config c = ctx.cfg;
  if (!c.count("preset"))
    c["preset"] = default_preset;
  return design_from_config(c);
}

std::string file_label(const VarPair& p)
{
  return p.first.label() + "_" + p.second.label();
}

// --- commands ---------------------------------------------------------------

int cmd_gen(Context& ctx)
{
  const DesignSpec spec = design_from(ctx, "design2");
  const bool with_latent = parse_bool(ctx.str("latent", "false"));
  const Dataset data = gen_dataset(spec);
  std::ostringstream csv;
  write_dataset_csv(csv, data, with_latent, ctx.provenance());
  write_file(ctx.out_dir / "dataset.csv", csv.str());
  write_file(ctx.out_dir / "design.cfg",
             "# " + std::string("eivpd ") + kToolVersion + "\n" + format_config(design_to_config(spec)));
  ctx.out << "wrote " << (ctx.out_dir / "dataset.csv").string() << " (" << data.n() << " rows)\n";
  return 0;
}

int cmd_estimate(Context& ctx)
{
  const auto* input = ctx.find("input");
  if (!input)
    throw UsageError("estimate needs --input");
  const Dataset data = read_dataset_file(*input);
  const Method method = parse_method(ctx.str("method", "pd"));

  EstimateReport rep;
  if (method == Method::PD) {
    const ObjectiveSpec spec = objective_from(ctx);
    rep = maximize(data, spec, search_from(ctx, data.k()));

    const Objective objective(data, spec);
    std::vector<double> denom;
    const auto table = objective.residual_table(rep.b_hat, &denom);
    std::ostringstream res;
    res << ctx.provenance() << "\nu,pair,re_residual,im_residual,denom_mag\n";
    for (int j = 0; j < objective.grid().size(); ++j)
      for (std::size_t p = 0; p < objective.pairs().size(); ++p)
        res << format_double(objective.grid().nodes[j]) << ',' << objective.pairs()[p].label() << ','
            << format_double(table[j][p].real()) << ',' << format_double(table[j][p].imag()) << ','
            << format_double(denom[j]) << '\n';
    write_file(ctx.out_dir / "residuals.csv", res.str());

    const double width = ctx.num("profile_width", 0.5);
    const int points = ctx.integer("profile_points", 21);
    if (points < 1 || !(width >= 0))
      throw UsageError("profile_points must be >= 1 and profile_width >= 0");
    std::vector<double> deltas;
    for (int i = 0; i < points; ++i)
      deltas.push_back(points == 1 ? 0.0 : -width + 2.0 * width * i / (points - 1));
    std::ostringstream prof;
    prof << ctx.provenance() << "\naxis,delta,q_hat,degenerate\n";
    for (int k = 0; k < data.k(); ++k)
      for (const auto& pt : profile_curve(data, rep.b_hat, k, deltas, spec))
        prof << (k + 1) << ',' << format_double(pt.delta) << ',' << format_double(pt.q_hat) << ','
             << (pt.degenerate ? 1 : 0) << '\n';
    write_file(ctx.out_dir / "profile.csv", prof.str());
  } else {
    rep = run_method(method, data, ObjectiveSpec{}, SearchConfig{});
  }

  write_file(ctx.out_dir / "report.csv",
             ctx.provenance() + "\n" + report_csv_header(data.k()) + "\n" + report_csv_row(rep) + "\n");
  write_file(ctx.out_dir / "report.txt", report_text(rep));
  ctx.out << report_text(rep);
  return 0;
}

int cmd_table1(Context& ctx)
{
  Table1Spec spec;
  spec.reps = ctx.integer("reps", spec.reps);
  spec.n_obs = ctx.integer("n_obs", spec.n_obs);
  spec.methods = methods_from(ctx, "pd,ols,c3,c4");
  spec.objective = objective_from(ctx);
  spec.search = search_from(ctx, 2);
  spec.master_seed = ctx.seed();
  spec.threads = ctx.threads();
  const auto cells = run_table1(spec);

  std::ostringstream table;
  write_table1_csv(table, cells, ctx.provenance());
  write_file(ctx.out_dir / "table1.csv", table.str());
  std::ostringstream records;
  write_table1_records_csv(records, cells, ctx.provenance());
  write_file(ctx.out_dir / "table1_records.csv", records.str());
  ctx.out << table.str();
  return 0;
}

DerivativeCurveSet curves_from(const Context& ctx)
{
  const DesignSpec design = design_from(ctx, "design2");
  CurveOptions opts;
  opts.reps = ctx.integer("reps", opts.reps);
  opts.denom_floor = ctx.num("denom_floor", opts.denom_floor);
  opts.lower = ctx.num("band_lower", opts.lower);
  opts.upper = ctx.num("band_upper", opts.upper);
  opts.threads = ctx.threads();
  const double u_max = ctx.num("curve_u_max", 1.0);
  const int points = ctx.integer("curve_points", 41);
  if (!(u_max > 0) || points < 3 || points % 2 == 0)
    throw UsageError("curve grid needs curve_u_max > 0 and an odd curve_points >= 3");
  const int c = points / 2;
  for (int j = 0; j < points; ++j)
    opts.u_grid.push_back(u_max * (j - c) / c);
  return curve_bands(design, opts);
}

std::string verdict_text(const DerivativeCurveSet& curves, const std::vector<PairVerdict>& verdicts)
{
  std::ostringstream v;
  int truncated = 0;
  for (bool t : curves.truncated)
    truncated += t ? 1 : 0;
  v << "reps = " << curves.reps << "\n";
  v << "truncated_nodes = " << truncated << "\n";
  for (const auto& pv : verdicts) {
    const std::string p = pv.pair.label();
    v << p << ".verdict = " << (pv.variation ? "variation" : "no-variation") << "\n";
    v << p << ".margin_re = " << format_double(pv.margin_re) << "\n";
    v << p << ".margin_im = " << format_double(pv.margin_im) << "\n";
  }
  return v.str();
}

int cmd_curves(Context& ctx, bool write_bands)
{
  const DerivativeCurveSet curves = curves_from(ctx);
  const auto verdicts = constant_fit_check(curves);
  if (write_bands) {
    for (std::size_t p = 0; p < curves.pairs.size(); ++p) {
      std::ostringstream csv;
      csv << ctx.provenance() << "\nu,q05_re,q50_re,q95_re,q05_im,q50_im,q95_im,n_reps\n";
      for (std::size_t j = 0; j < curves.u_grid.size(); ++j) {
        const CurveBand& b = curves.bands[p][j];
        csv << format_double(curves.u_grid[j]) << ',' << format_double(b.q_lo_re) << ','
            << format_double(b.q50_re) << ',' << format_double(b.q_hi_re) << ','
            << format_double(b.q_lo_im) << ',' << format_double(b.q50_im) << ','
            << format_double(b.q_hi_im) << ',' << b.n_reps << '\n';
      }
      write_file(ctx.out_dir / ("curves_" + file_label(curves.pairs[p]) + ".csv"), csv.str());
    }
  }
  const std::string text = ctx.provenance() + "\n" + verdict_text(curves, verdicts);
  write_file(ctx.out_dir / "verdict.txt", text);
  ctx.out << text;
  return 0;
}

int cmd_equivalence(Context& ctx)
{
  const DesignSpec design = design_from(ctx, "design1");
  const Eigen::VectorXd c = parse_vector(ctx.str("c", "2,2"));
  const EquivalenceReport rep = equivalence_demo(design, c);
  std::ostringstream t;
  t << ctx.provenance() << "\n";
  t << "c = " << format_vector(rep.c) << "\n";
  t << "beta_tilde = " << format_vector(rep.beta_tilde) << "\n";
  t << "n = " << rep.n << "\n";
  t << "max_abs_diff_x = " << format_double(rep.max_abs_diff_x) << "\n";
  t << "max_abs_diff_y = " << format_double(rep.max_abs_diff_y) << "\n";
  t << "tolerance = " << format_double(rep.tolerance) << "\n";
  t << "observables_match = " << (rep.exact_match ? "exact" : "mismatch") << "\n";
  t << "corr_xstar1_eps = " << format_double(rep.corr_xstar1_eps) << "\n";
  t << "corr_threshold = " << format_double(rep.corr_threshold) << "\n";
  t << "dependence_detected = " << (rep.dependence_detected ? "true" : "false") << "\n";
  write_file(ctx.out_dir / "equivalence.txt", t.str());
  ctx.out << t.str();
  return rep.exact_match ? 0 : 1;
}

int cmd_consistency(Context& ctx)
{
  ConsistencySpec spec;
  spec.design = design_from(ctx, "design2");
  for (double n : parse_vector(ctx.str("n_values", "1000,4000")))
    spec.n_values.push_back(static_cast<int>(n));
  spec.reps = ctx.integer("reps", spec.reps);
  spec.methods = methods_from(ctx, "pd");
  spec.objective = objective_from(ctx);
  spec.search = search_from(ctx, spec.design.K);
  spec.master_seed = ctx.seed();
  spec.threads = ctx.threads();
  std::ostringstream csv;
  write_consistency_csv(csv, consistency_sweep(spec), ctx.provenance());
  write_file(ctx.out_dir / "consistency.csv", csv.str());
  ctx.out << csv.str();
  return 0;
}

std::string dashed(std::string key)
{
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Errors-in-variables estimation from second derivatives of the empirical log "
                "characteristic function" };
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (created if missing)");

  std::vector<std::pair<std::string, std::string>> flag_values(std::size(kKeys));
  std::vector<CLI::Option*> flag_opts;
  for (std::size_t i = 0; i < std::size(kKeys); ++i) {
    flag_values[i].first = kKeys[i].key;
    std::string names = "--" + dashed(kKeys[i].key);
    if (std::string(kKeys[i].key) == "preset")
      names += ",--design";
    flag_opts.push_back(app.add_option(names, flag_values[i].second, kKeys[i].help));
  }

  const std::pair<const char*, const char*> commands[] = {
    { "gen", "generate a dataset CSV from a design" },
    { "estimate", "run one estimator on a dataset CSV" },
    { "table1", "Monte Carlo comparison over the three designs" },
    { "curves", "second-derivative curve bands and constant-fit verdicts" },
    { "normality-check", "constant-fit verdicts only" },
    { "equivalence-demo", "observational-equivalence construction" },
    { "consistency", "RMSE of b1 across sample sizes" },
  };
  for (const auto& [name, help] : commands)
    app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty())
    rev.pop_back(); // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    Config cfg;
    if (!config_path.empty()) {
      cfg = read_config_file(config_path);
      for (const auto& [key, value] : cfg)
        if (!known_key(key))
          throw UsageError("unknown config key: " + key);
    }
    for (std::size_t i = 0; i < flag_opts.size(); ++i)
      if (flag_opts[i]->count() > 0)
        cfg[flag_values[i].first] = flag_values[i].second;

    fs::create_directories(out_dir);
    Context ctx{ cfg, out_dir, out, err };
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "gen")
      return cmd_gen(ctx);
    if (cmd == "estimate")
      return cmd_estimate(ctx);
    if (cmd == "table1")
      return cmd_table1(ctx);
    if (cmd == "curves")
      return cmd_curves(ctx, true);
    if (cmd == "normality-check")
      return cmd_curves(ctx, false);
    if (cmd == "equivalence-demo")
      return cmd_equivalence(ctx);
    if (cmd == "consistency")
      return cmd_consistency(ctx);
    throw UsageError("unknown command: " + cmd);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidSpec& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidScaling& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace eivpd::cli
