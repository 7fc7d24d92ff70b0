#include "eivpd/io.hpp"

#include "eivpd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eivpd {

namespace {

std::string trim(const std::string& s)
{
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b)))
    ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1))))
    --e;
  return { b, e };
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_number(const std::string& text, double& v)
{
  const std::string t = trim(text);
  if (t.empty())
    return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && ptr == last;
}

double number_or_throw(const std::string& text, const std::string& what)
{
  double v = 0;
  if (!parse_number(text, v))
    throw InvalidSpec("cannot parse " + what + ": '" + text + "'");
  return v;
}

} // namespace

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Config parse_config(std::istream& in)
{
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", lineno);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("empty key", lineno);
    std::replace(key.begin(), key.end(), '-', '_');
    if (cfg.count(key))
      throw ParseError("duplicate key '" + key + "'", lineno);
    cfg[key] = value;
  }
  return cfg;
}

Config read_config_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidSpec("cannot open config file: " + path);
  return parse_config(in);
}

std::string format_config(const Config& cfg)
{
  std::string out;
  for (const auto& [k, v] : cfg)
    out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const Config& cfg)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : cfg) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v)
{
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance_line(const Config& cfg, std::uint64_t master_seed)
{
  return std::string("# eivpd ") + kToolVersion + " config_hash=" + hex64(config_hash(cfg)) +
         " master_seed=" + std::to_string(master_seed);
}

Eigen::VectorXd parse_vector(const std::string& text)
{
  const auto parts = split(text, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number_or_throw(parts[i], "vector entry");
  return v;
}

Eigen::MatrixXd parse_matrix(const std::string& text)
{
  const auto rows = split(text, ';');
  std::vector<Eigen::VectorXd> parsed;
  for (const auto& r : rows)
    parsed.push_back(parse_vector(r));
  const auto cols = parsed.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(parsed.size()), cols);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != cols)
      throw InvalidSpec("ragged matrix: " + text);
    m.row(static_cast<Eigen::Index>(i)) = parsed[i].transpose();
  }
  return m;
}

std::string format_vector(const Eigen::VectorXd& v)
{
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string format_matrix(const Eigen::MatrixXd& m)
{
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    out += (i ? ";" : "") + format_vector(m.row(i).transpose());
  return out;
}

bool parse_bool(const std::string& text)
{
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on")
    return true;
  if (t == "0" || t == "false" || t == "no" || t == "off")
    return false;
  throw InvalidSpec("cannot parse boolean: '" + text + "'");
}

DesignSpec design_from_config(const Config& cfg)
{
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
  };

  DesignSpec spec;
  const bool with_error = get("with_error") ? parse_bool(*get("with_error")) : true;
  int n_obs = 1000;
  if (const auto* v = get("n_obs"))
    n_obs = static_cast<int>(number_or_throw(*v, "n_obs"));
  std::uint64_t seed = 1;
  if (const auto* v = get("seed"))
    seed = std::stoull(*v);

  if (const auto* p = get("preset")) {
    spec = preset_design(*p, with_error, n_obs, seed);
  } else {
    spec = table1_design(2, with_error, n_obs, seed);
  }

  if (const auto* v = get("K"))
    spec.K = static_cast<int>(number_or_throw(*v, "K"));
  if (const auto* v = get("latent_law"))
    spec.latent_law = parse_law(*v);
  if (const auto* v = get("target_cov"))
    spec.target_cov = parse_matrix(*v);
  if (const auto* v = get("intercepts"))
    spec.intercepts = parse_vector(*v);
  if (const auto* v = get("beta_true"))
    spec.beta_true = parse_vector(*v);
  if (const auto* v = get("meas_error_law")) {
    const auto parts = split(*v, ';');
    spec.meas_error_law.clear();
    if (parts.size() == 1)
      spec.meas_error_law.assign(static_cast<std::size_t>(spec.K), parse_law(parts[0]));
    else
      for (const auto& p : parts)
        spec.meas_error_law.push_back(parse_law(p));
  } else if (static_cast<int>(spec.meas_error_law.size()) != spec.K &&
             !spec.meas_error_law.empty()) {
    spec.meas_error_law.assign(static_cast<std::size_t>(spec.K), spec.meas_error_law.front());
  }
  if (const auto* v = get("eps_law"))
    spec.eps_law = parse_law(*v);
  validate(spec);
  return spec;
}

Config design_to_config(const DesignSpec& spec)
{
  Config cfg;
  cfg["K"] = std::to_string(spec.K);
  cfg["latent_law"] = to_string(spec.latent_law);
  cfg["target_cov"] = format_matrix(spec.target_cov);
  cfg["intercepts"] = format_vector(spec.intercepts);
  cfg["beta_true"] = format_vector(spec.beta_true);
  std::string errs;
  for (std::size_t k = 0; k < spec.meas_error_law.size(); ++k)
    errs += (k ? ";" : "") + to_string(spec.meas_error_law[k]);
  cfg["meas_error_law"] = errs;
  cfg["eps_law"] = to_string(spec.eps_law);
  cfg["n_obs"] = std::to_string(spec.n_obs);
  cfg["seed"] = std::to_string(spec.seed);
  return cfg;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::string l = line;
  if (!l.empty() && l.back() == '\r')
    l.pop_back();
  auto parts = split(l, ',');
  for (auto& p : parts)
    p = trim(p);
  return parts;
}

void write_dataset_csv(std::ostream& out, const Dataset& data, bool with_latent,
                       const std::string& provenance)
{
  const int K = data.k();
  const bool latent = with_latent && data.latent.has_value();
  if (!provenance.empty())
    out << provenance << "\n";
  for (int k = 0; k < K; ++k)
    out << "x" << k + 1 << ",";
  out << "y";
  if (latent) {
    for (int k = 0; k < K; ++k)
      out << ",xstar" << k + 1;
    for (int k = 0; k < K; ++k)
      out << ",u" << k + 1;
    out << ",eps";
  }
  out << "\n";
  for (int n = 0; n < data.n(); ++n) {
    for (int k = 0; k < K; ++k)
      out << format_double(data.x(n, k)) << ",";
    out << format_double(data.y[n]);
    if (latent) {
      const Latent& lt = *data.latent;
      for (int k = 0; k < K; ++k)
        out << "," << format_double(lt.x_star(n, k));
      for (int k = 0; k < K; ++k)
        out << "," << format_double(lt.u(n, k));
      out << "," << format_double(lt.eps[n]);
    }
    out << "\n";
  }
}

Dataset read_dataset_csv(std::istream& in)
{
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#')
      continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty())
    throw ParseError("missing header line", lineno == 0 ? 1 : lineno);

  int K = 0;
  while (K < static_cast<int>(header.size()) && header[K] == "x" + std::to_string(K + 1))
    ++K;
  if (K == 0 || K >= static_cast<int>(header.size()) || header[K] != "y")
    throw ParseError("header must start with x1..xK,y", lineno);

  const std::size_t width = header.size();
  const bool latent = width == static_cast<std::size_t>(K + 1 + 2 * K + 1);
  if (latent) {
    for (int k = 0; k < K; ++k) {
      if (header[K + 1 + k] != "xstar" + std::to_string(k + 1) ||
          header[2 * K + 1 + k] != "u" + std::to_string(k + 1))
        throw ParseError("unexpected latent column names", lineno);
    }
    if (header.back() != "eps")
      throw ParseError("unexpected latent column names", lineno);
  } else if (width != static_cast<std::size_t>(K + 1)) {
    throw ParseError("unexpected extra columns after y", lineno);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                         std::to_string(fields.size()),
                       lineno);
    std::vector<double> row(width);
    for (std::size_t i = 0; i < width; ++i) {
      if (!parse_number(fields[i], row[i]) || !std::isfinite(row[i]))
        throw ParseError("bad numeric field '" + fields[i] + "'", lineno);
    }
    rows.push_back(std::move(row));
  }

  const int N = static_cast<int>(rows.size());
  Dataset d;
  d.x.resize(N, K);
  d.y.resize(N);
  if (latent) {
    Latent lt;
    lt.x_star.resize(N, K);
    lt.u.resize(N, K);
    lt.eps.resize(N);
    d.latent = std::move(lt);
  }
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k)
      d.x(n, k) = rows[n][k];
    d.y[n] = rows[n][K];
    if (latent) {
      for (int k = 0; k < K; ++k) {
        d.latent->x_star(n, k) = rows[n][K + 1 + k];
        d.latent->u(n, k) = rows[n][2 * K + 1 + k];
      }
      d.latent->eps[n] = rows[n][3 * K + 1];
    }
  }
  return d;
}

Dataset read_dataset_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidSpec("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

} // namespace eivpd
