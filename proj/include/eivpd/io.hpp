#pragma once

#include "eivpd/datagen.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace eivpd {

inline constexpr const char* kToolVersion = "0.1.0";

//! Shortest round-trip representation ("%.17g").
std::string format_double(double v);

// --- flat key-value config ------------------------------------------------

//! "key = value" lines; '#' starts a comment. Keys are unique.
using Config = std::map<std::string, std::string>;

Config parse_config(std::istream& in);
Config read_config_file(const std::string& path);
std::string format_config(const Config& cfg);

//! FNV-1a over the canonical (sorted) "key=value\n" rendering.
std::uint64_t config_hash(const Config& cfg);
std::string hex64(std::uint64_t v);

//! "# eivpd <version> config_hash=<hex> master_seed=<seed>"
std::string provenance_line(const Config& cfg, std::uint64_t master_seed);

//! Builds a design from keys K, latent_law, target_cov ("2,1;1,2"),
//! intercepts, beta_true, meas_error_law (one law, or one per regressor
//! separated by ';'), eps_law, n_obs, seed. An optional `preset` key
//! (design1, design2, design3, t10, common_factor, normal) together with
//! `with_error` provides defaults that the other keys override.
DesignSpec design_from_config(const Config& cfg);
Config design_to_config(const DesignSpec& spec);

Eigen::VectorXd parse_vector(const std::string& text);
Eigen::MatrixXd parse_matrix(const std::string& text);
std::string format_vector(const Eigen::VectorXd& v);
std::string format_matrix(const Eigen::MatrixXd& m);
bool parse_bool(const std::string& text);

// --- CSV ------------------------------------------------------------------

//! Header x1..xK,y, plus xstar1..xstarK,u1..uK,eps when latent columns are
//! requested and present. Lines starting with '#' are comments.
void write_dataset_csv(std::ostream& out, const Dataset& data, bool with_latent,
                       const std::string& provenance = {});

//! Parses a dataset CSV. Latent columns are loaded when all are present.
//! Throws ParseError with the offending line number.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_file(const std::string& path);

//! Splits one CSV line on commas (no quoting; all fields are numeric or
//! simple labels).
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace eivpd
