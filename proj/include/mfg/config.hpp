#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mfg/errors.hpp"
#include "mfg/model.hpp"
#include "mfg/regress.hpp"

namespace mfg {

/// Invalid configuration document; `path()` is the dotted field path, e.g.
/// "model.N".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct SweepSpec {
  std::vector<double> gamma_pen;
  std::vector<double> lambda;
  std::vector<double> rho;
};

struct RunFlags {
  bool antithetic = false;
  bool oracle_crosscheck = false;
  bool ensemble_dump = false;
  // Same seeds at every sweep point. When off, point j uses
  // seed + j * repetitions + r.
  bool common_random_numbers = true;
};

using TableRow = std::array<double, 3>;  // gamma_pen, lambda, rho

/// The nine distinct parameter rows of the reference price table, in table order.
std::vector<TableRow> default_table_rows();

struct RunConfig {
  ModelParams model;
  FeatureSpec features;
  std::string out_dir = "out";
  int repetitions = 1;
  SweepSpec sweep;  // each list defaults to the single model value
  RunFlags flags;
  int oracle_nodes = 32;
  std::uint64_t memory_budget_mb = 8192;
  std::optional<std::string> ensemble_file;  // replay increments for repetition 0
  std::vector<TableRow> table_rows = default_table_rows();
};

/// Parses a config document. Every key is optional; unknown keys, wrong types
/// and out-of-range values throw ConfigError naming the field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& file);

/// Full echo of `config`; parse_config(to_json(c)) reproduces `c`.
nlohmann::json to_json(const RunConfig& config);

}  // namespace mfg
