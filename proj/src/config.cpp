#include "mfg/config.hpp"

#include <fstream>
#include <set>

namespace mfg {

std::vector<TableRow> default_table_rows() {
  return {
      {0.15, 0.0, 0.5}, {0.3, 0.0, 0.5},  {0.45, 0.0, 0.5},
      {0.3, 0.2, 0.5},  {0.3, 0.4, 0.5},  {0.3, 0.4, 0.0},
      {0.3, 0.4, 0.25}, {0.3, 0.4, 0.75}, {0.3, 0.4, 1.0},
  };
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> known) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <typename T>
void read(const json& obj, const std::string& path, const std::string& key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string where = join(path, key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          throw ConfigError(where, "expected a nonnegative integer");
        }
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where, "expected a string");
    }
    out = v.get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError(where, ex.what());
  }
}

std::vector<double> read_list(const json& obj, const std::string& path, const std::string& key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  const std::string where = join(path, key);
  if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
  if (v.empty()) throw ConfigError(where, "sweep list must be nonempty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  reject_unknown(doc, "", {"model", "features", "out_dir", "repetitions", "sweep", "flags",
                           "oracle", "memory_budget_mb", "ensemble_file", "table_rows"});

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    reject_unknown(m, "model", {"T", "gamma_star", "rho", "lambda", "gamma_pen", "sigma0", "mu",
                                "v_bar", "c_bar", "c2_bar", "sigma_idio", "n", "N", "p", "n_iter",
                                "seed"});
    ModelParams& p = c.model;
    read(m, "model", "T", p.T);
    read(m, "model", "gamma_star", p.gamma_star);
    read(m, "model", "rho", p.rho);
    read(m, "model", "lambda", p.lambda);
    read(m, "model", "gamma_pen", p.gamma_pen);
    read(m, "model", "sigma0", p.sigma0);
    read(m, "model", "mu", p.mu);
    read(m, "model", "v_bar", p.v_bar);
    read(m, "model", "c_bar", p.c_bar);
    read(m, "model", "c2_bar", p.c2_bar);
    read(m, "model", "sigma_idio", p.sigma_idio);
    read(m, "model", "n", p.n);
    read(m, "model", "N", p.N);
    read(m, "model", "p", p.p);
    read(m, "model", "n_iter", p.n_iter);
    read(m, "model", "seed", p.seed);
  }
  try {
    validate(c.model);
  } catch (const ParameterError& ex) {
    throw ConfigError("model." + ex.field(), ex.message());
  }

  if (doc.contains("features")) {
    const json& f = doc.at("features");
    reject_unknown(f, "features", {"kind", "degree", "ridge"});
    std::string kind = std::string(to_string(c.features.kind));
    read(f, "features", "kind", kind);
    try {
      c.features.kind = feature_kind_from_string(kind);
    } catch (const ParameterError& ex) {
      throw ConfigError("features.kind", ex.message());
    }
    read(f, "features", "degree", c.features.degree);
    read(f, "features", "ridge", c.features.ridge);
  }
  try {
    validate(c.features);
  } catch (const ParameterError& ex) {
    throw ConfigError("features." + ex.field(), ex.message());
  }

  read(doc, "", "out_dir", c.out_dir);
  read(doc, "", "repetitions", c.repetitions);
  if (c.repetitions < 1) throw ConfigError("repetitions", "must be >= 1");

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    reject_unknown(s, "sweep", {"gamma_pen", "lambda", "rho"});
    c.sweep.gamma_pen = read_list(s, "sweep", "gamma_pen");
    c.sweep.lambda = read_list(s, "sweep", "lambda");
    c.sweep.rho = read_list(s, "sweep", "rho");
  }
  if (c.sweep.gamma_pen.empty()) c.sweep.gamma_pen = {c.model.gamma_pen};
  if (c.sweep.lambda.empty()) c.sweep.lambda = {c.model.lambda};
  if (c.sweep.rho.empty()) c.sweep.rho = {c.model.rho};
  for (std::size_t i = 0; i < c.sweep.gamma_pen.size(); ++i) {
    if (!(c.sweep.gamma_pen[i] >= 0.0)) {
      throw ConfigError("sweep.gamma_pen[" + std::to_string(i) + "]", "must be >= 0");
    }
  }
  for (std::size_t i = 0; i < c.sweep.rho.size(); ++i) {
    if (!(c.sweep.rho[i] >= 0.0 && c.sweep.rho[i] <= 1.0)) {
      throw ConfigError("sweep.rho[" + std::to_string(i) + "]", "must lie in [0, 1]");
    }
  }

  if (doc.contains("flags")) {
    const json& f = doc.at("flags");
    reject_unknown(f, "flags",
                   {"antithetic", "oracle_crosscheck", "ensemble_dump", "common_random_numbers"});
    read(f, "flags", "antithetic", c.flags.antithetic);
    read(f, "flags", "oracle_crosscheck", c.flags.oracle_crosscheck);
    read(f, "flags", "ensemble_dump", c.flags.ensemble_dump);
    read(f, "flags", "common_random_numbers", c.flags.common_random_numbers);
  }
  if (c.flags.oracle_crosscheck && c.model.n > 2) {
    throw ConfigError("flags.oracle_crosscheck", "requires model.n <= 2");
  }

  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    reject_unknown(o, "oracle", {"nodes"});
    read(o, "oracle", "nodes", c.oracle_nodes);
  }
  if (c.oracle_nodes < 1 || c.oracle_nodes > 64) throw ConfigError("oracle.nodes", "must be in [1, 64]");

  read(doc, "", "memory_budget_mb", c.memory_budget_mb);
  if (doc.contains("ensemble_file")) {
    std::string file;
    read(doc, "", "ensemble_file", file);
    c.ensemble_file = file;
  }

  if (doc.contains("table_rows")) {
    const json& rows = doc.at("table_rows");
    if (!rows.is_array() || rows.empty()) throw ConfigError("table_rows", "expected a nonempty array");
    c.table_rows.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "table_rows[" + std::to_string(i) + "]";
      const json& r = rows[i];
      if (!r.is_array() || r.size() != 3 || !r[0].is_number() || !r[1].is_number() ||
          !r[2].is_number()) {
        throw ConfigError(where, "expected [gamma_pen, lambda, rho]");
      }
      const TableRow row{r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
      if (!(row[0] >= 0.0)) throw ConfigError(where, "gamma_pen must be >= 0");
      if (!(row[2] >= 0.0 && row[2] <= 1.0)) throw ConfigError(where, "rho must lie in [0, 1]");
      c.table_rows.push_back(row);
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("<file>", "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + ex.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const RunConfig& c) {
  const ModelParams& p = c.model;
  json doc;
  doc["model"] = {{"T", p.T},         {"gamma_star", p.gamma_star}, {"rho", p.rho},
                  {"lambda", p.lambda}, {"gamma_pen", p.gamma_pen},   {"sigma0", p.sigma0},
                  {"mu", p.mu},       {"v_bar", p.v_bar},           {"c_bar", p.c_bar},
                  {"c2_bar", p.c2_bar}, {"sigma_idio", p.sigma_idio}, {"n", p.n},
                  {"N", p.N},         {"p", p.p},                   {"n_iter", p.n_iter},
                  {"seed", p.seed}};
  doc["features"] = {{"kind", std::string(to_string(c.features.kind))},
                     {"degree", c.features.degree},
                     {"ridge", c.features.ridge}};
  doc["out_dir"] = c.out_dir;
  doc["repetitions"] = c.repetitions;
  doc["sweep"] = {{"gamma_pen", c.sweep.gamma_pen}, {"lambda", c.sweep.lambda}, {"rho", c.sweep.rho}};
  doc["flags"] = {{"antithetic", c.flags.antithetic},
                  {"oracle_crosscheck", c.flags.oracle_crosscheck},
                  {"ensemble_dump", c.flags.ensemble_dump},
                  {"common_random_numbers", c.flags.common_random_numbers}};
  doc["oracle"] = {{"nodes", c.oracle_nodes}};
  doc["memory_budget_mb"] = c.memory_budget_mb;
  if (c.ensemble_file) doc["ensemble_file"] = *c.ensemble_file;
  json rows = json::array();
  for (const auto& r : c.table_rows) rows.push_back({r[0], r[1], r[2]});
  doc["table_rows"] = rows;
  return doc;
}

}  // namespace mfg
