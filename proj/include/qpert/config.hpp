#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpert/block_method.hpp"
#include "qpert/types.hpp"

namespace qpert::cli {

/// A config field failed validation. The message always names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { block, rspt, dyson, exact };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::block: return "block";
    case Method::rspt: return "rspt";
    case Method::dyson: return "dyson";
    case Method::exact: return "exact";
  }
  return "?";
}

struct Tolerances {
  double degeneracy_tol = -1.0;  // <= 0 selects 1e-8 x spectral range
  int quadrature_panels = 64;
  int quadrature_nodes = 4;
  double exp_tolerance = 1e-10;      // hermiticity / assembly checks
  double oracle_agreement = 1e-7;    // --verify and required-agreement runs
};

/// Declarative problem description driving the CLI. Matrix paths are
/// resolved against the config file's directory at load time.
struct ProblemConfig {
  std::string problem;  // "oscillator" or "custom"

  double omega = 1.0;    // oscillator
  int dimension = 32;    // oscillator

  std::string h0_path;   // custom
  std::string v_path;    // custom

  std::vector<double> lambda_values;
  int order = 1;
  std::vector<double> times;

  int basis_index = -1;        // initial state: H0 eigenlevel ...
  std::string state_path;      // ... or an explicit vector file

  std::vector<Method> methods;
  Tolerances tolerances;
  BlockExpPath exp_path = BlockExpPath::dense;
  bool require_oracle_agreement = false;

  bool has_method(Method m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  }

  /// Fully resolved config (defaults materialized) for the provenance
  /// sidecar.
  nlohmann::json resolved() const {
    nlohmann::json j;
    j["problem"] = problem;
    if (problem == "oscillator") {
      j["oscillator"] = {{"omega", omega}, {"dimension", dimension}};
    } else {
      j["custom"] = {{"h0", h0_path}, {"v", v_path}};
    }
    j["lambda_values"] = lambda_values;
    j["order"] = order;
    j["times"] = times;
    if (basis_index >= 0) {
      j["initial_state"] = {{"basis_index", basis_index}};
    } else {
      j["initial_state"] = {{"file", state_path}};
    }
    std::vector<std::string> names;
    for (Method m : methods) names.emplace_back(method_name(m));
    j["methods"] = names;
    j["tolerances"] = {{"degeneracy_tol", tolerances.degeneracy_tol},
                       {"quadrature_panels", tolerances.quadrature_panels},
                       {"quadrature_nodes", tolerances.quadrature_nodes},
                       {"exp_tolerance", tolerances.exp_tolerance},
                       {"oracle_agreement", tolerances.oracle_agreement}};
    j["block_exp_path"] =
        exp_path == BlockExpPath::dense ? "dense" : "toeplitz";
    j["require_oracle_agreement"] = require_oracle_agreement;
    return j;
  }
};

namespace config_detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::vector<std::string>& known,
                                const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError("config field '" + scope + it.key() +
                        "': unknown field");
    }
  }
}

inline double get_finite_number(const nlohmann::json& j,
                                const std::string& field) {
  if (!j.is_number()) {
    throw ConfigError("config field '" + field + "': must be a number");
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw ConfigError("config field '" + field + "': must be finite");
  }
  return x;
}

inline int get_integer(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ConfigError("config field '" + field + "': must be an integer");
  }
  return j.get<int>();
}

}  // namespace config_detail

inline ProblemConfig parse_config(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir) {
  using config_detail::get_finite_number;
  using config_detail::get_integer;
  using config_detail::reject_unknown_keys;

  if (!j.is_object()) {
    throw ConfigError("config field '<root>': must be a JSON object");
  }
  reject_unknown_keys(
      j,
      {"problem", "oscillator", "custom", "lambda_values", "order", "times",
       "initial_state", "methods", "tolerances", "block_exp_path",
       "require_oracle_agreement"},
      "");

  ProblemConfig cfg;

  if (!j.contains("problem") || !j["problem"].is_string()) {
    throw ConfigError("config field 'problem': required string");
  }
  cfg.problem = j["problem"].get<std::string>();
  if (cfg.problem == "oscillator") {
    if (!j.contains("oscillator") || !j["oscillator"].is_object()) {
      throw ConfigError("config field 'oscillator': required object");
    }
    const auto& osc = j["oscillator"];
    reject_unknown_keys(osc, {"omega", "dimension"}, "oscillator.");
    if (!osc.contains("omega") || !osc.contains("dimension")) {
      throw ConfigError(
          "config field 'oscillator': needs 'omega' and 'dimension'");
    }
    cfg.omega = get_finite_number(osc["omega"], "oscillator.omega");
    if (cfg.omega <= 0.0) {
      throw ConfigError("config field 'oscillator.omega': must be positive");
    }
    cfg.dimension = get_integer(osc["dimension"], "oscillator.dimension");
    if (cfg.dimension < 4) {
      throw ConfigError("config field 'oscillator.dimension': must be >= 4");
    }
  } else if (cfg.problem == "custom") {
    if (!j.contains("custom") || !j["custom"].is_object()) {
      throw ConfigError("config field 'custom': required object");
    }
    const auto& cus = j["custom"];
    reject_unknown_keys(cus, {"h0", "v"}, "custom.");
    for (const char* field : {"h0", "v"}) {
      if (!cus.contains(field) || !cus[field].is_string()) {
        throw ConfigError(std::string("config field 'custom.") + field +
                          "': required path string");
      }
    }
    cfg.h0_path = (base_dir / cus["h0"].get<std::string>()).string();
    cfg.v_path = (base_dir / cus["v"].get<std::string>()).string();
  } else {
    throw ConfigError(
        "config field 'problem': must be 'oscillator' or 'custom'");
  }

  if (!j.contains("lambda_values") || !j["lambda_values"].is_array() ||
      j["lambda_values"].empty()) {
    throw ConfigError("config field 'lambda_values': required nonempty array");
  }
  for (std::size_t i = 0; i < j["lambda_values"].size(); ++i) {
    const double lam = get_finite_number(
        j["lambda_values"][i], "lambda_values[" + std::to_string(i) + "]");
    if (!(std::abs(lam) < 1.0)) {
      throw ConfigError("config field 'lambda_values[" + std::to_string(i) +
                        "]': |lambda| must be < 1");
    }
    cfg.lambda_values.push_back(lam);
  }

  if (!j.contains("order")) {
    throw ConfigError("config field 'order': required integer");
  }
  cfg.order = get_integer(j["order"], "order");
  if (cfg.order < 1 || cfg.order > kDefaultMaxOrder) {
    throw ConfigError("config field 'order': must be in [1, " +
                      std::to_string(kDefaultMaxOrder) + "]");
  }

  if (!j.contains("times") || !j["times"].is_array() || j["times"].empty()) {
    throw ConfigError("config field 'times': required nonempty array");
  }
  for (std::size_t i = 0; i < j["times"].size(); ++i) {
    const double t =
        get_finite_number(j["times"][i], "times[" + std::to_string(i) + "]");
    if (t < 0.0) {
      throw ConfigError("config field 'times[" + std::to_string(i) +
                        "]': must be nonnegative");
    }
    cfg.times.push_back(t);
  }

  if (!j.contains("initial_state") || !j["initial_state"].is_object()) {
    throw ConfigError("config field 'initial_state': required object");
  }
  const auto& init = j["initial_state"];
  reject_unknown_keys(init, {"basis_index", "file"}, "initial_state.");
  if (init.contains("basis_index") == init.contains("file")) {
    throw ConfigError(
        "config field 'initial_state': exactly one of 'basis_index' or "
        "'file'");
  }
  if (init.contains("basis_index")) {
    cfg.basis_index =
        get_integer(init["basis_index"], "initial_state.basis_index");
    if (cfg.basis_index < 0) {
      throw ConfigError(
          "config field 'initial_state.basis_index': must be >= 0");
    }
  } else {
    if (!init["file"].is_string()) {
      throw ConfigError("config field 'initial_state.file': must be a path");
    }
    cfg.state_path = (base_dir / init["file"].get<std::string>()).string();
  }

  if (!j.contains("methods") || !j["methods"].is_array() ||
      j["methods"].empty()) {
    throw ConfigError("config field 'methods': required nonempty array");
  }
  for (const auto& name : j["methods"]) {
    if (!name.is_string()) {
      throw ConfigError("config field 'methods': entries must be strings");
    }
    const std::string s = name.get<std::string>();
    Method m;
    if (s == "block") m = Method::block;
    else if (s == "rspt") m = Method::rspt;
    else if (s == "dyson") m = Method::dyson;
    else if (s == "exact") m = Method::exact;
    else {
      throw ConfigError("config field 'methods': unknown method '" + s + "'");
    }
    if (cfg.has_method(m)) {
      throw ConfigError("config field 'methods': duplicate method '" + s +
                        "'");
    }
    cfg.methods.push_back(m);
  }
  // Canonical order keeps output row order independent of listing order.
  std::sort(cfg.methods.begin(), cfg.methods.end());

  if (j.contains("tolerances")) {
    const auto& tol = j["tolerances"];
    if (!tol.is_object()) {
      throw ConfigError("config field 'tolerances': must be an object");
    }
    reject_unknown_keys(tol,
                        {"degeneracy_tol", "quadrature_panels",
                         "quadrature_nodes", "exp_tolerance",
                         "oracle_agreement"},
                        "tolerances.");
    if (tol.contains("degeneracy_tol")) {
      cfg.tolerances.degeneracy_tol = get_finite_number(
          tol["degeneracy_tol"], "tolerances.degeneracy_tol");
    }
    if (tol.contains("quadrature_panels")) {
      cfg.tolerances.quadrature_panels = get_integer(
          tol["quadrature_panels"], "tolerances.quadrature_panels");
      if (cfg.tolerances.quadrature_panels < 1) {
        throw ConfigError(
            "config field 'tolerances.quadrature_panels': must be >= 1");
      }
    }
    if (tol.contains("quadrature_nodes")) {
      cfg.tolerances.quadrature_nodes = get_integer(
          tol["quadrature_nodes"], "tolerances.quadrature_nodes");
      if (cfg.tolerances.quadrature_nodes < 1) {
        throw ConfigError(
            "config field 'tolerances.quadrature_nodes': must be >= 1");
      }
    }
    if (tol.contains("exp_tolerance")) {
      cfg.tolerances.exp_tolerance =
          get_finite_number(tol["exp_tolerance"], "tolerances.exp_tolerance");
      if (cfg.tolerances.exp_tolerance <= 0.0) {
        throw ConfigError(
            "config field 'tolerances.exp_tolerance': must be positive");
      }
    }
    if (tol.contains("oracle_agreement")) {
      cfg.tolerances.oracle_agreement = get_finite_number(
          tol["oracle_agreement"], "tolerances.oracle_agreement");
      if (cfg.tolerances.oracle_agreement <= 0.0) {
        throw ConfigError(
            "config field 'tolerances.oracle_agreement': must be positive");
      }
    }
  }

  if (j.contains("block_exp_path")) {
    if (!j["block_exp_path"].is_string()) {
      throw ConfigError("config field 'block_exp_path': must be a string");
    }
    const std::string s = j["block_exp_path"].get<std::string>();
    if (s == "dense") cfg.exp_path = BlockExpPath::dense;
    else if (s == "toeplitz") cfg.exp_path = BlockExpPath::toeplitz;
    else {
      throw ConfigError(
          "config field 'block_exp_path': must be 'dense' or 'toeplitz'");
    }
  }

  if (j.contains("require_oracle_agreement")) {
    if (!j["require_oracle_agreement"].is_boolean()) {
      throw ConfigError(
          "config field 'require_oracle_agreement': must be a boolean");
    }
    cfg.require_oracle_agreement = j["require_oracle_agreement"].get<bool>();
  }

  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError("config file '" + path + "': " + err.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

}  // namespace qpert::cli
