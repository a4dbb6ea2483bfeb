#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "qpert/config.hpp"
#include "qpert/matrix_io.hpp"
#include "qpert/runner.hpp"
#include "test_util.hpp"

using namespace qpert;
using namespace qpert::cli;

namespace {

nlohmann::json base_oscillator_config() {
  return nlohmann::json{
      {"problem", "oscillator"},
      {"oscillator", {{"omega", 1.0}, {"dimension", 16}}},
      {"lambda_values", {0.02, 0.01}},
      {"order", 2},
      {"times", {0.0, 1.0}},
      {"initial_state", {{"basis_index", 0}}},
      {"methods", {"block", "exact"}},
  };
}

ProblemConfig parse(const nlohmann::json& j) {
  return parse_config(j, std::filesystem::path("."));
}

void expect_config_error(const nlohmann::json& j, const std::string& needle) {
  bool thrown = false;
  try {
    parse(j);
  } catch (const ConfigError& err) {
    thrown = true;
    INFO(err.what());
    CHECK(std::string(err.what()).find(needle) != std::string::npos);
  }
  CHECK(thrown);
}

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "qpert_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

const ResultRow* find_row(const std::vector<ResultRow>& rows, double lambda,
                          double t, const std::string& metric,
                          const std::string& method_a,
                          const std::string& method_b) {
  for (const ResultRow& row : rows) {
    if (row.lambda == lambda && row.t == t && row.metric == metric &&
        row.method_a == method_a && row.method_b == method_b) {
      return &row;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("config validation names the offending field", "[cli]") {
  auto cfg = base_oscillator_config();
  cfg.erase("problem");
  expect_config_error(cfg, "problem");

  cfg = base_oscillator_config();
  cfg["problem"] = "hydrogen";
  expect_config_error(cfg, "problem");

  cfg = base_oscillator_config();
  cfg["oscillator"]["dimension"] = 3;
  expect_config_error(cfg, "oscillator.dimension");

  cfg = base_oscillator_config();
  cfg["oscillator"]["omega"] = -2.0;
  expect_config_error(cfg, "oscillator.omega");

  cfg = base_oscillator_config();
  cfg["lambda_values"] = nlohmann::json::array();
  expect_config_error(cfg, "lambda_values");

  cfg = base_oscillator_config();
  cfg["lambda_values"] = {0.02, 1.5};
  expect_config_error(cfg, "lambda_values[1]");

  cfg = base_oscillator_config();
  cfg["order"] = 0;
  expect_config_error(cfg, "order");

  cfg = base_oscillator_config();
  cfg["times"] = {1.0, -0.5};
  expect_config_error(cfg, "times[1]");

  cfg = base_oscillator_config();
  cfg["initial_state"] = {{"basis_index", 0}, {"file", "x.json"}};
  expect_config_error(cfg, "initial_state");

  cfg = base_oscillator_config();
  cfg["initial_state"] = nlohmann::json::object();
  expect_config_error(cfg, "initial_state");

  cfg = base_oscillator_config();
  cfg["methods"] = {"block", "magnus"};
  expect_config_error(cfg, "methods");

  cfg = base_oscillator_config();
  cfg["methods"] = {"block", "block"};
  expect_config_error(cfg, "methods");

  cfg = base_oscillator_config();
  cfg["tolerances"] = {{"quadrature_panels", 0}};
  expect_config_error(cfg, "tolerances.quadrature_panels");

  cfg = base_oscillator_config();
  cfg["block_exp_path"] = "sparse";
  expect_config_error(cfg, "block_exp_path");

  cfg = base_oscillator_config();
  cfg["surprise"] = 1;
  expect_config_error(cfg, "surprise");
}

TEST_CASE("unperturbed limit", "[cli]") {
  auto j = base_oscillator_config();
  j["lambda_values"] = {0.0};
  j["order"] = 1;
  const std::vector<ResultRow> rows = run(parse(j));
  for (const double t : {0.0, 1.0}) {
    const ResultRow* row = find_row(rows, 0.0, t, "state_error", "block",
                                    "exact");
    REQUIRE(row != nullptr);
    CHECK(row->value <= 1e-10);
  }
}

TEST_CASE("quadratic error growth across lambda", "[cli]") {
  auto j = base_oscillator_config();
  j["oscillator"]["dimension"] = 32;
  j["order"] = 1;
  j["times"] = {1.0};
  const std::vector<ResultRow> rows = run(parse(j));
  const ResultRow* small =
      find_row(rows, 0.01, 1.0, "state_error", "block", "exact");
  const ResultRow* large =
      find_row(rows, 0.02, 1.0, "state_error", "block", "exact");
  REQUIRE(small != nullptr);
  REQUIRE(large != nullptr);
  const double ratio = large->value / small->value;
  CHECK(ratio > 4.0 * 0.75);
  CHECK(ratio < 4.0 * 1.25);
}

TEST_CASE("custom problem from matrix files", "[cli]") {
  const auto dir = temp_dir();
  ComplexMatrix h0 = ComplexMatrix::Zero(2, 2);
  h0(1, 1) = 1.0;
  ComplexMatrix v(2, 2);
  v << 0.0, 1.0, 1.0, 0.0;
  save_complex_matrix((dir / "h0.json").string(), h0);
  save_complex_matrix((dir / "v.json").string(), v);

  nlohmann::json j{
      {"problem", "custom"},
      {"custom", {{"h0", "h0.json"}, {"v", "v.json"}}},
      {"lambda_values", {0.05}},
      {"order", 2},
      {"times", {1.0}},
      {"initial_state", {{"basis_index", 0}}},
      {"methods", {"block", "dyson"}},
  };
  const ProblemConfig cfg = parse_config(j, dir);
  const std::vector<ResultRow> rows = run(cfg);
  const ResultRow* residual =
      find_row(rows, 0.0, 1.0, "identity_residual", "dyson", "block");
  REQUIRE(residual != nullptr);
  CHECK(residual->value <= 1e-7);
}

TEST_CASE("degeneracy surfaces when rspt is requested", "[cli]") {
  const auto dir = temp_dir();
  ComplexMatrix h0 = ComplexMatrix::Zero(3, 3);
  h0.diagonal() << 1.0, 1.0, 2.0;
  const ComplexMatrix v = qpert_test::random_hermitian(3, 811);
  save_complex_matrix((dir / "deg_h0.json").string(), h0);
  save_complex_matrix((dir / "deg_v.json").string(), v);

  nlohmann::json j{
      {"problem", "custom"},
      {"custom", {{"h0", "deg_h0.json"}, {"v", "deg_v.json"}}},
      {"lambda_values", {0.05}},
      {"order", 1},
      {"times", {1.0}},
      {"initial_state", {{"basis_index", 0}}},
      {"methods", {"block", "rspt"}},
  };
  CHECK_THROWS_AS(run(parse_config(j, dir)), DegeneracyError);

  // Without rspt the same problem runs fine.
  j["methods"] = {"block", "exact"};
  CHECK_NOTHROW(run(parse_config(j, dir)));
}

TEST_CASE("rspt needs an eigenlevel initial state", "[cli]") {
  const auto dir = temp_dir();
  ComplexVector state(16);
  state.setZero();
  state(0) = 1.0;
  save_complex_matrix((dir / "state.json").string(), state);

  auto j = base_oscillator_config();
  j["initial_state"] = {{"file", "state.json"}};
  j["methods"] = {"block", "rspt"};
  CHECK_THROWS_AS(run(parse_config(j, dir)), ConfigError);
}

TEST_CASE("run output is deterministic", "[cli]") {
  auto j = base_oscillator_config();
  j["methods"] = {"block", "rspt", "dyson", "exact"};
  j["oscillator"]["dimension"] = 12;
  const ProblemConfig cfg = parse(j);
  const std::string first = to_csv(run(cfg));
  const std::string second = to_csv(run(cfg));
  CHECK(first == second);
  CHECK(first.rfind("lambda,t,order,method_a,method_b,metric,value\n", 0) ==
        0);
}

TEST_CASE("energy error rows", "[cli]") {
  auto j = base_oscillator_config();
  j["methods"] = {"rspt", "exact"};
  j["oscillator"]["dimension"] = 16;
  const std::vector<ResultRow> rows = run(parse(j));
  const ResultRow* row =
      find_row(rows, 0.01, 0.0, "energy_error", "rspt", "exact");
  REQUIRE(row != nullptr);
  // Third-order residual of the shifted-frequency level:
  // |omega (sqrt(1.01) - 1 - lambda/2 + lambda^2/8) / 2| ~ 6e-8.
  CHECK(row->value < 1e-6);
  CHECK(row->value > 0.0);
}

TEST_CASE("scan fits the expected slopes and flags floors", "[cli]") {
  auto j = base_oscillator_config();
  j["oscillator"]["dimension"] = 24;
  j["lambda_values"] = {0.04, 0.02, 0.01};
  j["order"] = 2;
  j["times"] = {1.0};
  const std::vector<ResultRow> rows = scan_convergence(parse(j));

  const ResultRow* slope1 = find_row(rows, 0.0, 1.0, "slope", "block",
                                     "exact");
  REQUIRE(slope1 != nullptr);  // first slope row is order 1
  CHECK(slope1->order == 1);
  CHECK(std::abs(slope1->value - 2.0) < 0.2);

  bool found_order2 = false;
  for (const ResultRow& row : rows) {
    if (row.metric == "slope" && row.order == 2) {
      found_order2 = true;
      CHECK(std::abs(row.value - 3.0) < 0.3);
    }
  }
  CHECK(found_order2);

  // Zero perturbation: every error sits at the numerical floor.
  const auto dir = temp_dir();
  ComplexMatrix h0 = ComplexMatrix::Zero(3, 3);
  h0.diagonal() << 0.0, 1.0, 2.5;
  save_complex_matrix((dir / "floor_h0.json").string(), h0);
  save_complex_matrix((dir / "floor_v.json").string(),
                      ComplexMatrix::Zero(3, 3));
  nlohmann::json fj{
      {"problem", "custom"},
      {"custom", {{"h0", "floor_h0.json"}, {"v", "floor_v.json"}}},
      {"lambda_values", {0.04, 0.02}},
      {"order", 1},
      {"times", {1.0}},
      {"initial_state", {{"basis_index", 0}}},
      {"methods", {"block", "exact"}},
  };
  const std::vector<ResultRow> floor_rows =
      scan_convergence(parse_config(fj, dir));
  bool saw_floor = false;
  for (const ResultRow& row : floor_rows) {
    if (row.metric == "slope") {
      CHECK(row.floor);
      saw_floor = true;
    }
  }
  CHECK(saw_floor);
  CHECK(to_csv(floor_rows).find(",floor") != std::string::npos);

  // Scan preconditions.
  auto bad = base_oscillator_config();
  bad["lambda_values"] = {0.01};
  CHECK_THROWS_AS(scan_convergence(parse(bad)), ConfigError);
}

TEST_CASE("verify reports per-oracle checks", "[cli]") {
  auto j = base_oscillator_config();
  j["methods"] = {"block", "rspt", "dyson", "exact"};
  j["oscillator"]["dimension"] = 12;
  j["times"] = {0.5};
  std::ostringstream report;
  const int failures = verify(parse(j), report);
  CHECK(failures == 0);
  const std::string text = report.str();
  CHECK(text.find("PASS  block-vs-dyson order 1") != std::string::npos);
  CHECK(text.find("PASS  block-vs-rspt order 2") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

TEST_CASE("resolved config sidecar is complete", "[cli]") {
  const ProblemConfig cfg = parse(base_oscillator_config());
  const nlohmann::json j = cfg.resolved();
  CHECK(j["problem"] == "oscillator");
  CHECK(j["tolerances"]["quadrature_panels"] == 64);
  CHECK(j["block_exp_path"] == "dense");
  CHECK(j["initial_state"]["basis_index"] == 0);
}
