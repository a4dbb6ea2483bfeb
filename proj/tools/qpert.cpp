// Command-line driver: loads a problem config, runs method comparisons or
// convergence scans, and emits machine-readable CSV tables (plus a JSON
// sidecar of the resolved config when writing to a file).
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qpert/qpert.hpp"

namespace {

int write_table(const std::vector<qpert::cli::ResultRow>& rows,
                const std::string& out_path,
                const qpert::cli::ProblemConfig& cfg) {
  const std::string csv = qpert::cli::to_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return 2;
  }
  out << csv;

  std::ofstream sidecar(out_path + ".config.json", std::ios::binary);
  if (!sidecar) {
    std::cerr << "error: cannot write '" << out_path << ".config.json'\n";
    return 2;
  }
  sidecar << cfg.resolved().dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qpert: perturbative corrections from block-matrix exponentials, with "
      "cross-checked oracles"};
  app.require_subcommand(0, 1);

  std::string run_config, run_out;
  CLI::App* run_cmd =
      app.add_subcommand("run", "compare methods on a problem config");
  run_cmd->add_option("config", run_config, "problem config (JSON)")
      ->required();
  run_cmd->add_option("--out", run_out, "write CSV here (default: stdout)");

  std::string scan_config, scan_out;
  CLI::App* scan_cmd = app.add_subcommand(
      "scan", "lambda-convergence scan with fitted error slopes");
  scan_cmd->add_option("config", scan_config, "problem config (JSON)")
      ->required();
  scan_cmd->add_option("--out", scan_out, "write CSV here (default: stdout)");

  std::string verify_config;
  app.add_option("--verify", verify_config,
                 "run the cross-oracle suite on the configured problem");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto cfg = qpert::cli::load_config(run_config);
      return write_table(qpert::cli::run(cfg), run_out, cfg);
    }
    if (scan_cmd->parsed()) {
      const auto cfg = qpert::cli::load_config(scan_config);
      return write_table(qpert::cli::scan_convergence(cfg), scan_out, cfg);
    }
    if (!verify_config.empty()) {
      const auto cfg = qpert::cli::load_config(verify_config);
      const int failures = qpert::cli::verify(cfg, std::cout);
      if (failures > 0) {
        std::cerr << "error: " << failures << " oracle check(s) failed\n";
        return 3;
      }
      return 0;
    }
  } catch (const qpert::cli::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const qpert::MatrixFileError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const qpert::DegeneracyError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const qpert::DimensionError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const qpert::PreconditionError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const qpert::NumericalError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }

  std::cout << app.help();
  return 0;
}
