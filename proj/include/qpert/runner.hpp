#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qpert/config.hpp"
#include "qpert/dyson.hpp"
#include "qpert/matrix_io.hpp"
#include "qpert/oscillator.hpp"
#include "qpert/rspt.hpp"

namespace qpert::cli {

/// One output record. `floor` marks a slope fit that sat below the
/// numerical floor; its value column is printed as "floor".
struct ResultRow {
  double lambda = 0.0;
  double t = 0.0;
  int order = 0;
  std::string method_a;
  std::string method_b;
  std::string metric;
  double value = 0.0;
  bool floor = false;
};

inline constexpr char kCsvHeader[] =
    "lambda,t,order,method_a,method_b,metric,value";

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ResultRow& row : rows) {
    out += format_number(row.lambda);
    out += ',';
    out += format_number(row.t);
    out += ',';
    out += std::to_string(row.order);
    out += ',';
    out += row.method_a;
    out += ',';
    out += row.method_b;
    out += ',';
    out += row.metric;
    out += ',';
    out += row.floor ? "floor" : format_number(row.value);
    out += '\n';
  }
  return out;
}

/// Problem data materialized from a config: operators, eigenpairs of H0,
/// initial state and resolved tolerances.
struct LoadedProblem {
  ComplexMatrix h0;
  ComplexMatrix v;
  UnperturbedSolution sol;
  ComplexVector psi0;
  int level = -1;  // >= 0 when the initial state is an H0 eigenlevel
  double degeneracy_tol = 0.0;
  QuadratureScheme scheme;
};

inline LoadedProblem load_problem(const ProblemConfig& cfg) {
  LoadedProblem prob;
  const double tol = cfg.tolerances.exp_tolerance;

  if (cfg.problem == "oscillator") {
    const FockSpec spec(cfg.dimension, cfg.omega);
    const OscillatorProblem osc = make_oscillator_problem(spec, 0.0);
    const OscillatorHamiltonians h = oscillator_hamiltonians(osc);
    prob.h0 = h.h0;
    prob.v = h.v;
  } else {
    prob.h0 = load_complex_matrix(cfg.h0_path);
    prob.v = load_complex_matrix(cfg.v_path);
    if (prob.h0.rows() != prob.h0.cols()) {
      throw ConfigError("config field 'custom.h0': matrix must be square");
    }
    if (prob.v.rows() != prob.v.cols()) {
      throw ConfigError("config field 'custom.v': matrix must be square");
    }
    if (prob.h0.rows() != prob.v.rows()) {
      throw ConfigError(
          "config field 'custom.v': dimension differs from custom.h0");
    }
    if (!is_hermitian(prob.h0, tol)) {
      throw ConfigError("config field 'custom.h0': matrix is not Hermitian");
    }
    if (!is_hermitian(prob.v, tol)) {
      throw ConfigError("config field 'custom.v': matrix is not Hermitian");
    }
  }

  prob.sol = eigendecompose_hermitian(prob.h0, tol);
  prob.degeneracy_tol = cfg.tolerances.degeneracy_tol > 0.0
                            ? cfg.tolerances.degeneracy_tol
                            : default_degeneracy_tol(prob.sol);
  prob.scheme = QuadratureScheme{cfg.tolerances.quadrature_panels,
                                 cfg.tolerances.quadrature_nodes};
  validate(prob.scheme);

  const Eigen::Index d = prob.h0.rows();
  if (cfg.basis_index >= 0) {
    if (cfg.basis_index >= d) {
      throw ConfigError(
          "config field 'initial_state.basis_index': exceeds dimension " +
          std::to_string(d));
    }
    if (cfg.problem == "oscillator" && cfg.basis_index > cfg.dimension - 6) {
      throw ConfigError(
          "config field 'initial_state.basis_index': too close to the "
          "truncation edge (need basis_index <= dimension - 6)");
    }
    prob.level = cfg.basis_index;
    prob.psi0 = prob.sol.eigenvectors.col(cfg.basis_index);
  } else {
    prob.psi0 = load_complex_vector(cfg.state_path);
    if (prob.psi0.size() != d) {
      throw ConfigError(
          "config field 'initial_state.file': vector dimension differs from "
          "the problem dimension");
    }
    if (std::abs(prob.psi0.norm() - 1.0) > 1e-8) {
      throw ConfigError(
          "config field 'initial_state.file': vector is not unit norm");
    }
  }
  return prob;
}

namespace runner_detail {

/// Per-order states for every requested method at fixed t, lambda-free
/// where the method allows it.
struct MethodStates {
  // block/dyson/rspt: zeroth + per-order correction vectors.
  ComplexVector zeroth;
  std::vector<ComplexVector> block_corr;
  std::vector<ComplexVector> dyson_corr;
  std::vector<ComplexVector> rspt_corr;
};

inline ComplexVector series_state(const ComplexVector& zeroth,
                                  const std::vector<ComplexVector>& corr,
                                  double lambda) {
  ComplexVector acc = zeroth;
  double weight = 1.0;
  for (const ComplexVector& c : corr) {
    weight *= lambda;
    acc += weight * c;
  }
  return acc;
}

inline double fit_slope(const std::vector<double>& lambdas,
                        const std::vector<double>& errors) {
  const std::size_t n = lambdas.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(lambdas[i]);
    my += std::log(errors[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(lambdas[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  return sxy / sxx;
}

inline constexpr double kErrorFloor = 1e-12;

}  // namespace runner_detail

/// Deterministic batch run: comparison metrics for every (lambda, t) cell
/// and requested method pair. Rows are emitted in a fixed order regardless
/// of how the work is scheduled.
inline std::vector<ResultRow> run(const ProblemConfig& cfg) {
  using runner_detail::MethodStates;
  using runner_detail::series_state;

  const LoadedProblem prob = load_problem(cfg);
  if (cfg.has_method(Method::rspt) && prob.level < 0) {
    throw ConfigError(
        "config field 'initial_state': method 'rspt' needs a basis_index "
        "initial state");
  }

  const int dyson_order = std::min(cfg.order, kDysonOrderCap);
  const int rspt_order = std::min(cfg.order, 2);

  BlockSystem sys;
  if (cfg.has_method(Method::block)) {
    sys = assemble_block_system(prob.h0, prob.v, cfg.order,
                                cfg.tolerances.exp_tolerance);
  }

  // lambda-free work, per time.
  std::vector<MethodStates> per_time;
  for (const double t : cfg.times) {
    MethodStates ms;
    ms.zeroth = evolve_unperturbed(prob.sol, prob.psi0, t);
    if (cfg.has_method(Method::block)) {
      const CorrectionSeries series =
          evolve(sys, prob.psi0, t, cfg.exp_path);
      ms.block_corr = series.corrections;
    }
    if (cfg.has_method(Method::dyson)) {
      for (int k = 1; k <= dyson_order; ++k) {
        ms.dyson_corr.push_back(
            dyson_term(prob.sol, prob.v, prob.psi0, t, k, prob.scheme));
      }
    }
    if (cfg.has_method(Method::rspt)) {
      for (int k = 1; k <= rspt_order; ++k) {
        ms.rspt_corr.push_back(rs_correction_evolution(
            prob.sol, prob.v, prob.level, t, k, prob.degeneracy_tol));
      }
    }
    per_time.push_back(std::move(ms));
  }

  // Exact propagators, per lambda.
  std::vector<UnperturbedSolution> exact_sols;
  if (cfg.has_method(Method::exact)) {
    for (const double lam : cfg.lambda_values) {
      exact_sols.push_back(eigendecompose_hermitian(
          prob.h0 + lam * prob.v, cfg.tolerances.exp_tolerance));
    }
  }

  std::vector<ResultRow> rows;
  for (std::size_t li = 0; li < cfg.lambda_values.size(); ++li) {
    const double lam = cfg.lambda_values[li];
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
      const double t = cfg.times[ti];
      const MethodStates& ms = per_time[ti];

      std::map<Method, ComplexVector> state;
      if (cfg.has_method(Method::block)) {
        state[Method::block] = series_state(ms.zeroth, ms.block_corr, lam);
      }
      if (cfg.has_method(Method::rspt)) {
        state[Method::rspt] = series_state(ms.zeroth, ms.rspt_corr, lam);
      }
      if (cfg.has_method(Method::dyson)) {
        state[Method::dyson] = series_state(ms.zeroth, ms.dyson_corr, lam);
      }
      if (cfg.has_method(Method::exact)) {
        state[Method::exact] =
            evolve_unperturbed(exact_sols[li], prob.psi0, t);
      }

      for (std::size_t a = 0; a < cfg.methods.size(); ++a) {
        for (std::size_t b = a + 1; b < cfg.methods.size(); ++b) {
          const Method ma = cfg.methods[a];
          const Method mb = cfg.methods[b];
          rows.push_back(ResultRow{
              lam, t, cfg.order, method_name(ma), method_name(mb),
              "state_error", (state[ma] - state[mb]).norm(), false});
        }
      }
      for (const Method m : cfg.methods) {
        if (m == Method::exact) continue;  // unitary by construction
        rows.push_back(ResultRow{lam, t, cfg.order, method_name(m), "",
                                 "norm_deviation",
                                 std::abs(state[m].norm() - 1.0), false});
      }
    }
  }

  if (cfg.has_method(Method::rspt) && cfg.has_method(Method::exact)) {
    const RSCorrections rs =
        rs_corrections(prob.sol, prob.v, prob.level, prob.degeneracy_tol);
    for (std::size_t li = 0; li < cfg.lambda_values.size(); ++li) {
      const double lam = cfg.lambda_values[li];
      const double e_rs = prob.sol.energies(prob.level) + lam * rs.delta1 +
                          lam * lam * rs.delta2;
      const double e_exact = exact_sols[li].energies(prob.level);
      rows.push_back(ResultRow{lam, 0.0, 2, "rspt", "exact", "energy_error",
                               std::abs(e_rs - e_exact), false});
    }
  }

  if (cfg.has_method(Method::dyson) && cfg.has_method(Method::block)) {
    for (const double t : cfg.times) {
      const double residual = dyson_identity_residual(
          prob.sol, prob.v, t, dyson_order, prob.scheme);
      rows.push_back(ResultRow{0.0, t, dyson_order, "dyson", "block",
                               "identity_residual", residual, false});
      if (cfg.require_oracle_agreement &&
          residual > cfg.tolerances.oracle_agreement) {
        throw NumericalError(
            "required oracle agreement failed: dyson-vs-block residual " +
            format_number(residual) + " at t = " + format_number(t) +
            " exceeds " + format_number(cfg.tolerances.oracle_agreement));
      }
    }
  }

  return rows;
}

/// Lambda-convergence scan: block-vs-exact state errors for every order
/// 1..cfg.order, plus the fitted slope of log(error) against log(lambda).
/// Slopes whose errors sat at the numerical floor are flagged instead of
/// fitted.
inline std::vector<ResultRow> scan_convergence(const ProblemConfig& cfg) {
  using runner_detail::fit_slope;
  using runner_detail::kErrorFloor;
  using runner_detail::series_state;

  if (cfg.lambda_values.size() < 2) {
    throw ConfigError(
        "config field 'lambda_values': scan needs at least 2 values");
  }
  if (!cfg.has_method(Method::block) || !cfg.has_method(Method::exact)) {
    throw ConfigError(
        "config field 'methods': scan needs both 'block' and 'exact'");
  }

  const LoadedProblem prob = load_problem(cfg);
  const BlockSystem sys = assemble_block_system(
      prob.h0, prob.v, cfg.order, cfg.tolerances.exp_tolerance);

  std::vector<CorrectionSeries> series;
  for (const double t : cfg.times) {
    series.push_back(evolve(sys, prob.psi0, t, cfg.exp_path));
  }
  std::vector<UnperturbedSolution> exact_sols;
  for (const double lam : cfg.lambda_values) {
    exact_sols.push_back(eigendecompose_hermitian(
        prob.h0 + lam * prob.v, cfg.tolerances.exp_tolerance));
  }

  std::vector<ResultRow> rows;
  for (int m = 1; m <= cfg.order; ++m) {
    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
      const double t = cfg.times[ti];
      std::vector<double> errors;
      for (std::size_t li = 0; li < cfg.lambda_values.size(); ++li) {
        const double lam = cfg.lambda_values[li];
        ComplexVector approx = series[ti].zeroth;
        double weight = 1.0;
        for (int k = 1; k <= m; ++k) {
          weight *= lam;
          approx += weight * series[ti].correction(k);
        }
        const ComplexVector exact =
            evolve_unperturbed(exact_sols[li], prob.psi0, t);
        const double err = (approx - exact).norm();
        errors.push_back(err);
        rows.push_back(ResultRow{lam, t, m, "block", "exact", "state_error",
                                 err, false});
      }
      bool at_floor = false;
      for (const double e : errors) {
        if (e <= kErrorFloor) at_floor = true;
      }
      ResultRow slope_row{0.0, t, m, "block", "exact", "slope", 0.0, false};
      if (at_floor) {
        slope_row.floor = true;
      } else {
        slope_row.value = fit_slope(cfg.lambda_values, errors);
      }
      rows.push_back(slope_row);
    }
  }
  return rows;
}

/// Cross-oracle suite on the configured problem: per-order agreement
/// between the block extraction, the quadrature terms and (when available)
/// the stationary-theory assembly. Prints one line per check; returns the
/// number of failures.
inline int verify(const ProblemConfig& cfg, std::ostream& report) {
  const LoadedProblem prob = load_problem(cfg);
  const double tol = cfg.tolerances.oracle_agreement;
  const int dyson_order = std::min(cfg.order, kDysonOrderCap);
  const int rspt_order = std::min(cfg.order, 2);

  const BlockSystem sys = assemble_block_system(
      prob.h0, prob.v, cfg.order, cfg.tolerances.exp_tolerance);

  int failures = 0;
  const auto check = [&](const std::string& name, double value) {
    const bool ok = value <= tol;
    report << (ok ? "PASS  " : "FAIL  ") << name << ": " << value
           << (ok ? " <= " : " > ") << tol << "\n";
    if (!ok) ++failures;
  };

  bool rspt_usable = cfg.has_method(Method::rspt) && prob.level >= 0;
  if (cfg.has_method(Method::rspt) && prob.level < 0) {
    report << "SKIP  rspt oracles: initial state is not an eigenlevel\n";
  }

  for (const double t : cfg.times) {
    const CorrectionSeries series = evolve(sys, prob.psi0, t, cfg.exp_path);

    if (cfg.has_method(Method::dyson)) {
      for (int k = 1; k <= dyson_order; ++k) {
        const ComplexVector dy =
            dyson_term(prob.sol, prob.v, prob.psi0, t, k, prob.scheme);
        check("block-vs-dyson order " + std::to_string(k) +
                  " at t=" + format_number(t),
              (dy - series.correction(k)).norm());
      }
    }

    if (rspt_usable) {
      for (int k = 1; k <= rspt_order; ++k) {
        try {
          const ComplexVector rs = rs_correction_evolution(
              prob.sol, prob.v, prob.level, t, k, prob.degeneracy_tol);
          check("block-vs-rspt order " + std::to_string(k) +
                    " at t=" + format_number(t),
                (rs - series.correction(k)).norm());
          if (cfg.has_method(Method::dyson) && k <= dyson_order) {
            const ComplexVector dy =
                dyson_term(prob.sol, prob.v, prob.psi0, t, k, prob.scheme);
            check("rspt-vs-dyson order " + std::to_string(k) +
                      " at t=" + format_number(t),
                  (rs - dy).norm());
          }
        } catch (const DegeneracyError& err) {
          report << "SKIP  rspt oracles: " << err.what() << "\n";
          rspt_usable = false;
          break;
        }
      }
    }
  }
  return failures;
}

}  // namespace qpert::cli
