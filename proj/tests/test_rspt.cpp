#include <catch2/catch_amalgamated.hpp>

#include "qpert/block_method.hpp"
#include "qpert/oscillator.hpp"
#include "qpert/rspt.hpp"
#include "test_util.hpp"

using namespace qpert;
using qpert_test::random_hermitian;
namespace oracle = qpert_test::oracle;

namespace {

struct OscillatorFixture {
  FockSpec spec{32, 1.0};
  OscillatorHamiltonians h =
      oscillator_hamiltonians(make_oscillator_problem(spec, 0.0));
  UnperturbedSolution sol = eigendecompose_hermitian(h.h0);
  double tol = default_degeneracy_tol(sol);
};

}  // namespace

TEST_CASE("coupling matrix elements", "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(5, 211);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);

  // Identity perturbation: orthonormality kills off-diagonal couplings.
  const ComplexMatrix eye = ComplexMatrix::Identity(5, 5);
  for (int k = 0; k < 5; ++k) {
    for (int n = 0; n < 5; ++n) {
      const Complex c = coupling(sol, eye, k, n);
      CHECK(std::abs(c - (k == n ? 1.0 : 0.0)) < 1e-13);
    }
  }

  const ComplexMatrix v = random_hermitian(5, 223);
  for (int k = 0; k < 5; ++k) {
    for (int n = 0; n < 5; ++n) {
      CHECK(std::abs(coupling(sol, v, k, n) -
                     std::conj(coupling(sol, v, n, k))) < 1e-13);
    }
  }

  CHECK_THROWS_AS(coupling(sol, v, 5, 0), DimensionError);
  CHECK_THROWS_AS(coupling(sol, v, 0, -1), DimensionError);
}

TEST_CASE("oscillator coupling diagonal", "[rspt]") {
  const OscillatorFixture fx;
  for (int n = 0; n < 6; ++n) {
    const Complex vnn = coupling(fx.sol, fx.h.v, n, n);
    CHECK(std::abs(vnn - (2.0 * n + 1.0) / 4.0) < 1e-12);
  }
}

TEST_CASE("zero perturbation gives zero corrections", "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(4, 227);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);
  const RSCorrections rs = rs_corrections(
      sol, ComplexMatrix::Zero(4, 4), 1, default_degeneracy_tol(sol));
  CHECK(rs.delta1 == 0.0);
  CHECK(rs.delta2 == 0.0);
  CHECK(rs.state1.norm() == 0.0);
  CHECK(rs.state2.norm() == 0.0);
}

TEST_CASE("oscillator stationary corrections", "[rspt]") {
  const OscillatorFixture fx;
  for (int n = 0; n < 6; ++n) {
    const RSCorrections rs = rs_corrections(fx.sol, fx.h.v, n, fx.tol);

    CHECK(std::abs(rs.delta1 - (2.0 * n + 1.0) / 4.0) < 1e-12);
    CHECK(std::abs(rs.delta2 + (2.0 * n + 1.0) / 16.0) < 1e-10);

    // State correction couples only to n +- 2 with the +/-sqrt(...)/8
    // coefficients (the eigenbasis of the truncated oscillator is the Fock
    // basis up to rounding).
    for (int k = 0; k < fx.spec.dimension; ++k) {
      double expected = 0.0;
      if (k == n - 2) {
        expected = std::sqrt(static_cast<double>(n) * (n - 1)) / 8.0;
      } else if (k == n + 2) {
        expected = -std::sqrt(static_cast<double>(n + 1) * (n + 2)) / 8.0;
      }
      CHECK(std::abs(rs.state1(k) - expected) < 1e-10);
    }
    CHECK(std::abs(rs.state1(n)) == 0.0);  // no component on the level itself
  }
}

TEST_CASE("hermitian perturbations give real energy shifts", "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(6, 229);
  const ComplexMatrix v = random_hermitian(6, 233);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);

  for (int n = 0; n < 6; ++n) {
    CHECK(std::abs(coupling(sol, v, n, n).imag()) < 1e-12);
    // Second order through the complex-valued sum.
    Complex acc = 0.0;
    for (int k = 0; k < 6; ++k) {
      if (k == n) continue;
      acc += coupling(sol, v, n, k) * coupling(sol, v, k, n) /
             (sol.energies(n) - sol.energies(k));
    }
    CHECK(std::abs(acc.imag()) < 1e-12);
    const RSCorrections rs =
        rs_corrections(sol, v, n, default_degeneracy_tol(sol));
    CHECK(std::abs(acc.real() - rs.delta2) < 1e-12);
  }
}

TEST_CASE("degenerate levels are refused by name", "[rspt]") {
  ComplexMatrix h0 = ComplexMatrix::Zero(3, 3);
  h0.diagonal() << 1.0, 1.0, 2.0;
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);
  const ComplexMatrix v = random_hermitian(3, 239);

  bool thrown = false;
  try {
    rs_corrections(sol, v, 0, 1e-8);
  } catch (const DegeneracyError& err) {
    thrown = true;
    CHECK(((err.level_a() == 0 && err.level_b() == 1) ||
           (err.level_a() == 1 && err.level_b() == 0)));
    const std::string msg = err.what();
    CHECK(msg.find('0') != std::string::npos);
    CHECK(msg.find('1') != std::string::npos);
  }
  CHECK(thrown);
  CHECK_THROWS_AS(rs_time_dependent_terms(sol, v, 1, 0.5, 1e-8),
                  DegeneracyError);
  // Level 2 is isolated; it still works.
  CHECK_NOTHROW(rs_corrections(sol, v, 2, 1e-8));
}

TEST_CASE("time-dependent terms reduce to the stationary ones at t = 0",
          "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(5, 241);
  const ComplexMatrix v = random_hermitian(5, 251);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);
  const double tol = default_degeneracy_tol(sol);

  for (int n = 0; n < 5; ++n) {
    const RSCorrections rs = rs_corrections(sol, v, n, tol);
    const TimeDependentTerms terms =
        rs_time_dependent_terms(sol, v, n, 0.0, tol);
    CHECK((terms.n1_t - rs.state1).norm() < 1e-13);
    CHECK((terms.n2_t - rs.state2).norm() < 1e-13);
    CHECK(terms.n2_1_t.norm() < 1e-13);
  }
}

TEST_CASE("oscillator time-phased first-order term", "[rspt]") {
  const OscillatorFixture fx;
  const double t = 1.3;
  for (int n = 2; n < 5; ++n) {
    const TimeDependentTerms terms =
        rs_time_dependent_terms(fx.sol, fx.h.v, n, t, fx.tol);
    const Complex down = std::exp(-kImag * (n - 2 + 0.5) * t) *
                         std::sqrt(static_cast<double>(n) * (n - 1)) / 8.0;
    const Complex up = -std::exp(-kImag * (n + 2 + 0.5) * t) *
                       std::sqrt(static_cast<double>(n + 1) * (n + 2)) / 8.0;
    CHECK(std::abs(terms.n1_t(n - 2) - down) < 1e-10);
    CHECK(std::abs(terms.n1_t(n + 2) - up) < 1e-10);
  }
}

TEST_CASE("first-order assembly matches the block extraction", "[rspt]") {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const ComplexMatrix h0 = random_hermitian(4, 300 + seed);
    const ComplexMatrix v = random_hermitian(4, 400 + seed);
    const UnperturbedSolution sol = eigendecompose_hermitian(h0);
    const double tol = default_degeneracy_tol(sol);
    const BlockSystem sys = assemble_block_system(h0, v, 1);

    for (int n = 0; n < 4; ++n) {
      for (const double t : {0.0, 0.5, 1.0, 5.0}) {
        const CorrectionSeries at_t =
            evolve(sys, ComplexVector(sol.eigenvectors.col(n)), t);
        const ComplexVector assembled =
            rs_correction_evolution(sol, v, n, t, 1, tol);
        CHECK((assembled - at_t.correction(1)).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("second-order assembly matches the block extraction", "[rspt]") {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const ComplexMatrix h0 = random_hermitian(4, 500 + seed);
    const ComplexMatrix v = random_hermitian(4, 600 + seed);
    const UnperturbedSolution sol = eigendecompose_hermitian(h0);
    const double tol = default_degeneracy_tol(sol);
    const BlockSystem sys = assemble_block_system(h0, v, 2);

    for (int n = 0; n < 4; ++n) {
      for (const double t : {0.0, 0.7, 2.0}) {
        const CorrectionSeries series =
            evolve(sys, ComplexVector(sol.eigenvectors.col(n)), t);
        const ComplexVector assembled =
            rs_correction_evolution(sol, v, n, t, 2, tol);
        CHECK((assembled - series.correction(2)).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("perturbed eigenvalues to second order", "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(5, 521);
  const ComplexMatrix v = random_hermitian(5, 523);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);
  const double tol = default_degeneracy_tol(sol);
  const int n = 2;
  const RSCorrections rs = rs_corrections(sol, v, n, tol);

  const auto energy_error = [&](double lam) {
    const UnperturbedSolution exact = eigendecompose_hermitian(h0 + lam * v);
    const double predicted =
        sol.energies(n) + lam * rs.delta1 + lam * lam * rs.delta2;
    return std::abs(predicted - exact.energies(n));
  };
  // O(lambda^3) residual: halving lambda divides the error by ~8.
  const double ratio = energy_error(0.1) / energy_error(0.05);
  CHECK(ratio > 8.0 * 0.7);
  CHECK(ratio < 8.0 * 1.3);
}

TEST_CASE("assembly order validation", "[rspt]") {
  const ComplexMatrix h0 = random_hermitian(4, 541);
  const ComplexMatrix v = random_hermitian(4, 547);
  const UnperturbedSolution sol = eigendecompose_hermitian(h0);
  CHECK_THROWS_AS(
      rs_correction_evolution(sol, v, 0, 1.0, 3, default_degeneracy_tol(sol)),
      PreconditionError);
}
