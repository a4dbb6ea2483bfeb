#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qpert/expm.hpp"
#include "qpert/types.hpp"

namespace qpert {

inline constexpr double kDefaultTol = 1e-10;

/// True iff max |m - m^dag| entrywise <= tol. Throws on non-square input.
inline bool is_hermitian(const ComplexMatrix& m, double tol = kDefaultTol) {
  require_square(m, "is_hermitian");
  return max_abs(m - m.adjoint()) <= tol;
}

/// Eigen-decomposition of a Hermitian operator: ascending real energies and
/// a unitary matrix whose columns are the eigenvectors.
struct UnperturbedSolution {
  RealVector energies;
  ComplexMatrix eigenvectors;

  Eigen::Index dimension() const { return energies.size(); }
};

inline UnperturbedSolution eigendecompose_hermitian(
    const ComplexMatrix& m, double hermitian_tol = kDefaultTol,
    double residual_tol = kDefaultTol) {
  require_finite(m, "eigendecompose_hermitian");
  if (!is_hermitian(m, hermitian_tol)) {
    throw PreconditionError(
        "eigendecompose_hermitian: input is not Hermitian within tolerance");
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose_hermitian: solver did not converge");
  }

  UnperturbedSolution sol{solver.eigenvalues(), solver.eigenvectors()};

  // Fix the arbitrary per-column phase: rotate the largest-modulus component
  // onto the positive real axis. Keeps repeated decompositions reproducible.
  for (Eigen::Index j = 0; j < sol.dimension(); ++j) {
    Eigen::Index imax = 0;
    sol.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = sol.eigenvectors(imax, j);
    if (std::abs(pivot) > 0.0) {
      sol.eigenvectors.col(j) *= std::conj(pivot) / std::abs(pivot);
    }
  }

  const double scale = std::max(1.0, max_abs(m));
  const double residual =
      max_abs(m * sol.eigenvectors -
              sol.eigenvectors * sol.energies.asDiagonal().toDenseMatrix()
                                     .cast<Complex>());
  if (residual > residual_tol * scale) {
    throw NumericalError(
        "eigendecompose_hermitian: reconstruction residual " +
        std::to_string(residual) + " exceeds tolerance");
  }
  return sol;
}

/// e^{scale * m}. Hermitian inputs go through the eigendecomposition (exact
/// unitarity of U e^{scale E} U^dag up to rounding); anything else through
/// scaling-and-squaring Pade, which is the reliable route for non-normal
/// matrices.
inline ComplexMatrix matrix_exp(const ComplexMatrix& m, Complex scale,
                                double hermitian_tol = kDefaultTol) {
  require_square(m, "matrix_exp");
  require_finite(m, "matrix_exp");
  if (!std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
    throw PreconditionError("matrix_exp: non-finite scale");
  }
  if (is_hermitian(m, hermitian_tol)) {
    const UnperturbedSolution sol = eigendecompose_hermitian(m, hermitian_tol);
    ComplexVector phases(sol.dimension());
    for (Eigen::Index j = 0; j < sol.dimension(); ++j) {
      phases(j) = std::exp(scale * sol.energies(j));
    }
    return sol.eigenvectors * phases.asDiagonal() *
           sol.eigenvectors.adjoint();
  }
  return expm_dense(scale * m);
}

/// e^{-i H0 t} psi through the stored eigenpairs.
inline ComplexVector evolve_unperturbed(const UnperturbedSolution& sol,
                                        const ComplexVector& psi, double t) {
  if (psi.size() != sol.dimension()) {
    throw DimensionError("evolve_unperturbed: state dimension mismatch");
  }
  ComplexVector coeffs = sol.eigenvectors.adjoint() * psi;
  for (Eigen::Index j = 0; j < sol.dimension(); ++j) {
    coeffs(j) *= std::exp(-kImag * sol.energies(j) * t);
  }
  return sol.eigenvectors * coeffs;
}

}  // namespace qpert
