#pragma once

#include <cmath>
#include <string>

#include "qpert/types.hpp"

namespace qpert {

/// Truncated Fock space: dimension d and mode frequency omega (hbar = 1,
/// unit mass). Quadratic couplings reach n +- 2, so d < 4 would leave no
/// usable interior level and is rejected.
struct FockSpec {
  int dimension;
  double omega;

  FockSpec(int dimension_, double omega_)
      : dimension(dimension_), omega(omega_) {
    if (dimension < 4) {
      throw PreconditionError("FockSpec: dimension must be >= 4, got " +
                              std::to_string(dimension));
    }
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      throw PreconditionError("FockSpec: omega must be positive and finite");
    }
  }
};

/// Guard for operations probing Fock level n: quadratic couplings reach
/// n +- 2 and the top levels carry truncation artifacts, so we require a
/// two-level buffer beyond that.
inline void require_probe_level(const FockSpec& spec, int n) {
  if (n < 0 || spec.dimension < n + 5) {
    throw PreconditionError("Fock level " + std::to_string(n) +
                            " too close to the truncation edge (dimension " +
                            std::to_string(spec.dimension) + ")");
  }
}

/// Annihilation operator: entries a(i-1, i) = sqrt(i), i = 1..d-1.
inline ComplexMatrix annihilation_operator(const FockSpec& spec) {
  const int d = spec.dimension;
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (int i = 1; i < d; ++i) {
    a(i - 1, i) = std::sqrt(static_cast<double>(i));
  }
  return a;
}

inline ComplexMatrix creation_operator(const FockSpec& spec) {
  return annihilation_operator(spec).adjoint();
}

/// Number operator a^dag a; exact under truncation (diag 0..d-1).
inline ComplexMatrix number_operator(const FockSpec& spec) {
  const int d = spec.dimension;
  ComplexMatrix n = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    n(i, i) = static_cast<double>(i);
  }
  return n;
}

/// x = (a + a^dag) / sqrt(2 omega).
inline ComplexMatrix position_operator(const FockSpec& spec) {
  const ComplexMatrix a = annihilation_operator(spec);
  return (a + a.adjoint()) / std::sqrt(2.0 * spec.omega);
}

/// p = i sqrt(omega / 2) (a^dag - a).
inline ComplexMatrix momentum_operator(const FockSpec& spec) {
  const ComplexMatrix a = annihilation_operator(spec);
  return kImag * std::sqrt(spec.omega / 2.0) *
         (ComplexMatrix(a.adjoint()) - a);
}

}  // namespace qpert
