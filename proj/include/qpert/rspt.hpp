#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "qpert/linalg.hpp"
#include "qpert/types.hpp"

namespace qpert {

// Stationary (Rayleigh-Schrodinger) corrections and their time-dependent
// counterparts for a nondegenerate level n. All state vectors here hold
// coefficients in the H0 eigenbasis; rs_correction_evolution maps the
// assembled corrections back to the original basis for comparison with the
// block-method extraction.

/// First two stationary corrections for level n: energy shifts delta1,
/// delta2 and state corrections state1, state2 (eigenbasis coefficients,
/// zero component on level n).
struct RSCorrections {
  int level;
  double delta1;
  double delta2;
  ComplexVector state1;
  ComplexVector state2;
};

/// Time-phased companions of the stationary corrections. n1_t reduces to
/// state1 at t = 0 and n2_t to state2; n2_1_t is the extra cross term that
/// vanishes at t = 0.
struct TimeDependentTerms {
  ComplexVector n1_t;
  ComplexVector n2_t;
  ComplexVector n2_1_t;
};

/// Scale-invariant collision threshold: 1e-8 times the spectral range.
inline double default_degeneracy_tol(const UnperturbedSolution& sol) {
  const double range =
      sol.energies(sol.dimension() - 1) - sol.energies(0);
  return 1e-8 * range;
}

namespace rspt_detail {

inline void require_level(const UnperturbedSolution& sol, int n,
                          const std::string& what) {
  if (n < 0 || n >= sol.dimension()) {
    throw DimensionError(what + ": level " + std::to_string(n) +
                         " outside [0, " + std::to_string(sol.dimension()) +
                         ")");
  }
}

inline void require_nondegenerate(const UnperturbedSolution& sol, int n,
                                  double tol) {
  double min_gap = std::numeric_limits<double>::infinity();
  int offender = -1;
  for (Eigen::Index k = 0; k < sol.dimension(); ++k) {
    if (k == n) continue;
    const double gap = std::abs(sol.energies(n) - sol.energies(k));
    if (gap < min_gap) {
      min_gap = gap;
      offender = static_cast<int>(k);
    }
  }
  if (!(min_gap > tol)) {
    throw DegeneracyError(n, offender, min_gap);
  }
}

// integral_0^t e^{i w t1} dt1 with the w -> 0 limit taken explicitly.
inline Complex phase_integral(double w, double t, double tol) {
  if (std::abs(w) <= tol) {
    return Complex(t, 0.0);
  }
  return (std::exp(kImag * w * t) - 1.0) / (kImag * w);
}

}  // namespace rspt_detail

/// V_{kn} = <k|V|n> in the H0 eigenbasis.
inline Complex coupling(const UnperturbedSolution& sol,
                        const ComplexMatrix& v, int k, int n) {
  rspt_detail::require_level(sol, k, "coupling");
  rspt_detail::require_level(sol, n, "coupling");
  if (v.rows() != sol.dimension() || v.cols() != sol.dimension()) {
    throw DimensionError("coupling: operator dimension mismatch");
  }
  return sol.eigenvectors.col(k).dot(v * sol.eigenvectors.col(n));
}

inline RSCorrections rs_corrections(const UnperturbedSolution& sol,
                                    const ComplexMatrix& v, int n,
                                    double degeneracy_tol) {
  rspt_detail::require_level(sol, n, "rs_corrections");
  if (v.rows() != sol.dimension() || v.cols() != sol.dimension()) {
    throw DimensionError("rs_corrections: operator dimension mismatch");
  }
  rspt_detail::require_nondegenerate(sol, n, degeneracy_tol);

  const Eigen::Index d = sol.dimension();
  const ComplexMatrix vt =
      sol.eigenvectors.adjoint() * v * sol.eigenvectors;
  const RealVector& e = sol.energies;

  RSCorrections rs;
  rs.level = n;
  rs.delta1 = vt(n, n).real();
  rs.delta2 = 0.0;
  rs.state1 = ComplexVector::Zero(d);
  rs.state2 = ComplexVector::Zero(d);

  for (Eigen::Index k = 0; k < d; ++k) {
    if (k == n) continue;
    const double gap = e(n) - e(k);
    rs.delta2 += std::norm(vt(k, n)) / gap;
    rs.state1(k) = vt(k, n) / gap;

    Complex acc = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
      if (m == n) continue;
      acc += vt(k, m) * vt(m, n) / (gap * (e(n) - e(m)));
    }
    rs.state2(k) = acc - vt(n, n) * vt(k, n) / (gap * gap);
  }
  return rs;
}

inline TimeDependentTerms rs_time_dependent_terms(
    const UnperturbedSolution& sol, const ComplexMatrix& v, int n, double t,
    double degeneracy_tol) {
  rspt_detail::require_level(sol, n, "rs_time_dependent_terms");
  if (v.rows() != sol.dimension() || v.cols() != sol.dimension()) {
    throw DimensionError("rs_time_dependent_terms: operator mismatch");
  }
  rspt_detail::require_nondegenerate(sol, n, degeneracy_tol);

  const Eigen::Index d = sol.dimension();
  const ComplexMatrix vt =
      sol.eigenvectors.adjoint() * v * sol.eigenvectors;
  const RealVector& e = sol.energies;
  const double delta1 = vt(n, n).real();

  TimeDependentTerms terms;
  terms.n1_t = ComplexVector::Zero(d);
  terms.n2_t = ComplexVector::Zero(d);
  terms.n2_1_t = ComplexVector::Zero(d);

  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex phase_k = std::exp(-kImag * e(k) * t);

    // Cross term: present for every k, including k = n.
    Complex cross = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
      if (m == n) continue;
      cross += vt(k, m) * vt(m, n) / (e(n) - e(m)) *
               rspt_detail::phase_integral(e(k) - e(m), t, degeneracy_tol);
    }
    terms.n2_1_t(k) = kImag * phase_k * cross;

    if (k == n) continue;
    const double gap = e(n) - e(k);
    terms.n1_t(k) = vt(k, n) / gap * phase_k;

    Complex second = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
      if (m == n) continue;
      second += vt(k, m) * vt(m, n) / (gap * (e(n) - e(m)));
    }
    second -= delta1 * vt(k, n) / (gap * gap);
    terms.n2_t(k) = phase_k * second;
  }
  return terms;
}

/// Order-k (k = 1 or 2) time-dependent correction assembled from the
/// stationary corrections and their time-phased companions, mapped back to
/// the original basis. For nondegenerate spectra this equals the
/// block-method extraction of the same order.
inline ComplexVector rs_correction_evolution(const UnperturbedSolution& sol,
                                             const ComplexMatrix& v, int n,
                                             double t, int order,
                                             double degeneracy_tol) {
  if (order != 1 && order != 2) {
    throw PreconditionError(
        "rs_correction_evolution: closed forms exist for orders 1 and 2 "
        "only");
  }
  const RSCorrections rs = rs_corrections(sol, v, n, degeneracy_tol);
  const TimeDependentTerms terms =
      rs_time_dependent_terms(sol, v, n, t, degeneracy_tol);
  const Complex phase_n = std::exp(-kImag * sol.energies(n) * t);

  ComplexVector coeffs;
  if (order == 1) {
    coeffs = rs.state1;
    coeffs(n) -= kImag * t * rs.delta1;
    coeffs = phase_n * coeffs - terms.n1_t;
  } else {
    coeffs = rs.state2 - kImag * t * rs.delta1 * rs.state1;
    coeffs(n) += -kImag * t * rs.delta2 -
                 0.5 * t * t * rs.delta1 * rs.delta1;
    coeffs = phase_n * coeffs - terms.n2_t + terms.n2_1_t;
  }
  return sol.eigenvectors * coeffs;
}

}  // namespace qpert
