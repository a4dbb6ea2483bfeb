#pragma once

#include <cmath>
#include <string>

#include "qpert/fock.hpp"
#include "qpert/linalg.hpp"
#include "qpert/types.hpp"

namespace qpert {

// Harmonic oscillator with a quadratic perturbation: the frequency shifts
// from omega to omega sqrt(1 + lambda), so the truncated problem has an
// exact propagator (by eigendecomposition) and an exact squeeze-operator
// factorization. This is the highest-authority ground truth for the
// perturbative machinery.

struct OscillatorProblem {
  FockSpec spec;
  double lambda;
  double tilde_omega;  // omega sqrt(1 + lambda)
};

inline OscillatorProblem make_oscillator_problem(const FockSpec& spec,
                                                 double lambda) {
  if (!std::isfinite(lambda) || !(1.0 + lambda > 0.0)) {
    throw PreconditionError(
        "make_oscillator_problem: need 1 + lambda > 0, got lambda = " +
        std::to_string(lambda));
  }
  return OscillatorProblem{spec, lambda,
                           spec.omega * std::sqrt(1.0 + lambda)};
}

struct OscillatorHamiltonians {
  ComplexMatrix h0;
  ComplexMatrix v;
};

/// H0 = (p^2 + omega^2 x^2) / 2 and V = (omega^2 / 2) x^2, built from the
/// truncated ladder operators so that H0 + lambda V = (p^2 + w~^2 x^2) / 2
/// holds entrywise. The (d-1, d-1) entries carry the usual truncation
/// artifact; assertions stay away from the basis edge.
inline OscillatorHamiltonians oscillator_hamiltonians(
    const OscillatorProblem& p) {
  const ComplexMatrix x = position_operator(p.spec);
  const ComplexMatrix mom = momentum_operator(p.spec);
  const double w2 = p.spec.omega * p.spec.omega;
  OscillatorHamiltonians h;
  h.v = 0.5 * w2 * (x * x);
  h.h0 = 0.5 * (mom * mom) + h.v;
  return h;
}

/// S(lambda) = exp[(ln(1 + lambda) / 8) (a^2 - a^dag^2)]; unitary away from
/// the truncation edge.
inline ComplexMatrix squeeze_operator(const OscillatorProblem& p) {
  const ComplexMatrix a = annihilation_operator(p.spec);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix generator = a2 - a2.adjoint();
  return matrix_exp(generator, Complex(std::log1p(p.lambda) / 8.0, 0.0));
}

/// Time-dependent squeeze factor: exp[(ln(1 + lambda) / 8)
/// (e^{-2 i w~ t} a^2 - e^{+2 i w~ t} a^dag^2)].
inline ComplexMatrix time_squeeze_operator(const OscillatorProblem& p,
                                           double t) {
  const ComplexMatrix a = annihilation_operator(p.spec);
  const ComplexMatrix a2 = a * a;
  const Complex rot = std::exp(-2.0 * kImag * p.tilde_omega * t);
  const ComplexMatrix generator =
      rot * a2 - std::conj(rot) * ComplexMatrix(a2.adjoint());
  return matrix_exp(generator, Complex(std::log1p(p.lambda) / 8.0, 0.0));
}

namespace oscillator_detail {

inline void require_interior_support(const OscillatorProblem& p,
                                     const ComplexVector& psi0,
                                     const std::string& what) {
  const int d = p.spec.dimension;
  if (psi0.size() != d) {
    throw DimensionError(what + ": state dimension mismatch");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-8) {
    throw PreconditionError(what + ": initial state is not unit norm");
  }
  double tail = 0.0;
  for (int j = d - 5; j < d; ++j) {
    tail += std::norm(psi0(j));
  }
  if (std::sqrt(tail) > 1e-10) {
    throw PreconditionError(
        what + ": initial state has support within 5 levels of the "
               "truncation edge");
  }
}

}  // namespace oscillator_detail

/// Exact evolution under H0 + lambda V, by eigendecomposition of the full
/// truncated operator. This is the authoritative route; the squeeze
/// factorization below is the verified secondary one.
inline ComplexVector exact_evolve(const OscillatorProblem& p,
                                  const ComplexVector& psi0, double t) {
  oscillator_detail::require_interior_support(p, psi0, "exact_evolve");
  const OscillatorHamiltonians h = oscillator_hamiltonians(p);
  const UnperturbedSolution sol =
      eigendecompose_hermitian(h.h0 + p.lambda * h.v);
  return evolve_unperturbed(sol, psi0, t);
}

/// Factored propagator e^{-i t w~ (n + 1/2)} S_w~(lambda, t) S^dag(lambda).
/// Agrees with exact_evolve within truncation tolerance for states supported
/// well inside the basis.
inline ComplexVector exact_evolve_squeeze_route(const OscillatorProblem& p,
                                                const ComplexVector& psi0,
                                                double t) {
  oscillator_detail::require_interior_support(p, psi0,
                                              "exact_evolve_squeeze_route");
  const int d = p.spec.dimension;
  ComplexVector state = squeeze_operator(p).adjoint() * psi0;
  state = time_squeeze_operator(p, t) * state;
  for (int j = 0; j < d; ++j) {
    state(j) *= std::exp(-kImag * p.tilde_omega * (j + 0.5) * t);
  }
  return state;
}

/// Analytic order-1 correction for the initial Fock state |n>: the
/// stationary coefficients +-sqrt(n(n-1))/8 on |n-2>, -+sqrt((n+1)(n+2))/8
/// on |n+2>, the -i t Delta1 phase term on |n> with
/// Delta1 = (omega/4)(2n+1), and their time-phased counterparts.
inline ComplexVector first_order_reference(const OscillatorProblem& p, int n,
                                           double t) {
  const int d = p.spec.dimension;
  if (n < 0 || n > d - 6) {
    throw PreconditionError("first_order_reference: level " +
                            std::to_string(n) +
                            " outside the truncation-safe range [0, " +
                            std::to_string(d - 6) + "]");
  }
  const double omega = p.spec.omega;
  const auto energy = [omega](int j) { return omega * (j + 0.5); };
  const Complex phase_n = std::exp(-kImag * energy(n) * t);

  ComplexVector out = ComplexVector::Zero(d);
  out(n) = -kImag * t * (omega / 4.0) * (2.0 * n + 1.0) * phase_n;
  if (n >= 2) {
    const double down = std::sqrt(static_cast<double>(n) * (n - 1)) / 8.0;
    out(n - 2) = down * (phase_n - std::exp(-kImag * energy(n - 2) * t));
  }
  const double up =
      std::sqrt(static_cast<double>(n + 1) * (n + 2)) / 8.0;
  out(n + 2) = -up * (phase_n - std::exp(-kImag * energy(n + 2) * t));
  return out;
}

}  // namespace qpert
