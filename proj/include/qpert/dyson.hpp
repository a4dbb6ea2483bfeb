#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qpert/block_method.hpp"
#include "qpert/linalg.hpp"
#include "qpert/types.hpp"

namespace qpert {

// Interaction-picture quadrature for the nested time-ordered integrals that
// define the order-k corrections. Serves as an oracle for the block-method
// extraction; the recursion over cumulative inner integrals keeps the cost
// at O(k N) per outer node instead of O(N^k).

inline constexpr int kDysonOrderCap = 4;

/// Composite Gauss-Legendre grid on [0, t]. Resolving phases up to the
/// spectral range W of H0 wants panels >= 8 W t / (2 pi) as a rule of thumb.
struct QuadratureScheme {
  int panels = 64;
  int nodes_per_panel = 4;
};

inline void validate(const QuadratureScheme& scheme) {
  if (scheme.panels < 1 || scheme.nodes_per_panel < 1) {
    throw PreconditionError("QuadratureScheme: panels and nodes must be >= 1");
  }
  if (scheme.panels * scheme.nodes_per_panel < 8) {
    throw PreconditionError(
        "QuadratureScheme: need at least 8 total nodes, got " +
        std::to_string(scheme.panels * scheme.nodes_per_panel));
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int q) {
  if (q < 1) {
    throw PreconditionError("gauss_legendre: need at least one node");
  }
  Eigen::VectorXd x(q), w(q);
  const int half = (q + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double p1 = 0.0, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= q; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = q * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x(i) = -z;
    x(q - 1 - i) = z;
    w(i) = 2.0 / ((1.0 - z * z) * dp * dp);
    w(q - 1 - i) = w(i);
  }
  if (q == 1) {
    x(0) = 0.0;
    w(0) = 2.0;
  }
  return {x, w};
}

namespace dyson_detail {

// Lagrange basis polynomial through `nodes`, evaluated at x.
inline double lagrange_eval(const Eigen::VectorXd& nodes, int j, double x) {
  double prod = 1.0;
  for (int i = 0; i < nodes.size(); ++i) {
    if (i == j) continue;
    prod *= (x - nodes(i)) / (nodes(j) - nodes(i));
  }
  return prod;
}

// S(i, j) = integral_{-1}^{x_i} L_j(x) dx: partial integration of the
// interpolant through the panel nodes. A q-point rule on each subinterval
// is exact for the degree-(q-1) basis polynomials.
inline Eigen::MatrixXd partial_integration_matrix(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& w) {
  const int q = static_cast<int>(x.size());
  Eigen::MatrixXd s(q, q);
  for (int i = 0; i < q; ++i) {
    const double a = -1.0, b = x(i);
    const double mid = 0.5 * (a + b), hh = 0.5 * (b - a);
    for (int j = 0; j < q; ++j) {
      double acc = 0.0;
      for (int g = 0; g < q; ++g) {
        acc += w(g) * lagrange_eval(x, j, mid + hh * x(g));
      }
      s(i, j) = hh * acc;
    }
  }
  return s;
}

// Applies the interaction-picture operator at time tau to an eigenbasis
// vector: D(tau) (V~ (D(-tau) g)) with D(tau) = diag(e^{i E tau}).
inline ComplexVector apply_interaction(const ComplexMatrix& vt,
                                       const RealVector& energies, double tau,
                                       const ComplexVector& g) {
  const Eigen::Index d = energies.size();
  ComplexVector tmp(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    tmp(j) = std::exp(-kImag * energies(j) * tau) * g(j);
  }
  ComplexVector out = vt * tmp;
  for (Eigen::Index j = 0; j < d; ++j) {
    out(j) *= std::exp(kImag * energies(j) * tau);
  }
  return out;
}

}  // namespace dyson_detail

/// V(t1) = e^{i H0 t1} V e^{-i H0 t1}, computed in the eigenbasis as the
/// entrywise phase e^{i (E_j - E_k) t1} on V_jk and mapped back.
inline ComplexMatrix interaction_picture_v(const UnperturbedSolution& sol,
                                           const ComplexMatrix& v,
                                           double t1) {
  if (v.rows() != sol.dimension() || v.cols() != sol.dimension()) {
    throw DimensionError("interaction_picture_v: operator mismatch");
  }
  if (!std::isfinite(t1)) {
    throw PreconditionError("interaction_picture_v: non-finite time");
  }
  ComplexMatrix vt = sol.eigenvectors.adjoint() * v * sol.eigenvectors;
  for (Eigen::Index j = 0; j < sol.dimension(); ++j) {
    for (Eigen::Index k = 0; k < sol.dimension(); ++k) {
      vt(j, k) *= std::exp(kImag * (sol.energies(j) - sol.energies(k)) * t1);
    }
  }
  return sol.eigenvectors * vt * sol.eigenvectors.adjoint();
}

/// Order-k term of the time-ordered expansion:
/// (-i)^k e^{-i H0 t} int_0^t dt1 ... int_0^{t_{k-1}} dt_k
///     V(t1) ... V(t_k) psi0,
/// evaluated by recursing on the cumulative inner integrals
/// g_j(s) = -i int_0^s V(tau) g_{j-1}(tau) dtau over a shared composite
/// Gauss-Legendre grid. Later-time factors always act on the left.
inline ComplexVector dyson_term(const UnperturbedSolution& sol,
                                const ComplexMatrix& v,
                                const ComplexVector& psi0, double t, int k,
                                const QuadratureScheme& scheme,
                                int order_cap = kDysonOrderCap) {
  validate(scheme);
  if (k < 1) {
    throw PreconditionError("dyson_term: order must be >= 1");
  }
  if (k > order_cap) {
    throw PreconditionError("dyson_term: order " + std::to_string(k) +
                            " exceeds the cap " + std::to_string(order_cap));
  }
  if (psi0.size() != sol.dimension()) {
    throw DimensionError("dyson_term: state dimension mismatch");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-8) {
    throw PreconditionError("dyson_term: initial state is not unit norm");
  }
  if (!std::isfinite(t)) {
    throw PreconditionError("dyson_term: non-finite time");
  }

  const Eigen::Index d = sol.dimension();
  if (t == 0.0) {
    return ComplexVector::Zero(d);
  }

  const int np = scheme.panels;
  const int q = scheme.nodes_per_panel;
  const auto [gx, gw] = gauss_legendre(q);
  const Eigen::MatrixXd partial =
      dyson_detail::partial_integration_matrix(gx, gw);

  // Global node positions and weights.
  const double h = t / np;
  std::vector<double> tau(np * q);
  std::vector<double> weight(np * q);
  for (int p = 0; p < np; ++p) {
    const double a = p * h;
    for (int i = 0; i < q; ++i) {
      tau[p * q + i] = a + 0.5 * h * (gx(i) + 1.0);
      weight[p * q + i] = 0.5 * h * gw(i);
    }
  }

  const ComplexMatrix vt =
      sol.eigenvectors.adjoint() * v * sol.eigenvectors;
  const ComplexVector psi_eig = sol.eigenvectors.adjoint() * psi0;

  // g_0 is the constant initial state.
  std::vector<ComplexVector> g(np * q, psi_eig);
  ComplexVector g_end = psi_eig;

  for (int level = 1; level <= k; ++level) {
    std::vector<ComplexVector> f(np * q);
    for (int idx = 0; idx < np * q; ++idx) {
      f[idx] = dyson_detail::apply_interaction(vt, sol.energies, tau[idx],
                                               g[idx]);
    }

    ComplexVector running = ComplexVector::Zero(d);  // integral over panels < p
    for (int p = 0; p < np; ++p) {
      for (int i = 0; i < q; ++i) {
        ComplexVector inner = ComplexVector::Zero(d);
        for (int j = 0; j < q; ++j) {
          inner += partial(i, j) * f[p * q + j];
        }
        g[p * q + i] = -kImag * (running + 0.5 * h * inner);
      }
      for (int i = 0; i < q; ++i) {
        running += weight[p * q + i] * f[p * q + i];
      }
    }
    g_end = -kImag * running;
  }

  for (Eigen::Index j = 0; j < d; ++j) {
    g_end(j) *= std::exp(-kImag * sol.energies(j) * t);
  }
  return sol.eigenvectors * g_end;
}

/// Coefficient-by-coefficient residual between the quadrature time-ordered
/// terms and the block-exponential extraction, maximized over a fixed probe
/// set of unit vectors. The common unperturbed prefactor is unitary and
/// drops out of the norm, so order 0 compares the propagated probes
/// directly (identically zero by construction).
inline double dyson_identity_residual(const UnperturbedSolution& sol,
                                      const ComplexMatrix& v, double t,
                                      int order,
                                      const QuadratureScheme& scheme,
                                      int order_cap = kDysonOrderCap) {
  if (order < 0 || order > order_cap) {
    throw PreconditionError("dyson_identity_residual: order " +
                            std::to_string(order) + " outside [0, " +
                            std::to_string(order_cap) + "]");
  }
  validate(scheme);

  const Eigen::Index d = sol.dimension();
  std::vector<ComplexVector> probes;
  const Eigen::Index n_basis = std::min<Eigen::Index>(d, 4);
  for (Eigen::Index j = 0; j < n_basis; ++j) {
    probes.push_back(sol.eigenvectors.col(j));
  }
  ComplexVector mixed = ComplexVector::Zero(d);
  for (Eigen::Index j = 0; j < n_basis; ++j) {
    mixed += sol.eigenvectors.col(j);
  }
  probes.push_back(mixed / mixed.norm());

  BlockSystem sys;
  if (order >= 1) {
    const ComplexMatrix h0 = sol.eigenvectors *
                             sol.energies.asDiagonal().toDenseMatrix()
                                 .cast<Complex>() *
                             sol.eigenvectors.adjoint();
    sys = assemble_block_system(h0, v, order);
  }

  double residual = 0.0;
  for (const ComplexVector& psi : probes) {
    if (order >= 1) {
      const CorrectionSeries series = evolve(sys, psi, t);
      for (int k = 1; k <= order; ++k) {
        const ComplexVector lhs = dyson_term(sol, v, psi, t, k, scheme,
                                             order_cap);
        residual = std::max(residual, (lhs - series.correction(k)).norm());
      }
    }
    // Order 0: both sides are the same unperturbed propagation.
    const ComplexVector zl = evolve_unperturbed(sol, psi, t);
    const ComplexVector zr = evolve_unperturbed(sol, psi, t);
    residual = std::max(residual, (zl - zr).norm());
  }
  return residual;
}

}  // namespace qpert
