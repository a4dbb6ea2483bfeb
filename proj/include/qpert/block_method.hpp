#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qpert/expm.hpp"
#include "qpert/linalg.hpp"
#include "qpert/types.hpp"

namespace qpert {

/// Order-m block system: the (m+1) x (m+1) block upper-bidiagonal Toeplitz
/// matrix with H0 on the diagonal and V on the superdiagonal. The (1, k+1)
/// block of exp(-i M t) generates the order-k correction to the evolving
/// state.
struct BlockSystem {
  int order = 0;
  Eigen::Index base_dim = 0;
  ComplexMatrix h0;
  ComplexMatrix v;
  ComplexMatrix matrix;  // assembled (m+1)d x (m+1)d
};

inline constexpr int kDefaultMaxOrder = 8;

inline BlockSystem assemble_block_system(const ComplexMatrix& h0,
                                         const ComplexMatrix& v, int order,
                                         double hermitian_tol = kDefaultTol,
                                         int max_order = kDefaultMaxOrder) {
  require_square(h0, "assemble_block_system: h0");
  require_square(v, "assemble_block_system: v");
  if (h0.rows() != v.rows()) {
    throw DimensionError("assemble_block_system: h0 is " +
                         std::to_string(h0.rows()) + "x" +
                         std::to_string(h0.cols()) + " but v is " +
                         std::to_string(v.rows()) + "x" +
                         std::to_string(v.cols()));
  }
  require_finite(h0, "assemble_block_system: h0");
  require_finite(v, "assemble_block_system: v");
  if (!is_hermitian(h0, hermitian_tol)) {
    throw PreconditionError("assemble_block_system: h0 is not Hermitian");
  }
  if (!is_hermitian(v, hermitian_tol)) {
    throw PreconditionError("assemble_block_system: v is not Hermitian");
  }
  if (order < 1 || order > max_order) {
    throw PreconditionError("assemble_block_system: order " +
                            std::to_string(order) + " outside [1, " +
                            std::to_string(max_order) + "]");
  }

  const Eigen::Index d = h0.rows();
  ComplexMatrix m = ComplexMatrix::Zero((order + 1) * d, (order + 1) * d);
  for (int i = 0; i <= order; ++i) {
    m.block(i * d, i * d, d, d) = h0;
    if (i < order) {
      m.block(i * d, (i + 1) * d, d, d) = v;
    }
  }
  return BlockSystem{order, d, h0, v, std::move(m)};
}

/// The (1, col) block of M^n (col is 1-based, matching the block indexing
/// convention), computed by direct repeated multiplication. This is the
/// oracle path, independent of the exponential-based extraction.
inline ComplexMatrix block_power_entry(const BlockSystem& sys, int n,
                                       int col) {
  if (n < 0) {
    throw PreconditionError("block_power_entry: power must be >= 0");
  }
  if (col < 1 || col > sys.order + 1) {
    throw DimensionError("block_power_entry: col " + std::to_string(col) +
                         " outside [1, " + std::to_string(sys.order + 1) +
                         "]");
  }
  ComplexMatrix power =
      ComplexMatrix::Identity(sys.matrix.rows(), sys.matrix.cols());
  for (int i = 0; i < n; ++i) {
    power = power * sys.matrix;
  }
  return power.block(0, (col - 1) * sys.base_dim, sys.base_dim, sys.base_dim);
}

/// First block row [C_0 ... C_m] of a block upper-triangular Toeplitz
/// matrix. Such matrices form an algebra isomorphic to matrix-coefficient
/// polynomials truncated at degree m, with blockwise convolution as the
/// product; exponentiating in it costs O(m^2 d^3) instead of O(m^3 d^3).
struct BlockToeplitzRow {
  std::vector<ComplexMatrix> blocks;
};

struct BlockToeplitzExpmOps {
  using Element = BlockToeplitzRow;

  BlockToeplitzExpmOps(Eigen::Index base_dim, int order)
      : d_(base_dim), m_(order) {}

  Element identity() const {
    Element e;
    e.blocks.assign(m_ + 1, ComplexMatrix::Zero(d_, d_));
    e.blocks[0] = ComplexMatrix::Identity(d_, d_);
    return e;
  }

  Element add(const Element& a, const Element& b) const {
    Element r;
    r.blocks.reserve(m_ + 1);
    for (int k = 0; k <= m_; ++k) {
      r.blocks.push_back(a.blocks[k] + b.blocks[k]);
    }
    return r;
  }

  Element scaled(const Element& a, Complex c) const {
    Element r;
    r.blocks.reserve(m_ + 1);
    for (int k = 0; k <= m_; ++k) {
      r.blocks.push_back(c * a.blocks[k]);
    }
    return r;
  }

  Element mul(const Element& a, const Element& b) const {
    Element r;
    r.blocks.assign(m_ + 1, ComplexMatrix::Zero(d_, d_));
    for (int l = 0; l <= m_; ++l) {
      for (int p = 0; p <= l; ++p) {
        r.blocks[l] += a.blocks[p] * b.blocks[l - p];
      }
    }
    return r;
  }

  // Forward substitution in the truncated polynomial algebra:
  // x_l = a_0^{-1} (b_l - sum_{p=1..l} a_p x_{l-p}).
  Element solve(const Element& a, const Element& b) const {
    Eigen::PartialPivLU<ComplexMatrix> lu(a.blocks[0]);
    Element x;
    x.blocks.reserve(m_ + 1);
    for (int l = 0; l <= m_; ++l) {
      ComplexMatrix rhs = b.blocks[l];
      for (int p = 1; p <= l; ++p) {
        rhs -= a.blocks[p] * x.blocks[l - p];
      }
      x.blocks.push_back(lu.solve(rhs));
    }
    return x;
  }

  // 1-norm of the represented full matrix. The last block column stacks
  // every distinct block, so it attains the maximum column sum.
  double one_norm(const Element& a) const {
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(d_);
    for (const auto& blk : a.blocks) {
      colsum += blk.cwiseAbs().colwise().sum().transpose();
    }
    return colsum.maxCoeff();
  }

 private:
  Eigen::Index d_;
  int m_;
};

/// Which route computes exp(-i M t): the dense exponential of the full
/// assembled matrix (trusted baseline) or the structure-exploiting
/// exponential of the first block row.
enum class BlockExpPath { dense, toeplitz };

/// Per-order corrections at time t: the unperturbed evolution plus the
/// lambda-free correction vectors, so one evolve call serves a whole
/// lambda sweep.
struct CorrectionSeries {
  double time = 0.0;
  ComplexVector zeroth;
  std::vector<ComplexVector> corrections;  // [i] holds the order-(i+1) vector

  int order() const { return static_cast<int>(corrections.size()); }

  /// Order-k correction vector, k = 1..order().
  const ComplexVector& correction(int k) const {
    if (k < 1 || k > order()) {
      throw DimensionError("CorrectionSeries: order " + std::to_string(k) +
                           " outside [1, " + std::to_string(order()) + "]");
    }
    return corrections[static_cast<std::size_t>(k - 1)];
  }
};

inline CorrectionSeries evolve(const BlockSystem& sys,
                               const ComplexVector& psi0, double t,
                               BlockExpPath path = BlockExpPath::dense,
                               double norm_tol = 1e-8) {
  if (psi0.size() != sys.base_dim) {
    throw DimensionError("evolve: state dimension mismatch");
  }
  if (std::abs(psi0.norm() - 1.0) > norm_tol) {
    throw PreconditionError("evolve: initial state is not unit norm");
  }
  if (!std::isfinite(t)) {
    throw PreconditionError("evolve: non-finite time");
  }

  const Eigen::Index d = sys.base_dim;
  CorrectionSeries series;
  series.time = t;
  series.zeroth = matrix_exp(sys.h0, -kImag * t) * psi0;
  series.corrections.reserve(sys.order);

  if (path == BlockExpPath::dense) {
    const ComplexMatrix e = expm_dense(-kImag * t * sys.matrix);
    for (int k = 1; k <= sys.order; ++k) {
      series.corrections.push_back(e.block(0, k * d, d, d) * psi0);
    }
  } else {
    BlockToeplitzExpmOps ops(d, sys.order);
    BlockToeplitzRow arg;
    arg.blocks.assign(sys.order + 1, ComplexMatrix::Zero(d, d));
    arg.blocks[0] = -kImag * t * sys.h0;
    arg.blocks[1] = -kImag * t * sys.v;
    const BlockToeplitzRow row = expm(ops, arg);
    for (int k = 1; k <= sys.order; ++k) {
      series.corrections.push_back(row.blocks[k] * psi0);
    }
  }
  return series;
}

/// zeroth + sum_k lambda^k corrections[k]. Not normalized: the truncated
/// series is not exactly norm-preserving.
inline ComplexVector approximate_state(const CorrectionSeries& series,
                                       double lambda) {
  if (!(std::abs(lambda) < 1.0)) {
    throw PreconditionError("approximate_state: |lambda| must be < 1");
  }
  ComplexVector acc = series.zeroth;
  double weight = 1.0;
  for (const ComplexVector& c : series.corrections) {
    weight *= lambda;
    acc += weight * c;
  }
  return acc;
}

}  // namespace qpert
