#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qpert {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

/// Matrix shapes do not line up (non-square input, mismatched operands,
/// out-of-range block index).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition failed (non-Hermitian operator, non-unit state,
/// non-finite entries, parameter out of range).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation exceeded its error budget (e.g. eigendecomposition residual).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two unperturbed levels collide within the configured tolerance, so the
/// stationary perturbation formulas are invalid. Carries the offending pair.
class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(int level_a, int level_b, double gap)
      : std::runtime_error("degenerate levels " + std::to_string(level_a) +
                           " and " + std::to_string(level_b) +
                           " (gap " + std::to_string(gap) +
                           "): stationary corrections are undefined"),
        level_a_(level_a),
        level_b_(level_b),
        gap_(gap) {}

  int level_a() const { return level_a_; }
  int level_b() const { return level_b_; }
  double gap() const { return gap_; }

 private:
  int level_a_;
  int level_b_;
  double gap_;
};

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline void require_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw PreconditionError(what + ": non-finite entries");
  }
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(what + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

/// Largest entrywise modulus; the metric used by all tolerance checks.
inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace qpert
