#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qpert/types.hpp"

namespace qpert {

// Scaling-and-squaring Pade matrix exponential (Higham 2005, the expm used
// by MATLAB/SciPy). Written against a small algebra interface so the same
// code exponentiates dense matrices and the first block row of block
// upper-triangular Toeplitz matrices:
//
//   struct Ops {
//     using Element = ...;
//     Element identity() const;
//     Element add(const Element&, const Element&) const;
//     Element scaled(const Element&, Complex) const;
//     Element mul(const Element&, const Element&) const;
//     Element solve(const Element& a, const Element& b) const;  // a^{-1} b
//     double one_norm(const Element&) const;
//   };

namespace expm_detail {

// Degree -> largest 1-norm for which that Pade degree meets double precision.
inline constexpr double kTheta3 = 1.495585217958292e-2;
inline constexpr double kTheta5 = 2.539398330063230e-1;
inline constexpr double kTheta7 = 9.504178996162932e-1;
inline constexpr double kTheta9 = 2.097847961257068e0;
inline constexpr double kTheta13 = 5.371920351148152e0;

inline constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0,
                                                 420.0,   30.0,    1.0};
inline constexpr std::array<double, 8> kPade7 = {
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
inline constexpr std::array<double, 10> kPade9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

// U = x * sum_k b[2k+1] pow2[k],  V = sum_k b[2k] pow2[k], where pow2 holds
// the even powers {I, x^2, x^4, ...}.
template <class Ops, std::size_t N>
void pade_uv(const Ops& ops, const typename Ops::Element& x,
             const std::vector<typename Ops::Element>& pow2,
             const std::array<double, N>& b, typename Ops::Element& u,
             typename Ops::Element& v) {
  using Element = typename Ops::Element;
  Element usum = ops.scaled(pow2[0], Complex(b[1], 0.0));
  Element vsum = ops.scaled(pow2[0], Complex(b[0], 0.0));
  for (std::size_t k = 1; 2 * k + 1 < N; ++k) {
    usum = ops.add(usum, ops.scaled(pow2[k], Complex(b[2 * k + 1], 0.0)));
  }
  for (std::size_t k = 1; 2 * k < N; ++k) {
    vsum = ops.add(vsum, ops.scaled(pow2[k], Complex(b[2 * k], 0.0)));
  }
  u = ops.mul(x, usum);
  v = vsum;
}

}  // namespace expm_detail

/// exp(a) by scaling-and-squaring with diagonal Pade approximants.
template <class Ops>
typename Ops::Element expm(const Ops& ops, const typename Ops::Element& a) {
  using namespace expm_detail;
  using Element = typename Ops::Element;

  const double norm = ops.one_norm(a);
  int squarings = 0;
  Element x = a;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    x = ops.scaled(a, Complex(std::ldexp(1.0, -squarings), 0.0));
  }

  // Even powers of the (possibly scaled) argument. pow2[k] = x^{2k}.
  std::vector<Element> pow2;
  pow2.push_back(ops.identity());
  pow2.push_back(ops.mul(x, x));

  Element u, v;
  if (squarings == 0 && norm <= kTheta3) {
    pade_uv(ops, x, pow2, kPade3, u, v);
  } else if (squarings == 0 && norm <= kTheta5) {
    pow2.push_back(ops.mul(pow2[1], pow2[1]));
    pade_uv(ops, x, pow2, kPade5, u, v);
  } else if (squarings == 0 && norm <= kTheta7) {
    pow2.push_back(ops.mul(pow2[1], pow2[1]));
    pow2.push_back(ops.mul(pow2[1], pow2[2]));
    pade_uv(ops, x, pow2, kPade7, u, v);
  } else if (squarings == 0 && norm <= kTheta9) {
    pow2.push_back(ops.mul(pow2[1], pow2[1]));
    pow2.push_back(ops.mul(pow2[1], pow2[2]));
    pow2.push_back(ops.mul(pow2[1], pow2[3]));
    pade_uv(ops, x, pow2, kPade9, u, v);
  } else {
    // Degree 13 with the factored evaluation: only x^2, x^4, x^6 are formed.
    const Element& x2 = pow2[1];
    const Element x4 = ops.mul(x2, x2);
    const Element x6 = ops.mul(x2, x4);
    const auto& b = kPade13;
    Element w = ops.add(ops.scaled(x6, Complex(b[13], 0.0)),
                        ops.add(ops.scaled(x4, Complex(b[11], 0.0)),
                                ops.scaled(x2, Complex(b[9], 0.0))));
    Element usum =
        ops.add(ops.mul(x6, w),
                ops.add(ops.scaled(x6, Complex(b[7], 0.0)),
                        ops.add(ops.scaled(x4, Complex(b[5], 0.0)),
                                ops.add(ops.scaled(x2, Complex(b[3], 0.0)),
                                        ops.scaled(pow2[0],
                                                   Complex(b[1], 0.0))))));
    u = ops.mul(x, usum);
    Element z = ops.add(ops.scaled(x6, Complex(b[12], 0.0)),
                        ops.add(ops.scaled(x4, Complex(b[10], 0.0)),
                                ops.scaled(x2, Complex(b[8], 0.0))));
    v = ops.add(ops.mul(x6, z),
                ops.add(ops.scaled(x6, Complex(b[6], 0.0)),
                        ops.add(ops.scaled(x4, Complex(b[4], 0.0)),
                                ops.add(ops.scaled(x2, Complex(b[2], 0.0)),
                                        ops.scaled(pow2[0],
                                                   Complex(b[0], 0.0))))));
  }

  // r = (v - u)^{-1} (v + u), then undo the scaling by repeated squaring.
  const Element p = ops.add(v, u);
  const Element q = ops.add(v, ops.scaled(u, Complex(-1.0, 0.0)));
  Element r = ops.solve(q, p);
  for (int i = 0; i < squarings; ++i) {
    r = ops.mul(r, r);
  }
  return r;
}

/// Dense complex matrices under the expm algebra interface.
struct DenseExpmOps {
  using Element = ComplexMatrix;

  explicit DenseExpmOps(Eigen::Index n) : n_(n) {}

  Element identity() const { return ComplexMatrix::Identity(n_, n_); }
  Element add(const Element& a, const Element& b) const { return a + b; }
  Element scaled(const Element& a, Complex c) const { return c * a; }
  Element mul(const Element& a, const Element& b) const { return a * b; }
  Element solve(const Element& a, const Element& b) const {
    return Eigen::PartialPivLU<ComplexMatrix>(a).solve(b);
  }
  double one_norm(const Element& a) const {
    return a.cwiseAbs().colwise().sum().maxCoeff();
  }

 private:
  Eigen::Index n_;
};

/// exp(a) for a dense square complex matrix.
inline ComplexMatrix expm_dense(const ComplexMatrix& a) {
  require_square(a, "expm_dense");
  return expm(DenseExpmOps(a.rows()), a);
}

}  // namespace qpert
