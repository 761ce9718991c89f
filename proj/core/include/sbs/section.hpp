#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbs/geometry.hpp"

namespace sbs {

/// Holomorphic section of the polarizing bundle, as homogeneous coefficient
/// data:
///   CP1/O(d):   c[k] multiplies z0^(d-k) z1^k, k = 0..d
///   Quadric:    alpha row-major [a00, a01, a10, a11], s = sum a_ij x_i y_j
///   CP2/O(2):   packed symmetric [q00, q01, q02, q11, q12, q22],
///               s = sum_{i<=j} q_ij z_i z_j
struct Section {
  Model model;
  std::vector<cplx> c;

  static Section make(const Model& m, std::vector<cplx> coeffs);
  static Section fermat(const Model& m);     // z0^d + z1^d / identity alpha / sum z_i^2
  static Section reducible(const Model& m);  // z0^d / x0*y0 / z0^2
  static Section antipodal(const Model& m);  // CP1 d=2 only: z0^2 + z1^2 (zeros +-i)
  static Section random(const Model& m, std::uint64_t seed);

  Section scaled(cplx factor) const;
  Section normalized() const;  // unit l2 coefficient norm
  double coeff_scale() const;  // max |c_k|

  Eigen::Matrix2cd alpha() const;      // Quadric view
  Eigen::Matrix3cd quad_form() const;  // CP2 view (full symmetric matrix)
};

/// Chart-local value and holomorphic derivatives of the section's defining
/// polynomial f in the chart of p (so that |s|^2 = |f|^2 / denom).
struct ChartPoly {
  cplx f;
  Eigen::Vector2cd df;   // df/dz_j
  Eigen::Matrix2cd d2f;  // d2f/dz_j dz_k
};
ChartPoly section_chart_eval(const Section& s, const Point& p);

/// |s(p)|^2 in the standard hermitian bundle metric; zero exactly on the
/// divisor, invariant under unit-phase rescaling of homogeneous coordinates.
double norm_sq(const Section& s, const Point& p);

// relative divisor guard: evaluation of phi and its derivatives is rejected
// when norm_sq < kDivisorGuardRel * coeff_scale()^2
inline constexpr double kDivisorGuardRel = 1e-12;

// --- polynomial helpers (CP1 sections) --------------------------------------

/// Roots of sum c_k z^k via the companion matrix; roots at infinity (leading
/// zero coefficients) are dropped and reported through `degree_drop`.
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs, int* degree_drop = nullptr);

/// Zeros of a CP1 section as points of the model, with multiplicities
/// (clustered within `tol`); includes [0:1] when the chart-0 degree drops.
struct DivisorZero {
  Point location;
  int multiplicity;
};
std::vector<DivisorZero> section_zeros_cp1(const Section& s, double tol = 1e-7);

/// Discriminant of the degree-d binary form (resultant of the two partials,
/// normalized); vanishes iff the section has a multiple zero.
cplx cp1_discriminant(const Section& s);

}  // namespace sbs
