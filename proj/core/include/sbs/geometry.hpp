#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "sbs/errors.hpp"

namespace sbs {

using cplx = std::complex<double>;

enum class ModelKind { CP1, Quadric, CP2 };

// Computations stay inside |affine| <= kChartRadius so every (1+|z|^2)-type
// denominator is well conditioned; points are re-charted past it.
inline constexpr double kChartRadius = 1.5;
// Point equality tolerance, chordal distance between unit homogeneous reps.
inline constexpr double kPointTol = 1e-9;

/// A polarized toy model: CP^1 with O(d), the quadric CP^1 x CP^1 with
/// O(1,1), or CP^2 with O(2).  The symplectic form is normalized so that
/// its class equals c1 of the polarizing bundle (total area d on CP^1).
struct Model {
  ModelKind kind = ModelKind::CP1;
  int degree = 1;  // d for CP1; fixed 1 (bidegree (1,1)) for Quadric; fixed 2 for CP2

  static Model cp1(int d);
  static Model quadric();
  static Model cp2();

  int complex_dim() const { return kind == ModelKind::CP1 ? 1 : 2; }
  int real_dim() const { return 2 * complex_dim(); }
  int chart_count() const;
  int coefficient_count() const;  // d+1 / 4 / 6 (packed symmetric)
  // \int omega (n=1) resp. \int omega^2 (n=2): d, 2, 4.
  double total_mass() const;
  std::string name() const;

  bool operator==(const Model&) const = default;
};

Model model_from_name(const std::string& name, int degree);

/// A point of the model: a chart index, affine coordinates in that chart and
/// a cached unit-norm homogeneous representative (two of them for the
/// quadric).  The representative's phase is canonicalized so that the largest
/// component is real positive.
struct Point {
  ModelKind kind = ModelKind::CP1;
  int chart = 0;
  std::array<cplx, 2> affine{};  // first complex_dim entries used
  Eigen::Vector3cd h = Eigen::Vector3cd::Zero();   // CP1: [0..1], CP2: [0..2], Quadric: x factor
  Eigen::Vector2cd hy = Eigen::Vector2cd::Zero();  // Quadric: y factor
};

Point point_from_affine(const Model& m, int chart, const std::array<cplx, 2>& affine);
Point point_from_homogeneous(const Model& m, const Eigen::Vector3cd& h,
                             const Eigen::Vector2cd& hy = Eigen::Vector2cd::Zero());

/// Re-express the same underlying point in `target_chart`.
/// Throws ChartError when the defining homogeneous coordinate vanishes there.
Point transition(const Model& m, const Point& p, int target_chart);

/// Move to the chart where all affine coordinates have modulus <= 1.
Point rechart(const Model& m, const Point& p);

int preferred_chart(const Model& m, const Point& p);

/// Chordal distance between points (max over the two factors on the quadric).
double chordal(const Model& m, const Point& a, const Point& b);
bool same_point(const Model& m, const Point& a, const Point& b, double tol = kPointTol);

/// Tangent vector at a point, components in the base point's chart,
/// interleaved (x1, y1, x2, y2); only the first 2n entries are used.
struct Tangent {
  Point base;
  Eigen::Vector4d v = Eigen::Vector4d::Zero();
};

/// Complex Jacobian of the chart transition map at p (n x n, block diagonal
/// per factor on the quadric).
Eigen::Matrix2cd transition_jacobian(const Model& m, const Point& p, int target_chart);
Tangent transport(const Model& m, const Tangent& t, int target_chart);

// --- Fubini-Study forms -----------------------------------------------------
//
// All three models carry the Kahler kernel W(p), an n x n hermitian matrix
// with
//   omega(u, v) = -2 Im sum_{jk} W_jk u_j conj(v_k)
//   g(u, v)     =  2 Re sum_{jk} W_jk u_j conj(v_k)
// for tangent vectors written as complex n-vectors in chart coordinates.
// The normalization makes [omega] = c1(L): total area d on CP^1/O(d).

Eigen::Matrix2cd omega_kernel(const Model& m, const Point& p);
Eigen::Matrix4d omega_matrix(const Model& m, const Point& p);   // real 2n x 2n, antisymmetric
Eigen::Matrix4d metric_matrix(const Model& m, const Point& p);  // real 2n x 2n, SPD

double omega_eval(const Model& m, const Point& p, const Eigen::Vector4d& u,
                  const Eigen::Vector4d& v);
double metric_eval(const Model& m, const Point& p, const Eigen::Vector4d& u,
                   const Eigen::Vector4d& v);
double metric_norm(const Model& m, const Point& p, const Eigen::Vector4d& u);

/// Coefficient of the Euclidean area element of omega (n = 1) resp. of the
/// volume element of omega^omega (n = 2) at p, in p's chart.
double symplectic_density(const Model& m, const Point& p);

/// Signed symplectic area of the disc bounded by a closed polyline on CP^1,
/// on the side selected by the loop orientation; the two sides sum to d.
/// Uses the explicit chart primitive eta = (d/2pi) |z|^2/(1+|z|^2) dtheta.
double enclosed_area(const Model& m, const std::vector<Point>& loop);

// Gauss-Legendre nodes/weights on [0,1]; computed once, deterministic.
const std::vector<std::pair<double, double>>& gauss_legendre_01(int order);

}  // namespace sbs
