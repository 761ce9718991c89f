#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbs/potential.hpp"

namespace sbs {

// degeneracy: min |eigenvalue| <= kDegeneracyRel * max |eigenvalue|
inline constexpr double kDegeneracyRel = 1e-6;
// accepted critical points re-verify |grad phi| below this
inline constexpr double kCriticalGradTol = 1e-10;
// no two reported points within this chordal distance
inline constexpr double kDedupTol = 1e-6;

/// A located zero of grad phi_s with its Morse data.  Eigenvalues and
/// eigenvectors come from the pencil (Hess phi, g): the rates and directions
/// of the gradient flow linearization, whose inertia equals the Hessian's.
struct CriticalPoint {
  Point location;
  double phi_value = 0;
  double grad_norm = 0;
  Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();  // ascending, 2n used
  std::vector<Eigen::Vector4d> neg_eigenvectors;          // g-orthonormal basis of the negative subspace
  int morse_index = 0;  // -1 when degenerate
  bool degenerate = false;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;     // isolated, deduplicated, sorted by phi
  bool complete = false;                 // CP1: Poincare-Hopf audit passed
  bool audit_available = false;          // audit only runs on CP1
  int poincare_hopf_sum = 0;             // sum of indices + one source per distinct zero
  bool degenerate_suspected = false;     // converged points with rank-deficient Hessians seen
  std::vector<Point> degenerate_hits;    // a few of them, for continuation seeds
  std::vector<std::string> warnings;
};

struct SearchOptions {
  int grid_per_axis_cp1 = 64;   // per design: 64x64 over |z| <= R per chart
  int grid_per_axis_4d = 8;     // per complex coordinate on quadric/CP2
  int max_newton_iters = 50;
  double newton_tol = 1e-12;    // |chart grad| convergence
  double seed_min_norm_sq = 1e-6;
  int max_kept_points = 4096;
};

CriticalSearch find_critical_points(const Section& s, const SearchOptions& opt = {});

/// Morse classification at a located critical point (pre: |grad| <= 1e-8).
CriticalPoint classify(const Section& s, const Point& location);

/// Positive-dimensional critical sets: continuation along Hessian null
/// directions from degenerate Newton hits.
struct DegeneracyReport {
  bool present = false;
  int dimension = 0;
  std::vector<Point> samples;  // ordered along the curve when dimension == 1
  bool closed_loop = false;
  double max_grad_norm = 0;    // over samples
  std::vector<std::string> notes;
};
DegeneracyReport detect_degenerate(const Section& s);

enum class SectionClass { Generic, MultipleZero, Antipodal, Reducible, DegenerateCritical };
std::string to_string(SectionClass c);

/// Algebraic genericity tests (discriminant, det alpha, antipodality for
/// d = 2), combined with the numerical degeneracy probe.
SectionClass section_is_generic(const Section& s);

/// |discriminant| after unit coefficient normalization (scan filter value).
double discriminant_abs(const Section& s);

// --- quadric Lagrange system -------------------------------------------------

/// One solution of dF_{lambda,mu}/dz = 0 on the product of unit spheres,
/// phase-normalized (first nonvanishing component of x and y real positive).
struct LagrangeSolution {
  Eigen::Vector2cd x, y;
  double lambda = 0, mu = 0;
  double residual = 0;  // max |dF/dz| over the eight real equations
};

struct QuadricLagrange {
  std::vector<LagrangeSolution> solutions;  // isolated, off-divisor
  std::vector<CriticalPoint> criticals;     // mapped to Q \ D_s and classified
  bool degenerate_family = false;           // sigma_1 == sigma_2: critical 2-sphere
  std::vector<LagrangeSolution> family_samples;
  std::vector<std::string> warnings;
};

/// Constrained critical points of |s|^2 via the Lagrange system for
/// F = |sum alpha_ij x_i y_j|^2 - lambda(|x|^2-1) - mu(|y|^2-1).
/// Off the divisor the system forces alpha y = s conj(x),
/// alpha^T x = s conj(y), so solutions are singular pairs of alpha.
QuadricLagrange solve_quadric_lagrange(const Eigen::Matrix2cd& alpha, int family_samples = 50);

/// Poincare-Hopf index of grad phi at a nondegenerate critical point.
int ph_index(const CriticalPoint& cp);

}  // namespace sbs
