#pragma once

#include <vector>

#include "sbs/section.hpp"

namespace sbs {

/// One evaluation of the potential phi_s = -ln|s| at a point off the divisor,
/// with the complex derivative data everything else is assembled from:
///   dphi[j] = d phi / d z_j,
///   A[j][k] = d^2 phi / d z_j d z_k       (symmetric),
///   B[j][k] = d^2 phi / d z_j d conj(z_k) (hermitian).
struct PotentialSample {
  Point p;
  double nsq = 0;
  double phi = 0;
  Eigen::Vector2cd dphi = Eigen::Vector2cd::Zero();
  Eigen::Matrix2cd A = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd B = Eigen::Matrix2cd::Zero();
};

/// Throws DivisorError inside the guard tube.
PotentialSample sample_potential(const Section& s, const Point& p);

double phi(const Section& s, const Point& p);

/// Fubini-Study gradient of phi_s, components in p's chart (interleaved).
Eigen::Vector4d grad_phi(const Section& s, const Point& p);
double grad_phi_norm(const Section& s, const Point& p);  // g-norm

/// Euclidean chart gradient (2 Re dphi, -2 Im dphi); same zero set as grad_phi.
Eigen::Vector4d chart_grad(const Section& s, const Point& p);

/// Symmetric 2n x 2n matrix of chart second derivatives of phi_s.
Eigen::Matrix4d hessian_phi(const Section& s, const Point& p);

/// Components of Im rho_s = (d ln|s|) o I as a chart covector.
Eigen::Vector4d im_rho(const Section& s, const Point& p);
/// Components of Re rho_s = d ln|s|.
Eigen::Vector4d re_rho(const Section& s, const Point& p);

// assembled from an existing sample (no re-evaluation)
Eigen::Vector4d chart_grad(const Model& m, const PotentialSample& ps);
Eigen::Vector4d grad_phi(const Model& m, const PotentialSample& ps);
Eigen::Matrix4d hessian_phi(const Model& m, const PotentialSample& ps);
Eigen::Vector4d im_rho(const Model& m, const PotentialSample& ps);
Eigen::Vector4d re_rho(const Model& m, const PotentialSample& ps);

/// Composite Gauss-Legendre integral of Im rho_s along a closed polyline
/// avoiding the divisor tube.  For a contractible loop enclosing total zero
/// multiplicity k and symplectic area A this equals 2 pi (A - k).
double loop_integral_im_rho(const Section& s, const std::vector<Point>& loop);

/// Same quadrature for Re rho_s along an open polyline (exactness checks).
double path_integral_re_rho(const Section& s, const std::vector<Point>& path);

}  // namespace sbs
