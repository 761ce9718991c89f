#include "sbs/potential.hpp"

#include <cmath>

namespace sbs {

namespace {

// norm-potential part of phi: sum over factors of (d_i/2) ln(1 + |z|^2),
// with its holomorphic derivative data
struct NormPart {
  double val = 0;
  Eigen::Vector2cd d;
  Eigen::Matrix2cd A, B;
};

NormPart norm_part(const Model& m, const Point& p) {
  NormPart out;
  out.d.setZero();
  out.A.setZero();
  out.B.setZero();
  switch (m.kind) {
    case ModelKind::CP1: {
      double half_d = 0.5 * m.degree;
      cplx z = p.affine[0];
      double sig = 1.0 + std::norm(z);
      out.val = half_d * std::log(sig);
      out.d[0] = half_d * std::conj(z) / sig;
      out.A(0, 0) = -half_d * std::conj(z) * std::conj(z) / (sig * sig);
      out.B(0, 0) = half_d / (sig * sig);
      break;
    }
    case ModelKind::Quadric: {
      for (int j = 0; j < 2; ++j) {
        cplx z = p.affine[j];
        double sig = 1.0 + std::norm(z);
        out.val += 0.5 * std::log(sig);
        out.d[j] = 0.5 * std::conj(z) / sig;
        out.A(j, j) = -0.5 * std::conj(z) * std::conj(z) / (sig * sig);
        out.B(j, j) = 0.5 / (sig * sig);
      }
      break;
    }
    case ModelKind::CP2: {
      double half_d = 0.5 * m.degree;
      double sig = 1.0 + std::norm(p.affine[0]) + std::norm(p.affine[1]);
      out.val = half_d * std::log(sig);
      for (int j = 0; j < 2; ++j) out.d[j] = half_d * std::conj(p.affine[j]) / sig;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          out.A(j, k) = -half_d * std::conj(p.affine[j]) * std::conj(p.affine[k]) / (sig * sig);
          cplx delta = (j == k) ? cplx(sig) : cplx(0);
          out.B(j, k) = half_d * (delta - std::conj(p.affine[j]) * p.affine[k]) / (sig * sig);
        }
      break;
    }
  }
  return out;
}

}  // namespace

PotentialSample sample_potential(const Section& s, const Point& p) {
  PotentialSample out;
  out.p = p;
  out.nsq = norm_sq(s, p);
  double scale = s.coeff_scale();
  if (out.nsq < kDivisorGuardRel * scale * scale) throw DivisorError(out.nsq);

  ChartPoly cp = section_chart_eval(s, p);
  NormPart nm = norm_part(s.model, p);
  int n = s.model.complex_dim();

  out.phi = -0.5 * std::log(out.nsq);
  out.dphi.setZero();
  out.A.setZero();
  out.B = nm.B;  // the section part is holomorphic: no mixed derivative
  for (int j = 0; j < n; ++j) {
    out.dphi[j] = -0.5 * cp.df[j] / cp.f + nm.d[j];
    for (int k = 0; k < n; ++k)
      out.A(j, k) = -0.5 * (cp.d2f(j, k) / cp.f - cp.df[j] * cp.df[k] / (cp.f * cp.f)) + nm.A(j, k);
  }
  return out;
}

double phi(const Section& s, const Point& p) { return sample_potential(s, p).phi; }

Eigen::Vector4d chart_grad(const Model& m, const PotentialSample& ps) {
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  for (int j = 0; j < m.complex_dim(); ++j) {
    g[2 * j] = 2 * ps.dphi[j].real();
    g[2 * j + 1] = -2 * ps.dphi[j].imag();
  }
  return g;
}

Eigen::Vector4d chart_grad(const Section& s, const Point& p) {
  return chart_grad(s.model, sample_potential(s, p));
}

Eigen::Vector4d grad_phi(const Model& m, const PotentialSample& ps) {
  int n = m.complex_dim();
  Eigen::Matrix2cd W = omega_kernel(m, ps.p);
  Eigen::Vector2cd gamma;
  if (n == 1) {
    gamma[0] = std::conj(ps.dphi[0] / W(0, 0));
    gamma[1] = 0;
  } else {
    gamma = W.partialPivLu().solve(ps.dphi).conjugate();
  }
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  for (int j = 0; j < n; ++j) {
    g[2 * j] = gamma[j].real();
    g[2 * j + 1] = gamma[j].imag();
  }
  return g;
}

Eigen::Vector4d grad_phi(const Section& s, const Point& p) {
  return grad_phi(s.model, sample_potential(s, p));
}

double grad_phi_norm(const Section& s, const Point& p) {
  return metric_norm(s.model, p, grad_phi(s, p));
}

Eigen::Matrix4d hessian_phi(const Model& m, const PotentialSample& ps) {
  int n = m.complex_dim();
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double reA = ps.A(j, k).real(), imA = ps.A(j, k).imag();
      double reB = ps.B(j, k).real(), imB = ps.B(j, k).imag();
      H(2 * j, 2 * k) = 2 * (reA + reB);
      H(2 * j, 2 * k + 1) = -2 * imA + 2 * imB;
      H(2 * j + 1, 2 * k) = -2 * imA - 2 * imB;
      H(2 * j + 1, 2 * k + 1) = 2 * (reB - reA);
    }
  return H;
}

Eigen::Matrix4d hessian_phi(const Section& s, const Point& p) {
  return hessian_phi(s.model, sample_potential(s, p));
}

Eigen::Vector4d im_rho(const Model& m, const PotentialSample& ps) {
  // Im rho = (d ln|s|) o I: components (2 Im dphi_j, 2 Re dphi_j)
  Eigen::Vector4d r = Eigen::Vector4d::Zero();
  for (int j = 0; j < m.complex_dim(); ++j) {
    r[2 * j] = 2 * ps.dphi[j].imag();
    r[2 * j + 1] = 2 * ps.dphi[j].real();
  }
  return r;
}

Eigen::Vector4d im_rho(const Section& s, const Point& p) {
  return im_rho(s.model, sample_potential(s, p));
}

Eigen::Vector4d re_rho(const Model& m, const PotentialSample& ps) {
  // Re rho = d ln|s| = -d phi
  Eigen::Vector4d r = Eigen::Vector4d::Zero();
  for (int j = 0; j < m.complex_dim(); ++j) {
    r[2 * j] = -2 * ps.dphi[j].real();
    r[2 * j + 1] = 2 * ps.dphi[j].imag();
  }
  return r;
}

Eigen::Vector4d re_rho(const Section& s, const Point& p) {
  return re_rho(s.model, sample_potential(s, p));
}

namespace {

// quadrature of a chart covector field along a polyline; each segment is
// taken straight in the chart of its first endpoint
double polyline_integral(const Section& s, const std::vector<Point>& pts, bool imaginary_part,
                         double tube) {
  const auto& gl = gauss_legendre_01(16);
  const Model& m = s.model;
  int n = m.complex_dim();
  double total = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    Point a = pts[i];
    Point b = transition(m, pts[i + 1], a.chart);
    Eigen::Vector4d delta = Eigen::Vector4d::Zero();
    for (int j = 0; j < n; ++j) {
      cplx d = b.affine[j] - a.affine[j];
      delta[2 * j] = d.real();
      delta[2 * j + 1] = d.imag();
    }
    if (delta.norm() == 0) continue;
    double seg = 0;
    for (auto [t, w] : gl) {
      std::array<cplx, 2> aff{};
      for (int j = 0; j < n; ++j) aff[j] = a.affine[j] + t * (b.affine[j] - a.affine[j]);
      Point q = point_from_affine(m, a.chart, aff);
      double nsq = norm_sq(s, q);
      if (nsq < tube) throw StabilityError(nsq);
      PotentialSample ps = sample_potential(s, q);
      Eigen::Vector4d cov = imaginary_part ? im_rho(m, ps) : re_rho(m, ps);
      seg += w * cov.dot(delta);
    }
    total += seg;
  }
  return total;
}

}  // namespace

double loop_integral_im_rho(const Section& s, const std::vector<Point>& loop) {
  if (loop.size() < 3) throw GeometryError("loop needs at least 3 vertices");
  if (chordal(s.model, loop.front(), loop.back()) > 1e-8)
    throw GeometryError("polyline is not closed");
  double scale = s.coeff_scale();
  return polyline_integral(s, loop, true, 1e-12 * scale * scale);
}

double path_integral_re_rho(const Section& s, const std::vector<Point>& path) {
  if (path.size() < 2) throw GeometryError("path needs at least 2 vertices");
  double scale = s.coeff_scale();
  return polyline_integral(s, path, false, 1e-12 * scale * scale);
}

}  // namespace sbs
