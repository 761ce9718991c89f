#include "sbs/section.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace sbs {

namespace {

// binary-form resultant via the Sylvester determinant; zero leading
// coefficients (roots at infinity) are handled by construction
cplx binary_resultant(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  int m = static_cast<int>(a.size()) - 1;
  int n = static_cast<int>(b.size()) - 1;
  if (m <= 0 && n <= 0) return 1.0;
  int size = m + n;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(size, size);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= m; ++k) S(r, r + k) = a[k];
  for (int r = 0; r < m; ++r)
    for (int k = 0; k <= n; ++k) S(n + r, r + k) = b[k];
  return S.determinant();
}

}  // namespace

Section Section::make(const Model& m, std::vector<cplx> coeffs) {
  if (static_cast<int>(coeffs.size()) != m.coefficient_count())
    throw ConfigError("coefficient count does not match the model");
  bool any = std::any_of(coeffs.begin(), coeffs.end(), [](cplx c) { return c != cplx(0); });
  if (!any) throw ConfigError("section must have a nonzero coefficient");
  return Section{m, std::move(coeffs)};
}

Section Section::fermat(const Model& m) {
  std::vector<cplx> c(m.coefficient_count(), cplx(0));
  switch (m.kind) {
    case ModelKind::CP1:
      c.front() = 1;
      c.back() = 1;  // z0^d + z1^d
      break;
    case ModelKind::Quadric:
      c[0] = 1;
      c[3] = 1;  // x0 y0 + x1 y1
      break;
    case ModelKind::CP2:
      c[0] = c[3] = c[5] = 1;  // z0^2 + z1^2 + z2^2
      break;
  }
  return Section{m, std::move(c)};
}

Section Section::reducible(const Model& m) {
  std::vector<cplx> c(m.coefficient_count(), cplx(0));
  c[0] = 1;  // z0^d / x0 y0 / z0^2
  return Section{m, std::move(c)};
}

Section Section::antipodal(const Model& m) {
  if (m.kind != ModelKind::CP1 || m.degree != 2)
    throw ConfigError("the antipodal preset exists for CP1 with d = 2 only");
  return Section{m, {1, 0, 1}};  // z0^2 + z1^2, zeros at +-i
}

Section Section::random(const Model& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> c(m.coefficient_count());
  for (auto& v : c) {
    double re = g(rng), im = g(rng);
    v = cplx(re, im);
  }
  return Section{m, std::move(c)};
}

Section Section::scaled(cplx factor) const {
  if (factor == cplx(0)) throw ConfigError("scaling by zero");
  Section out = *this;
  for (auto& v : out.c) v *= factor;
  return out;
}

Section Section::normalized() const {
  double n2 = 0;
  for (auto v : c) n2 += std::norm(v);
  Section out = *this;
  double n = std::sqrt(n2);
  for (auto& v : out.c) v /= n;
  return out;
}

double Section::coeff_scale() const {
  double s = 0;
  for (auto v : c) s = std::max(s, std::abs(v));
  return s;
}

Eigen::Matrix2cd Section::alpha() const {
  if (model.kind != ModelKind::Quadric) throw ConfigError("alpha() is for quadric sections");
  Eigen::Matrix2cd a;
  a << c[0], c[1], c[2], c[3];
  return a;
}

Eigen::Matrix3cd Section::quad_form() const {
  if (model.kind != ModelKind::CP2) throw ConfigError("quad_form() is for CP2 sections");
  Eigen::Matrix3cd q;
  q << c[0], c[1] / 2.0, c[2] / 2.0,
       c[1] / 2.0, c[3], c[4] / 2.0,
       c[2] / 2.0, c[4] / 2.0, c[5];
  return q;
}

ChartPoly section_chart_eval(const Section& s, const Point& p) {
  ChartPoly out;
  out.df.setZero();
  out.d2f.setZero();
  switch (s.model.kind) {
    case ModelKind::CP1: {
      // chart 0: f(z) = sum c_k z^k; chart 1: f(w) = sum c_k w^(d-k)
      int d = s.model.degree;
      cplx z = p.affine[0];
      cplx f = 0, f1 = 0, f2 = 0;
      // Horner with the chart-appropriate coefficient order
      for (int i = d; i >= 0; --i) {
        int k = (p.chart == 0) ? i : d - i;
        f2 = f2 * z + f1 * 2.0;
        f1 = f1 * z + f;
        f = f * z + s.c[k];
      }
      out.f = f;
      out.df[0] = f1;
      out.d2f(0, 0) = f2;
      break;
    }
    case ModelKind::Quadric: {
      // x = (1,z) or (z,1); y = (1,w) or (w,1); f bilinear in (z,w)
      int cx = p.chart / 2, cy = p.chart % 2;
      cplx z = p.affine[0], w = p.affine[1];
      auto a = [&](int i, int j) { return s.c[2 * i + j]; };
      // beta[u][v]: coefficient of z^u w^v
      cplx b00 = a(cx, cy), b10 = a(1 - cx, cy), b01 = a(cx, 1 - cy), b11 = a(1 - cx, 1 - cy);
      out.f = b00 + b10 * z + b01 * w + b11 * z * w;
      out.df[0] = b10 + b11 * w;
      out.df[1] = b01 + b11 * z;
      out.d2f(0, 1) = out.d2f(1, 0) = b11;
      break;
    }
    case ModelKind::CP2: {
      int one;
      std::array<int, 2> slots;
      // homogeneous coordinate values in chart order
      Eigen::Vector3cd zv;
      one = p.chart;
      int k = 0;
      for (int i = 0; i < 3; ++i) {
        if (i == one) {
          zv[i] = 1.0;
        } else {
          slots[k] = i;
          zv[i] = p.affine[k];
          ++k;
        }
      }
      Eigen::Matrix3cd Q = s.quad_form();
      out.f = zv.transpose() * Q * zv;
      Eigen::Vector3cd grad_h = 2.0 * Q * zv;  // d/dz_i of z^T Q z
      for (int j = 0; j < 2; ++j) out.df[j] = grad_h[slots[j]];
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) out.d2f(j, l) = 2.0 * Q(slots[j], slots[l]);
      break;
    }
  }
  return out;
}

double norm_sq(const Section& s, const Point& p) {
  ChartPoly cp = section_chart_eval(s, p);
  double num = std::norm(cp.f);
  switch (s.model.kind) {
    case ModelKind::CP1: {
      double sig = 1.0 + std::norm(p.affine[0]);
      return num / std::pow(sig, s.model.degree);
    }
    case ModelKind::Quadric: {
      double sx = 1.0 + std::norm(p.affine[0]);
      double sy = 1.0 + std::norm(p.affine[1]);
      return num / (sx * sy);
    }
    case ModelKind::CP2: {
      double sig = 1.0 + std::norm(p.affine[0]) + std::norm(p.affine[1]);
      return num / (sig * sig);
    }
  }
  return 0;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs, int* degree_drop) {
  double scale = 0;
  for (auto c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0) throw ConfigError("zero polynomial");
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) < 1e-12 * scale) --deg;
  if (degree_drop) *degree_drop = static_cast<int>(coeffs.size()) - 1 - deg;
  std::vector<cplx> roots;
  if (deg == 0) return roots;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) C(i, deg - 1) = -coeffs[i] / coeffs[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()[i]);
  return roots;
}

std::vector<DivisorZero> section_zeros_cp1(const Section& s, double tol) {
  if (s.model.kind != ModelKind::CP1) throw ConfigError("section_zeros_cp1 needs a CP1 section");
  int drop = 0;
  std::vector<cplx> roots = polynomial_roots(s.c, &drop);
  std::vector<DivisorZero> zeros;
  for (cplx r : roots) {
    Eigen::Vector3cd h;
    h << 1.0, r, 0.0;
    Point p = point_from_homogeneous(s.model, h);
    bool found = false;
    for (auto& z : zeros) {
      if (chordal(s.model, z.location, p) <= tol) {
        z.multiplicity += 1;
        found = true;
        break;
      }
    }
    if (!found) zeros.push_back({p, 1});
  }
  if (drop > 0) {
    Eigen::Vector3cd h;
    h << 0.0, 1.0, 0.0;
    zeros.push_back({point_from_homogeneous(s.model, h), drop});
  }
  return zeros;
}

cplx cp1_discriminant(const Section& s) {
  if (s.model.kind != ModelKind::CP1) throw ConfigError("cp1_discriminant needs a CP1 section");
  int d = s.model.degree;
  if (d == 1) return 1.0;
  std::vector<cplx> dz0(d), dz1(d);
  for (int k = 0; k < d; ++k) dz0[k] = double(d - k) * s.c[k];
  for (int k = 0; k < d; ++k) dz1[k] = double(k + 1) * s.c[k + 1];
  return binary_resultant(dz0, dz1) / std::pow(double(d), d);
}

}  // namespace sbs
