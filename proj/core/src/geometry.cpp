#include "sbs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace sbs {

namespace {

constexpr double kPi = 3.14159265358979323846;

// chart slot layout: which homogeneous slot holds 1 and which hold the
// affine coordinates (ascending).  CP1 chart c: slot c = 1, other = affine.
// CP2 chart c: slot c = 1, remaining slots ascending = affine[0], affine[1].
void cp_slots(int dim, int chart, int& one_slot, std::array<int, 2>& aff_slots) {
  one_slot = chart;
  int k = 0;
  for (int i = 0; i <= dim; ++i)
    if (i != chart) aff_slots[k++] = i;
}

void canonical_phase(Eigen::VectorXcd& v) {
  int imax = 0;
  double best = -1;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (best > 0) v *= std::conj(v[imax]) / std::abs(v[imax]);
}

Eigen::Vector2cd unit2(Eigen::Vector2cd v) {
  double n = v.norm();
  if (n == 0) throw GeometryError("zero homogeneous vector");
  Eigen::VectorXcd w = v / n;
  canonical_phase(w);
  return w;
}

Eigen::Vector3cd unit3(Eigen::Vector3cd v) {
  double n = v.norm();
  if (n == 0) throw GeometryError("zero homogeneous vector");
  Eigen::VectorXcd w = v / n;
  canonical_phase(w);
  return w;
}

int best_chart_cp(const Eigen::VectorXcd& h) {
  int imax = 0;
  double best = -1;
  for (int i = 0; i < h.size(); ++i)
    if (std::abs(h[i]) > best) {
      best = std::abs(h[i]);
      imax = i;
    }
  return imax;
}

}  // namespace

Model Model::cp1(int d) {
  if (d < 1) throw ConfigError("CP1 degree must be >= 1");
  return Model{ModelKind::CP1, d};
}
Model Model::quadric() { return Model{ModelKind::Quadric, 1}; }
Model Model::cp2() { return Model{ModelKind::CP2, 2}; }

int Model::chart_count() const {
  switch (kind) {
    case ModelKind::CP1: return 2;
    case ModelKind::Quadric: return 4;
    case ModelKind::CP2: return 3;
  }
  return 0;
}

int Model::coefficient_count() const {
  switch (kind) {
    case ModelKind::CP1: return degree + 1;
    case ModelKind::Quadric: return 4;
    case ModelKind::CP2: return 6;
  }
  return 0;
}

double Model::total_mass() const {
  switch (kind) {
    case ModelKind::CP1: return degree;
    case ModelKind::Quadric: return 2;  // (h1+h2)^2 on CP1 x CP1
    case ModelKind::CP2: return 4;      // (2h)^2
  }
  return 0;
}

std::string Model::name() const {
  switch (kind) {
    case ModelKind::CP1: return "cp1";
    case ModelKind::Quadric: return "quadric";
    case ModelKind::CP2: return "cp2";
  }
  return "?";
}

Model model_from_name(const std::string& name, int degree) {
  if (name == "cp1") return Model::cp1(degree);
  if (name == "quadric") return Model::quadric();
  if (name == "cp2") return Model::cp2();
  throw ConfigError("unknown model kind: " + name);
}

Point point_from_affine(const Model& m, int chart, const std::array<cplx, 2>& affine) {
  if (chart < 0 || chart >= m.chart_count()) throw ChartError("chart index out of range");
  Point p;
  p.kind = m.kind;
  p.chart = chart;
  p.affine = affine;
  switch (m.kind) {
    case ModelKind::CP1: {
      Eigen::Vector2cd h;
      h[chart] = 1.0;
      h[1 - chart] = affine[0];
      Eigen::Vector2cd u = unit2(h);
      p.h.setZero();
      p.h.head<2>() = u;
      break;
    }
    case ModelKind::CP2: {
      int one;
      std::array<int, 2> slots;
      cp_slots(2, chart, one, slots);
      Eigen::Vector3cd h = Eigen::Vector3cd::Zero();
      h[one] = 1.0;
      h[slots[0]] = affine[0];
      h[slots[1]] = affine[1];
      p.h = unit3(h);
      break;
    }
    case ModelKind::Quadric: {
      int cx = chart / 2, cy = chart % 2;
      Eigen::Vector2cd hx, hyv;
      hx[cx] = 1.0;
      hx[1 - cx] = affine[0];
      hyv[cy] = 1.0;
      hyv[1 - cy] = affine[1];
      p.h.setZero();
      p.h.head<2>() = unit2(hx);
      p.hy = unit2(hyv);
      break;
    }
  }
  return p;
}

Point point_from_homogeneous(const Model& m, const Eigen::Vector3cd& h, const Eigen::Vector2cd& hy) {
  Point p;
  p.kind = m.kind;
  switch (m.kind) {
    case ModelKind::CP1: {
      Eigen::Vector2cd u = unit2(h.head<2>());
      int c = best_chart_cp(u);
      p.chart = c;
      p.h.setZero();
      p.h.head<2>() = u;
      p.affine = {u[1 - c] / u[c], cplx{}};
      break;
    }
    case ModelKind::CP2: {
      Eigen::Vector3cd u = unit3(h);
      int c = best_chart_cp(u);
      int one;
      std::array<int, 2> slots;
      cp_slots(2, c, one, slots);
      p.chart = c;
      p.h = u;
      p.affine = {u[slots[0]] / u[c], u[slots[1]] / u[c]};
      break;
    }
    case ModelKind::Quadric: {
      Eigen::Vector2cd ux = unit2(h.head<2>());
      Eigen::Vector2cd uy = unit2(hy);
      int cx = best_chart_cp(ux), cy = best_chart_cp(uy);
      p.chart = 2 * cx + cy;
      p.h.setZero();
      p.h.head<2>() = ux;
      p.hy = uy;
      p.affine = {ux[1 - cx] / ux[cx], uy[1 - cy] / uy[cy]};
      break;
    }
  }
  return p;
}

Point transition(const Model& m, const Point& p, int target_chart) {
  if (target_chart < 0 || target_chart >= m.chart_count())
    throw ChartError("chart index out of range");
  if (target_chart == p.chart) return p;
  Point q = p;
  q.chart = target_chart;
  constexpr double tiny = 1e-14;
  switch (m.kind) {
    case ModelKind::CP1: {
      if (std::abs(p.h[target_chart]) < tiny)
        throw ChartError("target chart undefined at this point");
      q.affine = {p.h[1 - target_chart] / p.h[target_chart], cplx{}};
      break;
    }
    case ModelKind::CP2: {
      if (std::abs(p.h[target_chart]) < tiny)
        throw ChartError("target chart undefined at this point");
      int one;
      std::array<int, 2> slots;
      cp_slots(2, target_chart, one, slots);
      q.affine = {p.h[slots[0]] / p.h[target_chart], p.h[slots[1]] / p.h[target_chart]};
      break;
    }
    case ModelKind::Quadric: {
      int cx = target_chart / 2, cy = target_chart % 2;
      Eigen::Vector2cd ux = p.h.head<2>();
      if (std::abs(ux[cx]) < tiny || std::abs(p.hy[cy]) < tiny)
        throw ChartError("target chart undefined at this point");
      q.affine = {ux[1 - cx] / ux[cx], p.hy[1 - cy] / p.hy[cy]};
      break;
    }
  }
  return q;
}

int preferred_chart(const Model& m, const Point& p) {
  switch (m.kind) {
    case ModelKind::CP1: return best_chart_cp(p.h.head<2>());
    case ModelKind::CP2: return best_chart_cp(p.h);
    case ModelKind::Quadric:
      return 2 * best_chart_cp(p.h.head<2>()) + best_chart_cp(p.hy);
  }
  return 0;
}

Point rechart(const Model& m, const Point& p) { return transition(m, p, preferred_chart(m, p)); }

double chordal(const Model& m, const Point& a, const Point& b) {
  auto dist = [](const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
    double s = std::abs(u.dot(v));  // Eigen dot conjugates the first argument
    return std::sqrt(std::max(0.0, 1.0 - s * s));
  };
  switch (m.kind) {
    case ModelKind::CP1: return dist(a.h.head<2>(), b.h.head<2>());
    case ModelKind::CP2: return dist(a.h, b.h);
    case ModelKind::Quadric:
      return std::max(dist(a.h.head<2>(), b.h.head<2>()), dist(a.hy, b.hy));
  }
  return 0;
}

bool same_point(const Model& m, const Point& a, const Point& b, double tol) {
  return chordal(m, a, b) <= tol;
}

Eigen::Matrix2cd transition_jacobian(const Model& m, const Point& p, int target_chart) {
  Eigen::Matrix2cd J = Eigen::Matrix2cd::Identity();
  if (target_chart == p.chart) return J;
  switch (m.kind) {
    case ModelKind::CP1: {
      // w = 1/z, dw/dz = -1/z^2
      cplx z = p.affine[0];
      if (std::abs(z) < 1e-14) throw ChartError("transition Jacobian singular");
      J(0, 0) = -1.0 / (z * z);
      break;
    }
    case ModelKind::CP2: {
      // source homogeneous as affine functions of (u1,u2): slot one_s = 1,
      // slot aff_s[k] = u_k.  target affine_m = H[o_m] / H[target].
      int one_s;
      std::array<int, 2> aff_s;
      cp_slots(2, p.chart, one_s, aff_s);
      int one_t;
      std::array<int, 2> aff_t;
      cp_slots(2, target_chart, one_t, aff_t);
      auto H = [&](int slot) -> cplx {
        if (slot == one_s) return 1.0;
        return slot == aff_s[0] ? p.affine[0] : p.affine[1];
      };
      auto dH = [&](int slot, int k) -> cplx {
        return (slot != one_s && slot == aff_s[k]) ? 1.0 : 0.0;
      };
      cplx t = H(target_chart);
      if (std::abs(t) < 1e-14) throw ChartError("transition Jacobian singular");
      for (int mm = 0; mm < 2; ++mm)
        for (int k = 0; k < 2; ++k)
          J(mm, k) = (dH(aff_t[mm], k) * t - H(aff_t[mm]) * dH(target_chart, k)) / (t * t);
      break;
    }
    case ModelKind::Quadric: {
      int cx_s = p.chart / 2, cy_s = p.chart % 2;
      int cx_t = target_chart / 2, cy_t = target_chart % 2;
      J.setZero();
      if (cx_t == cx_s) {
        J(0, 0) = 1.0;
      } else {
        cplx z = p.affine[0];
        if (std::abs(z) < 1e-14) throw ChartError("transition Jacobian singular");
        J(0, 0) = -1.0 / (z * z);
      }
      if (cy_t == cy_s) {
        J(1, 1) = 1.0;
      } else {
        cplx w = p.affine[1];
        if (std::abs(w) < 1e-14) throw ChartError("transition Jacobian singular");
        J(1, 1) = -1.0 / (w * w);
      }
      break;
    }
  }
  return J;
}

Tangent transport(const Model& m, const Tangent& t, int target_chart) {
  Eigen::Matrix2cd J = transition_jacobian(m, t.base, target_chart);
  int n = m.complex_dim();
  Eigen::Vector2cd vc = Eigen::Vector2cd::Zero();
  for (int j = 0; j < n; ++j) vc[j] = cplx(t.v[2 * j], t.v[2 * j + 1]);
  Eigen::Vector2cd wc = J * vc;
  Tangent out;
  out.base = transition(m, t.base, target_chart);
  out.v.setZero();
  for (int j = 0; j < n; ++j) {
    out.v[2 * j] = wc[j].real();
    out.v[2 * j + 1] = wc[j].imag();
  }
  return out;
}

Eigen::Matrix2cd omega_kernel(const Model& m, const Point& p) {
  Eigen::Matrix2cd W = Eigen::Matrix2cd::Zero();
  switch (m.kind) {
    case ModelKind::CP1: {
      double s = 1.0 + std::norm(p.affine[0]);
      W(0, 0) = (m.degree / (2.0 * kPi)) / (s * s);
      break;
    }
    case ModelKind::Quadric: {
      double sx = 1.0 + std::norm(p.affine[0]);
      double sy = 1.0 + std::norm(p.affine[1]);
      W(0, 0) = (1.0 / (2.0 * kPi)) / (sx * sx);
      W(1, 1) = (1.0 / (2.0 * kPi)) / (sy * sy);
      break;
    }
    case ModelKind::CP2: {
      double s = 1.0 + std::norm(p.affine[0]) + std::norm(p.affine[1]);
      double pref = m.degree / (2.0 * kPi);
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          cplx v = (j == k ? cplx(s) : cplx(0)) - std::conj(p.affine[j]) * p.affine[k];
          W(j, k) = pref * v / (s * s);
        }
      break;
    }
  }
  return W;
}

Eigen::Matrix4d omega_matrix(const Model& m, const Point& p) {
  Eigen::Matrix2cd W = omega_kernel(m, p);
  int n = m.complex_dim();
  Eigen::Matrix4d O = Eigen::Matrix4d::Zero();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double re = W(j, k).real(), im = W(j, k).imag();
      O(2 * j, 2 * k) = -2 * im;
      O(2 * j, 2 * k + 1) = 2 * re;
      O(2 * j + 1, 2 * k) = -2 * re;
      O(2 * j + 1, 2 * k + 1) = -2 * im;
    }
  return O;
}

Eigen::Matrix4d metric_matrix(const Model& m, const Point& p) {
  Eigen::Matrix2cd W = omega_kernel(m, p);
  int n = m.complex_dim();
  Eigen::Matrix4d G = Eigen::Matrix4d::Zero();
  if (n == 1) G(2, 2) = G(3, 3) = 1;  // keep SPD on the unused block
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double re = W(j, k).real(), im = W(j, k).imag();
      G(2 * j, 2 * k) = 2 * re;
      G(2 * j, 2 * k + 1) = 2 * im;
      G(2 * j + 1, 2 * k) = -2 * im;
      G(2 * j + 1, 2 * k + 1) = 2 * re;
    }
  return G;
}

double omega_eval(const Model& m, const Point& p, const Eigen::Vector4d& u,
                  const Eigen::Vector4d& v) {
  return u.dot(omega_matrix(m, p) * v);
}

double metric_eval(const Model& m, const Point& p, const Eigen::Vector4d& u,
                   const Eigen::Vector4d& v) {
  Eigen::Matrix4d G = metric_matrix(m, p);
  if (m.complex_dim() == 1) {
    return u.head<2>().dot(G.topLeftCorner<2, 2>() * v.head<2>());
  }
  return u.dot(G * v);
}

double metric_norm(const Model& m, const Point& p, const Eigen::Vector4d& u) {
  return std::sqrt(std::max(0.0, metric_eval(m, p, u, u)));
}

double symplectic_density(const Model& m, const Point& p) {
  Eigen::Matrix4d O = omega_matrix(m, p);
  if (m.complex_dim() == 1) return O(0, 1);
  // omega^2 (e1,e2,e3,e4) = 2 [o12 o34 - o13 o24 + o14 o23]
  return 2.0 * (O(0, 1) * O(2, 3) - O(0, 2) * O(1, 3) + O(0, 3) * O(1, 2));
}

const std::vector<std::pair<double, double>>& gauss_legendre_01(int order) {
  static std::mutex mu;
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  // nodes of P_n on [-1,1] by Newton from Chebyshev initial guesses
  std::vector<std::pair<double, double>> nw(order);
  int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1 - x * x) * pp * pp);
    nw[i] = {0.5 * (1 - x), 0.5 * w};          // map to [0,1]
    nw[n - 1 - i] = {0.5 * (1 + x), 0.5 * w};
  }
  auto [pos, ok] = cache.emplace(order, std::move(nw));
  return pos->second;
}

double enclosed_area(const Model& m, const std::vector<Point>& loop) {
  if (m.kind != ModelKind::CP1) throw GeometryError("enclosed_area is defined on CP1 only");
  if (loop.size() < 3) throw GeometryError("loop needs at least 3 vertices");
  if (chordal(m, loop.front(), loop.back()) > 1e-8)
    throw GeometryError("polyline is not closed");

  // chart-0 coordinates for every vertex; the primitive eta is singular only
  // at [0:1], and the result is reduced mod d, which absorbs loops around it
  std::vector<cplx> z(loop.size());
  for (size_t i = 0; i < loop.size(); ++i) {
    const Point& p = loop[i];
    if (std::abs(p.h[0]) < 1e-13)
      throw GeometryError("loop passes through the chart pole [0:1]");
    z[i] = p.h[1] / p.h[0];
  }

  const auto& gl = gauss_legendre_01(16);
  double d = m.degree;
  double integral = 0;
  for (size_t i = 0; i + 1 < z.size(); ++i) {
    cplx a = z[i], b = z[i + 1];
    cplx dz = b - a;
    if (std::abs(dz) == 0) continue;
    double seg = 0;
    for (auto [t, w] : gl) {
      cplx zt = a + t * dz;
      double s = 1.0 + std::norm(zt);
      // eta(z') = (d/2pi) Im(conj(z) z') / (1+|z|^2)
      seg += w * (d / (2.0 * kPi)) * std::imag(std::conj(zt) * dz) / s;
    }
    integral += seg;
  }
  double area = std::fmod(integral, d);
  if (area < 0) area += d;
  return area;
}

}  // namespace sbs
