#include "sbs/critical.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace sbs {

namespace {

struct NewtonOutcome {
  bool converged = false;
  bool hit_divisor = false;
  Point p;
};

Eigen::MatrixXd top_block(const Eigen::Matrix4d& M, int dim) { return M.topLeftCorner(dim, dim); }

Point move_point(const Model& m, const Point& p, const Eigen::VectorXd& delta) {
  std::array<cplx, 2> aff = p.affine;
  for (int j = 0; j < m.complex_dim(); ++j)
    aff[j] += cplx(delta[2 * j], delta[2 * j + 1]);
  Point q = point_from_affine(m, p.chart, aff);
  double maxa = 0;
  for (int j = 0; j < m.complex_dim(); ++j) maxa = std::max(maxa, std::abs(aff[j]));
  if (maxa > kChartRadius) q = rechart(m, q);
  return q;
}

NewtonOutcome newton_from(const Section& s, Point seed, const SearchOptions& opt) {
  NewtonOutcome out;
  Point p = seed;
  int dim = s.model.real_dim();
  double scale = s.coeff_scale();
  double guard = kDivisorGuardRel * scale * scale;
  for (int iter = 0; iter < opt.max_newton_iters; ++iter) {
    if (norm_sq(s, p) < guard * 10) {
      out.hit_divisor = true;
      return out;
    }
    PotentialSample ps = sample_potential(s, p);
    Eigen::Vector4d g4 = chart_grad(s.model, ps);
    Eigen::VectorXd g = g4.head(dim);
    double gn = g.norm();
    if (gn <= opt.newton_tol) {
      out.converged = true;
      out.p = p;
      return out;
    }
    Eigen::MatrixXd H = top_block(hessian_phi(s.model, ps), dim);
    Eigen::VectorXd delta = H.fullPivLu().solve(-g);
    if (!delta.allFinite()) return out;
    double dn = delta.norm();
    if (dn > 0.5) delta *= 0.5 / dn;  // trust region in chart units
    // damped step: require gradient decrease
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 25; ++halving) {
      Point q = move_point(s.model, p, t * delta);
      double qnsq = norm_sq(s, q);
      if (qnsq >= guard * 10) {
        Eigen::VectorXd gq = chart_grad(s, q).head(dim);
        if (gq.norm() < (1.0 - 0.25 * t) * gn || gq.norm() <= opt.newton_tol) {
          p = q;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) return out;
  }
  return out;
}

// deterministic ordering for reports and deduplication
bool point_less(const CriticalPoint& a, const CriticalPoint& b) {
  if (std::abs(a.phi_value - b.phi_value) > 1e-12) return a.phi_value < b.phi_value;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a.location.h[i].real() - b.location.h[i].real()) > 1e-9)
      return a.location.h[i].real() < b.location.h[i].real();
    if (std::abs(a.location.h[i].imag() - b.location.h[i].imag()) > 1e-9)
      return a.location.h[i].imag() < b.location.h[i].imag();
  }
  for (int i = 0; i < 2; ++i) {
    if (std::abs(a.location.hy[i].real() - b.location.hy[i].real()) > 1e-9)
      return a.location.hy[i].real() < b.location.hy[i].real();
    if (std::abs(a.location.hy[i].imag() - b.location.hy[i].imag()) > 1e-9)
      return a.location.hy[i].imag() < b.location.hy[i].imag();
  }
  return false;
}

std::vector<Point> chart_grid_seeds(const Section& s, int per_axis_1d, int per_axis_4d) {
  const Model& m = s.model;
  std::vector<Point> seeds;
  double scale = s.coeff_scale();
  double min_nsq = 1e-6 * scale * scale;
  auto axis = [](int n, int i) { return -kChartRadius + 2.0 * kChartRadius * (i + 0.5) / n; };
  if (m.complex_dim() == 1) {
    int n = per_axis_1d;
    for (int chart = 0; chart < m.chart_count(); ++chart)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cplx z(axis(n, i), axis(n, j));
          if (std::abs(z) > kChartRadius) continue;
          Point p = point_from_affine(m, chart, {z, cplx{}});
          if (norm_sq(s, p) > min_nsq) seeds.push_back(p);
        }
  } else {
    int n = per_axis_4d;
    for (int chart = 0; chart < m.chart_count(); ++chart)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cplx z(axis(n, i), axis(n, j));
          if (std::abs(z) > kChartRadius) continue;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              cplx w(axis(n, k), axis(n, l));
              if (std::abs(w) > kChartRadius) continue;
              Point p = point_from_affine(m, chart, {z, w});
              if (norm_sq(s, p) > min_nsq) seeds.push_back(p);
            }
        }
  }
  return seeds;
}

}  // namespace

int ph_index(const CriticalPoint& cp) {
  if (cp.degenerate) throw PreconditionError("Poincare-Hopf index of a degenerate point");
  return cp.morse_index % 2 == 0 ? 1 : -1;
}

CriticalPoint classify(const Section& s, const Point& location) {
  const Model& m = s.model;
  int dim = m.real_dim();
  Point p = rechart(m, location);
  double gn = grad_phi_norm(s, p);
  if (gn > 1e-8) throw PreconditionError("classify called away from the critical set");

  PotentialSample ps = sample_potential(s, p);
  Eigen::MatrixXd H = top_block(hessian_phi(m, ps), dim);
  Eigen::MatrixXd G = top_block(metric_matrix(m, p), dim);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, G);
  Eigen::VectorXd ev = es.eigenvalues();  // ascending, G-orthonormal vectors

  CriticalPoint cp;
  cp.location = p;
  cp.phi_value = ps.phi;
  cp.grad_norm = gn;
  cp.eigenvalues.setZero();
  cp.eigenvalues.head(dim) = ev;
  double emax = ev.cwiseAbs().maxCoeff();
  double emin = ev.cwiseAbs().minCoeff();
  cp.degenerate = (emax == 0) || (emin <= kDegeneracyRel * emax);
  if (cp.degenerate) {
    cp.morse_index = -1;
    return cp;
  }
  int neg = 0;
  for (int i = 0; i < dim; ++i)
    if (ev[i] < 0) ++neg;
  cp.morse_index = neg;
  if (neg > m.complex_dim())
    throw Error("Morse index exceeds the complex dimension at a plurisubharmonic critical point");
  for (int i = 0; i < dim; ++i) {
    if (ev[i] < 0) {
      Eigen::Vector4d v = Eigen::Vector4d::Zero();
      v.head(dim) = es.eigenvectors().col(i);
      cp.neg_eigenvectors.push_back(v);
    }
  }
  return cp;
}

CriticalSearch find_critical_points(const Section& s, const SearchOptions& opt) {
  const Model& m = s.model;
  CriticalSearch out;
  std::vector<Point> seeds = chart_grid_seeds(s, opt.grid_per_axis_cp1, opt.grid_per_axis_4d);

  std::vector<CriticalPoint> found;
  int kept_degenerate = 0;
  for (const Point& seed : seeds) {
    NewtonOutcome res = newton_from(s, seed, opt);
    if (!res.converged) continue;
    Point p = rechart(m, res.p);
    if (grad_phi_norm(s, p) > kCriticalGradTol) continue;
    bool dup = false;
    for (const auto& q : found)
      if (chordal(m, q.location, p) <= kDedupTol) {
        dup = true;
        break;
      }
    for (const auto& q : out.degenerate_hits)
      if (chordal(m, q, p) <= kDedupTol) {
        dup = true;
        break;
      }
    if (dup) continue;
    CriticalPoint cp = classify(s, p);
    if (cp.degenerate) {
      out.degenerate_suspected = true;
      if (kept_degenerate < 512) {
        out.degenerate_hits.push_back(p);
        ++kept_degenerate;
      }
      continue;
    }
    found.push_back(std::move(cp));
    if (static_cast<int>(found.size()) > opt.max_kept_points) {
      out.warnings.push_back("critical search exceeded the kept-point budget; results best-effort");
      break;
    }
  }

  std::sort(found.begin(), found.end(), point_less);
  out.points = std::move(found);

  if (m.kind == ModelKind::CP1) {
    out.audit_available = !out.degenerate_suspected;
    if (out.audit_available) {
      int sum = 0;
      for (const auto& cp : out.points) sum += ph_index(cp);
      int distinct_zeros = static_cast<int>(section_zeros_cp1(s).size());
      out.poincare_hopf_sum = sum + distinct_zeros;
      out.complete = (out.poincare_hopf_sum == 2);
      if (!out.complete)
        out.warnings.push_back("Poincare-Hopf audit failed: critical search may be incomplete");
    } else {
      out.warnings.push_back("degenerate critical set suspected; isolated inventory is partial");
    }
  } else {
    // no cheap index audit in 4 real dimensions; results are best-effort
    out.audit_available = false;
    out.complete = !out.degenerate_suspected;
    if (out.degenerate_suspected)
      out.warnings.push_back("degenerate critical set suspected on a 4-dimensional model");
  }
  return out;
}

namespace {

// pseudo-inverse Newton corrector used on degenerate critical manifolds
Point pinv_correct(const Section& s, Point p, int steps) {
  int dim = s.model.real_dim();
  for (int i = 0; i < steps; ++i) {
    PotentialSample ps = sample_potential(s, p);
    Eigen::VectorXd g = chart_grad(s.model, ps).head(dim);
    if (g.norm() < 1e-13) break;
    Eigen::MatrixXd H = top_block(hessian_phi(s.model, ps), dim);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-7);
    Eigen::VectorXd delta = svd.solve(-g);
    p = move_point(s.model, p, delta);
  }
  return p;
}

int null_count(const Section& s, const Point& p, Eigen::MatrixXd* null_basis = nullptr) {
  int dim = s.model.real_dim();
  PotentialSample ps = sample_potential(s, p);
  Eigen::MatrixXd H = top_block(hessian_phi(s.model, ps), dim);
  Eigen::MatrixXd G = top_block(metric_matrix(s.model, p), dim);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, G);
  Eigen::VectorXd ev = es.eigenvalues();
  double emax = ev.cwiseAbs().maxCoeff();
  int count = 0;
  std::vector<int> idx;
  for (int i = 0; i < dim; ++i)
    if (emax == 0 || std::abs(ev[i]) <= kDegeneracyRel * emax) {
      ++count;
      idx.push_back(i);
    }
  if (null_basis) {
    null_basis->resize(dim, count);
    for (int k = 0; k < count; ++k) null_basis->col(k) = es.eigenvectors().col(idx[k]);
  }
  return count;
}

}  // namespace

DegeneracyReport detect_degenerate(const Section& s) {
  DegeneracyReport rep;
  CriticalSearch search = find_critical_points(s);
  if (!search.degenerate_suspected || search.degenerate_hits.empty()) {
    rep.present = false;
    return rep;
  }
  rep.present = true;
  const Model& m = s.model;
  int dim = m.real_dim();

  Point start = pinv_correct(s, search.degenerate_hits.front(), 6);
  Eigen::MatrixXd nb;
  rep.dimension = null_count(s, start, &nb);

  double step = 1e-3;
  auto record = [&](const Point& p) {
    rep.samples.push_back(p);
    rep.max_grad_norm = std::max(rep.max_grad_norm, grad_phi_norm(s, p));
  };

  if (rep.dimension == 1) {
    // predictor-corrector walk along the critical curve until it closes
    Point p = start;
    Eigen::VectorXd dir = nb.col(0).normalized();
    record(p);
    int max_steps = 60000;
    for (int i = 0; i < max_steps; ++i) {
      Eigen::VectorXd delta = step * dir;
      Point q = move_point(m, p, delta);
      // transport the direction if the chart changed, then correct
      if (q.chart != p.chart) {
        Tangent t;
        t.base = p;
        t.v.setZero();
        t.v.head(dim) = dir;
        dir = transport(m, t, q.chart).v.head(dim);
        dir.normalize();
      }
      q = pinv_correct(s, q, 3);
      Eigen::MatrixXd nb2;
      if (null_count(s, q, &nb2) < 1) break;
      Eigen::VectorXd new_dir = nb2.col(0).normalized();
      if (new_dir.dot(dir) < 0) new_dir = -new_dir;
      dir = new_dir;
      p = q;
      record(p);
      if (i > 20 && chordal(m, p, rep.samples.front()) < 0.9 * step) {
        rep.closed_loop = true;
        break;
      }
    }
    if (!rep.closed_loop) rep.notes.push_back("continuation did not close the critical curve");
  } else {
    // sample a patch of the critical manifold along random null directions
    std::vector<Point> frontier = {start};
    record(start);
    std::uint64_t rng_state = 0x9e3779b97f4a7c15ull;
    auto next01 = [&rng_state]() {
      rng_state ^= rng_state << 13;
      rng_state ^= rng_state >> 7;
      rng_state ^= rng_state << 17;
      return double(rng_state % 1000003) / 1000003.0;
    };
    double patch_step = 5e-2;
    while (static_cast<int>(rep.samples.size()) < 200 && !frontier.empty()) {
      Point p = frontier.back();
      frontier.pop_back();
      Eigen::MatrixXd nbp;
      int nc = null_count(s, p, &nbp);
      if (nc < 2) continue;
      for (int k = 0; k < 4; ++k) {
        double a = 2 * 3.14159265358979323846 * next01();
        Eigen::VectorXd dir = std::cos(a) * nbp.col(0) + std::sin(a) * nbp.col(1);
        Point q = move_point(m, p, patch_step * dir.normalized());
        q = pinv_correct(s, q, 4);
        if (grad_phi_norm(s, q) > 1e-9) continue;
        bool fresh = true;
        for (const auto& r : rep.samples)
          if (chordal(m, r, q) < patch_step * 0.4) {
            fresh = false;
            break;
          }
        if (fresh) {
          record(q);
          frontier.push_back(q);
        }
      }
    }
  }
  return rep;
}

std::string to_string(SectionClass c) {
  switch (c) {
    case SectionClass::Generic: return "generic";
    case SectionClass::MultipleZero: return "multiple-zero";
    case SectionClass::Antipodal: return "antipodal";
    case SectionClass::Reducible: return "reducible";
    case SectionClass::DegenerateCritical: return "degenerate-critical";
  }
  return "?";
}

double discriminant_abs(const Section& s) {
  Section n = s.normalized();
  switch (s.model.kind) {
    case ModelKind::CP1: return std::abs(cp1_discriminant(n));
    case ModelKind::Quadric: return std::abs(n.alpha().determinant());
    case ModelKind::CP2: return std::abs(n.quad_form().determinant());
  }
  return 0;
}

namespace {

Point antipode_cp1(const Model& m, const Point& p) {
  Eigen::Vector3cd h;
  h << -std::conj(p.h[1]), std::conj(p.h[0]), 0.0;
  return point_from_homogeneous(m, h);
}

bool light_degeneracy_probe(const Section& s) {
  SearchOptions opt;
  opt.grid_per_axis_cp1 = 16;
  opt.grid_per_axis_4d = 5;
  CriticalSearch search = find_critical_points(s, opt);
  return search.degenerate_suspected;
}

}  // namespace

SectionClass section_is_generic(const Section& s) {
  switch (s.model.kind) {
    case ModelKind::CP1: {
      auto zeros = section_zeros_cp1(s);
      for (const auto& z : zeros)
        if (z.multiplicity > 1) return SectionClass::MultipleZero;
      if (s.model.degree == 2 && zeros.size() == 2) {
        Point anti = antipode_cp1(s.model, zeros[0].location);
        if (chordal(s.model, anti, zeros[1].location) <= 1e-8) return SectionClass::Antipodal;
      }
      if (light_degeneracy_probe(s)) return SectionClass::DegenerateCritical;
      return SectionClass::Generic;
    }
    case ModelKind::Quadric: {
      Eigen::Matrix2cd a = s.alpha();
      double scale = a.cwiseAbs().maxCoeff();
      if (std::abs(a.determinant()) <= 1e-8 * scale * scale) return SectionClass::Reducible;
      Eigen::JacobiSVD<Eigen::Matrix2cd> svd(a);
      double s1 = svd.singularValues()[0], s2 = svd.singularValues()[1];
      if (s1 - s2 <= 1e-8 * s1) return SectionClass::DegenerateCritical;
      return SectionClass::Generic;
    }
    case ModelKind::CP2: {
      Eigen::Matrix3cd q = s.quad_form();
      double scale = q.cwiseAbs().maxCoeff();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(q.adjoint() * q);
      double smin = std::sqrt(std::max(0.0, es.eigenvalues()[0]));
      if (smin <= 1e-8 * scale) return SectionClass::MultipleZero;
      if (light_degeneracy_probe(s)) return SectionClass::DegenerateCritical;
      return SectionClass::Generic;
    }
  }
  return SectionClass::Generic;
}

namespace {

double lagrange_residual(const Eigen::Matrix2cd& a, const LagrangeSolution& sol) {
  cplx sv = sol.x.transpose() * a * sol.y;
  Eigen::Vector2cd e1 = sv * (a * sol.y).conjugate() - sol.lambda * sol.x;
  Eigen::Vector2cd e2 = sv * (a.transpose() * sol.x).conjugate() - sol.mu * sol.y;
  double r = std::max(e1.cwiseAbs().maxCoeff(), e2.cwiseAbs().maxCoeff());
  r = std::max(r, std::abs(sol.x.squaredNorm() - 1.0));
  r = std::max(r, std::abs(sol.y.squaredNorm() - 1.0));
  return r;
}

void normalize_phases(LagrangeSolution& sol) {
  auto fix = [](Eigen::Vector2cd& v) {
    int i = std::abs(v[0]) > 1e-12 ? 0 : 1;
    cplx ph = v[i] / std::abs(v[i]);
    v /= ph;
  };
  fix(sol.x);
  fix(sol.y);
}

}  // namespace

QuadricLagrange solve_quadric_lagrange(const Eigen::Matrix2cd& alpha, int family_samples) {
  double scale = alpha.cwiseAbs().maxCoeff();
  if (scale == 0) throw ConfigError("alpha must be nonzero");
  QuadricLagrange out;
  Model m = Model::quadric();
  Section sec = Section::make(m, {alpha(0, 0), alpha(0, 1), alpha(1, 0), alpha(1, 1)});

  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(alpha, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double s1 = svd.singularValues()[0], s2 = svd.singularValues()[1];

  // off the divisor the Lagrange system reduces to alpha y = s conj(x),
  // alpha^T x = s conj(y): conj(x) is a unit eigenvector of alpha alpha^H,
  // |s| the matching singular value
  auto build = [&](const Eigen::Vector2cd& xbar, double sigma) {
    LagrangeSolution sol;
    sol.x = xbar.conjugate();
    sol.y = (alpha.adjoint() * xbar) / sigma;
    sol.lambda = sol.mu = sigma * sigma;
    normalize_phases(sol);
    sol.residual = lagrange_residual(alpha, sol);
    return sol;
  };

  if (s1 - s2 <= 1e-8 * s1) {
    // alpha alpha^H = sigma^2 Id: every unit x gives a solution; the family
    // projects to a critical 2-sphere in Q
    out.degenerate_family = true;
    int n = family_samples;
    for (int i = 0; i < n; ++i) {
      double u = (i + 0.5) / n;
      double theta = std::acos(1.0 - 2.0 * u);
      double phi_ang = 2.0 * 3.14159265358979323846 * std::fmod(i * 0.6180339887498949, 1.0);
      Eigen::Vector2cd xbar;
      xbar << std::cos(theta / 2.0), std::sin(theta / 2.0) * std::exp(cplx(0, phi_ang));
      out.family_samples.push_back(build(xbar, s1));
    }
    out.warnings.push_back("degenerate critical family: positive-dimensional solution set");
    return out;
  }

  for (int k = 0; k < 2; ++k) {
    double sigma = svd.singularValues()[k];
    if (sigma <= 1e-12 * s1) continue;  // the singular pair sits on the divisor
    Eigen::Vector2cd xbar = svd.matrixU().col(k);
    LagrangeSolution sol = build(xbar, sigma);
    out.solutions.push_back(sol);
    Eigen::Vector3cd hx = Eigen::Vector3cd::Zero();
    hx.head<2>() = sol.x;
    Point p = point_from_homogeneous(m, hx, sol.y);
    out.criticals.push_back(classify(sec, p));
  }
  std::sort(out.criticals.begin(), out.criticals.end(), point_less);
  return out;
}

}  // namespace sbs
