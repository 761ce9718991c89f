#include "sbs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sbs {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

using Vec = Eigen::Vector4d;

struct FieldEval {
  bool ok = false;
  bool divisor = false;
  Vec v = Vec::Zero();
};

// +-grad phi in the chart of `chart_point`, at the given affine offset
FieldEval eval_field(const Section& s, const Point& chart_point, const Vec& aff, double sign,
                     double guard) {
  FieldEval out;
  int n = s.model.complex_dim();
  std::array<cplx, 2> a{};
  for (int j = 0; j < n; ++j) a[j] = cplx(aff[2 * j], aff[2 * j + 1]);
  double maxa = 0;
  for (int j = 0; j < n; ++j) maxa = std::max(maxa, std::abs(a[j]));
  if (maxa > 3.0) return out;  // stage left the chart's usable zone
  Point q = point_from_affine(s.model, chart_point.chart, a);
  double nsq = norm_sq(s, q);
  if (nsq < guard) {
    out.divisor = true;
    return out;
  }
  PotentialSample ps = sample_potential(s, q);
  out.v = sign * grad_phi(s.model, ps);
  out.ok = true;
  return out;
}

Vec affine_of(const Model& m, const Point& p) {
  Vec a = Vec::Zero();
  for (int j = 0; j < m.complex_dim(); ++j) {
    a[2 * j] = p.affine[j].real();
    a[2 * j + 1] = p.affine[j].imag();
  }
  return a;
}

}  // namespace

Trajectory integrate_flow(const Section& s, const Point& start, FlowDirection dir,
                          const std::vector<CriticalPoint>& targets, const FlowOptions& opt) {
  const Model& m = s.model;
  double sign = (dir == FlowDirection::Descending) ? -1.0 : 1.0;
  double scale = s.coeff_scale();
  double guard = std::max(kDivisorGuardRel, opt.divisor_tube_rel) * scale * scale;

  Trajectory traj;
  traj.direction = dir;

  Point p = rechart(m, start);
  {
    double g0 = grad_phi_norm(s, p);
    if (g0 <= 1e-9) throw PreconditionError("flow started on the critical set");
  }

  auto record = [&](const Point& q, const Vec& vel) {
    double vnorm = vel.norm();
    traj.points.push_back(q);
    traj.tangents.push_back(vnorm > 0 ? Vec(vel / vnorm) : Vec::Zero());
    traj.phis.push_back(phi(s, q));
    if (traj.phis.size() >= 2) {
      double prev = traj.phis[traj.phis.size() - 2];
      double cur = traj.phis.back();
      double slack = 1e-12 * (1.0 + std::abs(prev));
      bool mono = (dir == FlowDirection::Descending) ? (cur <= prev + slack) : (cur >= prev - slack);
      if (!mono) throw IntegrationError("phi monotonicity violated along the flow");
    }
  };

  Vec y = affine_of(m, p);
  FieldEval f0 = eval_field(s, p, y, sign, guard);
  if (!f0.ok) throw IntegrationError("flow field not evaluable at the start point");
  record(p, f0.v);

  double h = 1e-4;
  Vec k1 = f0.v;
  for (int step = 0; step < opt.max_steps; ++step) {
    double speed = k1.norm();
    if (speed < opt.stationary_grad) {
      traj.terminus = Terminus::Stationary;
      return traj;
    }
    // cap the chart step at h_max (also the recording density)
    double h_cap = opt.h_max / speed;
    if (h > h_cap) h = h_cap;

    FieldEval k2 = eval_field(s, p, Vec(y + h * A21 * k1), sign, guard);
    FieldEval k3, k4, k5, k6, k7;
    bool ok = k2.ok;
    if (ok) {
      k3 = eval_field(s, p, Vec(y + h * (A31 * k1 + A32 * k2.v)), sign, guard);
      ok = k3.ok;
    }
    if (ok) {
      k4 = eval_field(s, p, Vec(y + h * (A41 * k1 + A42 * k2.v + A43 * k3.v)), sign, guard);
      ok = k4.ok;
    }
    if (ok) {
      k5 = eval_field(s, p, Vec(y + h * (A51 * k1 + A52 * k2.v + A53 * k3.v + A54 * k4.v)), sign,
                      guard);
      ok = k5.ok;
    }
    if (ok) {
      k6 = eval_field(
          s, p, Vec(y + h * (A61 * k1 + A62 * k2.v + A63 * k3.v + A64 * k4.v + A65 * k5.v)), sign,
          guard);
      ok = k6.ok;
    }
    Vec y5 = Vec::Zero();
    if (ok) {
      y5 = y + h * (B1 * k1 + B3 * k3.v + B4 * k4.v + B5 * k5.v + B6 * k6.v);
      k7 = eval_field(s, p, y5, sign, guard);
      ok = k7.ok;
    }
    if (!ok) {
      bool divisor_stage = (k2.divisor || k3.divisor || k4.divisor || k5.divisor || k6.divisor ||
                            (k7.divisor && dir == FlowDirection::Ascending));
      if (divisor_stage && dir == FlowDirection::Ascending && h < 1e-10) {
        traj.terminus = Terminus::DivisorEscape;
        return traj;
      }
      h *= 0.25;
      if (h < 1e-15) throw IntegrationError("step size collapsed");
      continue;
    }
    Vec err = h * (E1 * k1 + E3 * k3.v + E4 * k4.v + E5 * k5.v + E6 * k6.v + E7 * k7.v);
    double tol = opt.abs_tol + opt.rel_tol * std::max(1.0, y5.norm());
    double en = err.norm();
    if (en > tol) {
      h *= std::clamp(0.9 * std::pow(tol / en, 0.2), 0.1, 1.0);
      if (h < 1e-15) throw IntegrationError("step size collapsed");
      continue;
    }

    // accepted
    double chart_step = (y5 - y).norm();
    traj.arc_length += chart_step;
    int n = m.complex_dim();
    std::array<cplx, 2> aff{};
    for (int j = 0; j < n; ++j) aff[j] = cplx(y5[2 * j], y5[2 * j + 1]);
    Point q = point_from_affine(m, p.chart, aff);
    record(q, k7.v);

    double maxa = 0;
    for (int j = 0; j < n; ++j) maxa = std::max(maxa, std::abs(aff[j]));
    if (maxa > kChartRadius) {
      q = rechart(m, q);
      k7 = eval_field(s, q, affine_of(m, q), sign, guard);
      if (!k7.ok) throw IntegrationError("field not evaluable after re-charting");
    }
    p = q;
    y = affine_of(m, p);
    k1 = k7.v;

    // terminal checks
    double nsq = norm_sq(s, p);
    if (nsq < 10 * guard) {
      if (dir == FlowDirection::Ascending) {
        traj.terminus = Terminus::DivisorEscape;
        return traj;
      }
      throw StabilityError(nsq);
    }
    for (size_t t = 0; t < targets.size(); ++t) {
      if (chordal(m, targets[t].location, p) <= opt.capture_radius) {
        traj.terminus = Terminus::Critical;
        traj.terminus_critical = static_cast<int>(t);
        return traj;
      }
    }
    if (en > 0) h *= std::clamp(0.9 * std::pow(tol / en, 0.2), 0.1, 5.0);
  }
  traj.terminus = Terminus::Budget;
  return traj;
}

namespace {

Vec unit_chart(const Vec& v) {
  double n = v.norm();
  return n > 0 ? Vec(v / n) : Vec::Zero();
}

// append a trajectory (optionally reversed) into a separatrix polyline
void append_curve(Separatrix& sep, const Trajectory& t, bool reversed) {
  int n = static_cast<int>(t.points.size());
  for (int i = 0; i < n; ++i) {
    int k = reversed ? n - 1 - i : i;
    sep.points.push_back(t.points[k]);
    sep.tangents.push_back(reversed ? Vec(-t.tangents[k]) : t.tangents[k]);
    sep.phis.push_back(t.phis[k]);
  }
  sep.arc_length += t.arc_length;
}

}  // namespace

SeparatrixSet trace_separatrices(const Section& s, const std::vector<CriticalPoint>& criticals,
                                 const FlowOptions& opt) {
  const Model& m = s.model;
  SeparatrixSet out;
  for (size_t ci = 0; ci < criticals.size(); ++ci) {
    const CriticalPoint& saddle = criticals[ci];
    if (saddle.degenerate || saddle.morse_index < 1) continue;
    for (const Eigen::Vector4d& evec : saddle.neg_eigenvectors) {
      Vec e = unit_chart(evec);
      std::array<Trajectory, 2> half;
      std::array<int, 2> sink{-1, -1};
      bool both_ok = true;
      for (int sgn = 0; sgn < 2; ++sgn) {
        Vec offset = (sgn == 0 ? 1.0 : -1.0) * kLaunchOffset * e;
        std::array<cplx, 2> aff = saddle.location.affine;
        for (int j = 0; j < m.complex_dim(); ++j)
          aff[j] += cplx(offset[2 * j], offset[2 * j + 1]);
        Point launch = point_from_affine(m, saddle.location.chart, aff);
        try {
          half[sgn] = integrate_flow(s, launch, FlowDirection::Descending, criticals, opt);
        } catch (const Error& e) {
          out.warnings.push_back(std::string("separatrix launch failed: ") + e.what());
          both_ok = false;
          continue;
        }
        if (half[sgn].terminus != Terminus::Critical) {
          out.warnings.push_back("separatrix launch did not reach a critical point");
          both_ok = false;
          continue;
        }
        sink[sgn] = half[sgn].terminus_critical;
      }

      auto endpoint_in_chart = [&](int crit, int chart) {
        return transition(m, criticals[crit].location, chart);
      };

      if (both_ok && sink[0] >= 0 && sink[1] >= 0 && sink[0] != sink[1] &&
          sink[0] != static_cast<int>(ci) && sink[1] != static_cast<int>(ci)) {
        // join the two launches into one curve: sink[1] -> saddle -> sink[0]
        Separatrix sep;
        sep.saddle = static_cast<int>(ci);
        sep.merged = true;
        sep.end_a = sink[1];
        sep.end_b = sink[0];
        sep.points.push_back(endpoint_in_chart(sink[1], half[1].points.back().chart));
        sep.tangents.push_back(-half[1].tangents.back());
        sep.phis.push_back(criticals[sink[1]].phi_value);
        append_curve(sep, half[1], true);
        sep.points.push_back(saddle.location);
        sep.tangents.push_back(e);
        sep.phis.push_back(saddle.phi_value);
        append_curve(sep, half[0], false);
        sep.points.push_back(endpoint_in_chart(sink[0], half[0].points.back().chart));
        sep.tangents.push_back(half[0].tangents.back());
        sep.phis.push_back(criticals[sink[0]].phi_value);
        sep.tangent_a = sep.tangents.front();
        sep.tangent_b = sep.tangents.back();
        out.separatrices.push_back(std::move(sep));
      } else {
        for (int sgn = 0; sgn < 2; ++sgn) {
          if (sink[sgn] < 0) continue;
          Separatrix sep;
          sep.saddle = static_cast<int>(ci);
          sep.merged = false;
          sep.end_a = static_cast<int>(ci);
          sep.end_b = sink[sgn];
          sep.points.push_back(saddle.location);
          sep.tangents.push_back((sgn == 0 ? 1.0 : -1.0) * e);
          sep.phis.push_back(saddle.phi_value);
          append_curve(sep, half[sgn], false);
          sep.points.push_back(endpoint_in_chart(sink[sgn], half[sgn].points.back().chart));
          sep.tangents.push_back(half[sgn].tangents.back());
          sep.phis.push_back(criticals[sink[sgn]].phi_value);
          sep.tangent_a = sep.tangents.front();
          sep.tangent_b = sep.tangents.back();
          out.separatrices.push_back(std::move(sep));
        }
      }
    }
  }
  return out;
}

namespace {

struct LevelCurve {
  double theta;
  Trajectory traj;
};

Point level_point(const Model& m, const Trajectory& t, double level) {
  // phis decrease strictly along a descending trajectory
  const auto& ph = t.phis;
  int lo = 0, hi = static_cast<int>(ph.size()) - 1;
  if (level >= ph.front()) return t.points.front();
  if (level <= ph.back()) return t.points.back();
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (ph[mid] >= level)
      lo = mid;
    else
      hi = mid;
  }
  // cubic Hermite between samples lo and hi in the chart of lo
  Point a = t.points[lo];
  Point b = transition(m, t.points[hi], a.chart);
  Tangent tb_in;
  tb_in.base = t.points[hi];
  tb_in.v = t.tangents[hi];
  Vec tb = transport(m, tb_in, a.chart).v;
  Vec ta = t.tangents[lo];
  Vec pa = affine_of(m, a), pb = affine_of(m, b);
  double seg = (pb - pa).norm();
  double u = (ph[lo] - level) / (ph[lo] - ph[hi]);
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  double h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u);
  double h11 = u * u * (u - 1);
  Vec pos = h00 * pa + h10 * seg * ta + h01 * pb + h11 * seg * tb;
  std::array<cplx, 2> aff{};
  for (int j = 0; j < m.complex_dim(); ++j) aff[j] = cplx(pos[2 * j], pos[2 * j + 1]);
  return point_from_affine(m, a.chart, aff);
}

}  // namespace

SphereMesh reconstruct_base_sphere(const Section& s, const CriticalPoint& saddle,
                                   const CriticalPoint& sink, const MeshOptions& opt) {
  const Model& m = s.model;
  if (m.kind != ModelKind::Quadric)
    throw PreconditionError("base-sphere reconstruction runs on the quadric");
  if (saddle.degenerate || saddle.morse_index != 2)
    throw PreconditionError("sphere reconstruction needs a Morse index 2 saddle");
  const Vec& u = saddle.neg_eigenvectors[0];
  const Vec& v = saddle.neg_eigenvectors[1];
  if (std::abs(omega_eval(m, saddle.location, u, v)) > 1e-8)
    throw PreconditionError("saddle negative subspace is not omega-isotropic");

  std::vector<CriticalPoint> targets = {sink, saddle};

  auto launch = [&](double theta) {
    Vec dir = unit_chart(std::cos(theta) * u + std::sin(theta) * v);
    std::array<cplx, 2> aff = saddle.location.affine;
    for (int j = 0; j < 2; ++j) aff[j] += cplx(kLaunchOffset * dir[2 * j], kLaunchOffset * dir[2 * j + 1]);
    Point p0 = point_from_affine(m, saddle.location.chart, aff);
    Trajectory t = integrate_flow(s, p0, FlowDirection::Descending, targets, opt.flow);
    if (t.terminus != Terminus::Critical || t.terminus_critical != 0)
      throw IntegrationError("sphere trajectory missed the sink at theta = " + std::to_string(theta));
    return t;
  };

  std::map<double, Trajectory> fam;
  for (int i = 0; i < opt.n_theta; ++i) {
    double theta = 2 * kPi * i / opt.n_theta;
    fam.emplace(theta, launch(theta));
  }

  // refine where adjacent trajectories drift apart
  double lo = -1e300, hi = 1e300;
  for (auto& [th, t] : fam) {
    lo = std::max(lo, t.phis.back());
    hi = std::min(hi, t.phis.front());
  }
  auto gap = [&](const Trajectory& a, const Trajectory& b) {
    double g = 0;
    for (int k = 1; k <= 8; ++k) {
      double level = lo + (hi - lo) * k / 9.0;
      g = std::max(g, chordal(m, level_point(m, a, level), level_point(m, b, level)));
    }
    return g;
  };
  bool refined = true;
  while (refined && static_cast<int>(fam.size()) < opt.max_theta) {
    refined = false;
    auto it = fam.begin();
    std::vector<double> inserts;
    for (; it != fam.end(); ++it) {
      auto nx = std::next(it);
      double th0 = it->first;
      double th1 = (nx == fam.end()) ? fam.begin()->first + 2 * kPi : nx->first;
      const Trajectory& t1 = (nx == fam.end()) ? fam.begin()->second : nx->second;
      if (gap(it->second, t1) > opt.refine_gap) inserts.push_back(0.5 * (th0 + th1));
    }
    for (double th : inserts) {
      if (static_cast<int>(fam.size()) >= opt.max_theta) break;
      fam.emplace(std::fmod(th, 2 * kPi), launch(std::fmod(th, 2 * kPi)));
      refined = true;
    }
  }

  int K = static_cast<int>(fam.size());
  int M = opt.n_levels;
  SphereMesh mesh;
  mesh.vertices.reserve(K * M + 2);
  mesh.vertices.push_back(saddle.location);  // apex, index 0
  mesh.vertices.push_back(sink.location);    // bottom, index 1
  std::vector<const Trajectory*> curves;
  curves.reserve(K);
  for (auto& [th, t] : fam) curves.push_back(&t);
  for (int j = 0; j < M; ++j) {
    double level = hi - (hi - lo) * (j + 0.5) / M;  // descending from apex to bottom
    for (int i = 0; i < K; ++i) mesh.vertices.push_back(level_point(m, *curves[i], level));
  }
  auto vid = [&](int j, int i) { return 2 + j * K + ((i % K) + K) % K; };
  for (int i = 0; i < K; ++i) {
    mesh.triangles.push_back({0, vid(0, i), vid(0, i + 1)});
    mesh.triangles.push_back({1, vid(M - 1, i + 1), vid(M - 1, i)});
  }
  for (int j = 0; j + 1 < M; ++j)
    for (int i = 0; i < K; ++i) {
      mesh.triangles.push_back({vid(j, i), vid(j + 1, i), vid(j + 1, i + 1)});
      mesh.triangles.push_back({vid(j, i), vid(j + 1, i + 1), vid(j, i + 1)});
    }

  // closure and Euler characteristic
  std::map<std::pair<int, int>, int> edge_count;
  for (auto& tr : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tr[e], b = tr[(e + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}] += 1;
    }
  mesh.closed = std::all_of(edge_count.begin(), edge_count.end(),
                            [](const auto& kv) { return kv.second == 2; });
  mesh.euler_characteristic = static_cast<int>(mesh.vertices.size()) -
                              static_cast<int>(edge_count.size()) +
                              static_cast<int>(mesh.triangles.size());

  // Lagrangian residual: omega on the two edge vectors of every triangle,
  // normalized by the triangle's metric area
  double total_area = 0;
  for (auto& tr : mesh.triangles) {
    const Point& p0 = mesh.vertices[tr[0]];
    Point p1 = transition(m, mesh.vertices[tr[1]], p0.chart);
    Point p2 = transition(m, mesh.vertices[tr[2]], p0.chart);
    Vec a0 = affine_of(m, p0), a1 = affine_of(m, p1), a2 = affine_of(m, p2);
    Vec e1 = a1 - a0, e2 = a2 - a0;
    std::array<cplx, 2> bary{};
    for (int j = 0; j < 2; ++j)
      bary[j] = (p0.affine[j] + p1.affine[j] + p2.affine[j]) / 3.0;
    Point pb = point_from_affine(m, p0.chart, bary);
    double om = std::abs(omega_eval(m, pb, e1, e2));
    double g11 = metric_eval(m, pb, e1, e1);
    double g22 = metric_eval(m, pb, e2, e2);
    double g12 = metric_eval(m, pb, e1, e2);
    double area = 0.5 * std::sqrt(std::max(1e-300, g11 * g22 - g12 * g12));
    total_area += area;
    mesh.max_omega_raw = std::max(mesh.max_omega_raw, om);
    mesh.omega_residual = std::max(mesh.omega_residual, om / area);
  }
  mesh.mean_triangle_area = total_area / mesh.triangles.size();

  // calibration residual on central secants of the vertex grid
  for (int j = 1; j + 1 < M; ++j)
    for (int i = 0; i < K; ++i) {
      const Point& c = mesh.vertices[vid(j, i)];
      auto secant = [&](int v_from, int v_to) {
        Point a = transition(m, mesh.vertices[v_from], c.chart);
        Point b = transition(m, mesh.vertices[v_to], c.chart);
        Vec d = affine_of(m, b) - affine_of(m, a);
        double gn = metric_norm(m, c, d);
        if (gn == 0) return 0.0;
        Eigen::Vector4d r = im_rho(s, c);
        return std::abs(r.dot(d)) / gn;
      };
      mesh.calibration_residual =
          std::max(mesh.calibration_residual, secant(vid(j - 1, i), vid(j + 1, i)));
      mesh.calibration_residual =
          std::max(mesh.calibration_residual, secant(vid(j, i - 1), vid(j, i + 1)));
    }
  return mesh;
}

}  // namespace sbs
