#include "sbs/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

namespace sbs {

namespace {

constexpr double kPi = 3.14159265358979323846;
using Vec = Eigen::Vector4d;

Vec affine_of(const Model& m, const Point& p) {
  Vec a = Vec::Zero();
  for (int j = 0; j < m.complex_dim(); ++j) {
    a[2 * j] = p.affine[j].real();
    a[2 * j + 1] = p.affine[j].imag();
  }
  return a;
}

Point point_at(const Model& m, int chart, const Vec& aff) {
  std::array<cplx, 2> a{};
  for (int j = 0; j < m.complex_dim(); ++j) a[j] = cplx(aff[2 * j], aff[2 * j + 1]);
  return point_from_affine(m, chart, a);
}

struct Edge {
  int id;
  int va, vb;
};

// exterior angle between the incoming and outgoing travel directions at a
// junction critical point, measured in the Fubini-Study metric
double corner_angle(const Model& m, const Point& at, const Tangent& incoming,
                    const Tangent& outgoing) {
  Point base = rechart(m, at);
  Tangent tin = transport(m, incoming, base.chart);
  Tangent tout = transport(m, outgoing, base.chart);
  double num = metric_eval(m, base, tin.v, tout.v);
  double den = metric_norm(m, base, tin.v) * metric_norm(m, base, tout.v);
  if (den == 0) return 0;
  return std::acos(std::clamp(num / den, -1.0, 1.0));
}

}  // namespace

std::vector<Cycle> assemble_cycles(const Section& s, const std::vector<CriticalPoint>& criticals,
                                   const std::vector<Separatrix>& separatrices,
                                   std::vector<std::string>* warnings) {
  const Model& m = s.model;
  std::vector<Cycle> cycles;
  if (m.complex_dim() != 1) return cycles;  // chains of flow lines are loops only when n = 1

  std::vector<Edge> edges;
  for (size_t i = 0; i < separatrices.size(); ++i)
    edges.push_back({static_cast<int>(i), separatrices[i].end_a, separatrices[i].end_b});

  int pruned = 0;
  std::set<std::vector<int>> seen;
  // one chain per edge set; the minimal edge id is traversed forward, which
  // also quotients out the reflection
  struct Step {
    int edge;
    bool fwd;
  };
  std::vector<std::vector<Step>> chains;

  std::vector<Step> path;
  std::vector<int> used;
  auto walk = [&](auto&& self, int e0, int at, int start, std::vector<int>& visited) -> void {
    if (static_cast<int>(path.size()) > kMaxChainLength) {
      ++pruned;
      return;
    }
    if (at == start && !path.empty()) {
      std::vector<int> key = used;
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) chains.push_back(path);
      return;
    }
    if (!path.empty() && std::find(visited.begin(), visited.end(), at) != visited.end()) {
      ++pruned;  // vertex revisit: immersed chain, logged not assembled
      return;
    }
    visited.push_back(at);
    for (const Edge& e : edges) {
      if (e.id <= e0) continue;
      if (std::find(used.begin(), used.end(), e.id) != used.end()) continue;
      if (e.va == at || e.vb == at) {
        bool fwd = (e.va == at);
        path.push_back({e.id, fwd});
        used.push_back(e.id);
        self(self, e0, fwd ? e.vb : e.va, start, visited);
        path.pop_back();
        used.pop_back();
      }
    }
    visited.pop_back();
  };

  for (const Edge& e : edges) {
    if (e.va == e.vb) {
      chains.push_back({{e.id, true}});  // self-loop separatrix
      continue;
    }
    path = {{e.id, true}};
    used = {e.id};
    std::vector<int> visited;
    walk(walk, e.id, e.vb, e.va, visited);
  }
  if (pruned > 0 && warnings)
    warnings->push_back("cycle enumeration pruned " + std::to_string(pruned) +
                        " longer or non-simple chains");

  for (const auto& chain : chains) {
    Cycle cy;
    for (const Step& st : chain) {
      cy.segments.push_back(st.edge);
      cy.reversed.push_back(!st.fwd);
    }
    // oriented polyline
    for (size_t k = 0; k < chain.size(); ++k) {
      const Separatrix& sep = separatrices[chain[k].edge];
      int n = static_cast<int>(sep.points.size());
      for (int i = 0; i < n; ++i) {
        int idx = chain[k].fwd ? i : n - 1 - i;
        if (k > 0 && i == 0) continue;  // junction point already present
        cy.polyline.push_back(sep.points[idx]);
        cy.tangents.push_back(chain[k].fwd ? sep.tangents[idx] : Vec(-sep.tangents[idx]));
      }
    }
    // corners at the chain junctions
    size_t L = chain.size();
    for (size_t k = 0; k < L; ++k) {
      const Step& prev = chain[(k + L - 1) % L];
      const Step& next = chain[k];
      const Separatrix& sp = separatrices[prev.edge];
      const Separatrix& sn = separatrices[next.edge];
      int vertex = prev.fwd ? sp.end_b : sp.end_a;
      Tangent incoming;
      incoming.base = prev.fwd ? sp.points.back() : sp.points.front();
      incoming.v = prev.fwd ? sp.tangent_b : Vec(-sp.tangent_a);
      Tangent outgoing;
      outgoing.base = next.fwd ? sn.points.front() : sn.points.back();
      outgoing.v = next.fwd ? sn.tangent_a : Vec(-sn.tangent_b);
      double ang = corner_angle(m, criticals[vertex].location, incoming, outgoing);
      cy.corners.push_back({vertex, ang});
    }
    cycles.push_back(std::move(cy));
  }
  return cycles;
}

namespace {

// Hermite resampling of a closed polyline carrying unit tangents; returns
// sample points with unit (chart) tangents
void resample_closed(const Model& m, const std::vector<Point>& pts,
                     const std::vector<Vec>& tangents, double step, int min_samples,
                     std::vector<Point>& out_pts, std::vector<Vec>& out_tan) {
  size_t n = pts.size();
  double total = 0;
  std::vector<double> seglen(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    Point b = transition(m, pts[i + 1], pts[i].chart);
    seglen[i] = (affine_of(m, b) - affine_of(m, pts[i])).norm();
    total += seglen[i];
  }
  double want = std::max(step, 1e-9);
  if (total / want < min_samples) want = total / min_samples;

  for (size_t i = 0; i + 1 < n; ++i) {
    if (seglen[i] == 0) continue;
    Point a = pts[i];
    Point b = transition(m, pts[i + 1], a.chart);
    Tangent tbt;
    tbt.base = pts[i + 1];
    tbt.v = tangents[i + 1];
    Vec tb = transport(m, tbt, a.chart).v;
    Vec ta = tangents[i];
    Vec pa = affine_of(m, a), pb = affine_of(m, b);
    double L = seglen[i];
    int pieces = std::max(1, static_cast<int>(std::ceil(L / want)));
    for (int k = 0; k < pieces; ++k) {
      double u = double(k) / pieces;
      double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
      double h10 = u * (1 - u) * (1 - u);
      double h01 = u * u * (3 - 2 * u);
      double h11 = u * u * (u - 1);
      Vec pos = h00 * pa + h10 * L * ta + h01 * pb + h11 * L * tb;
      double d00 = 6 * u * (u - 1);
      double d10 = (1 - u) * (1 - 3 * u);
      double d01 = -d00;
      double d11 = u * (3 * u - 2);
      Vec der = d00 / L * pa + d10 * ta + d01 / L * pb + d11 * tb;
      double dn = der.norm();
      out_pts.push_back(point_at(m, a.chart, pos));
      out_tan.push_back(dn > 0 ? Vec(der / dn) : ta);
    }
  }
  out_pts.push_back(pts.front());
  out_tan.push_back(tangents.front());
}

}  // namespace

void verify_cycle(const Section& s, Cycle& cycle, const CycleOptions& opt) {
  const Model& m = s.model;
  if (cycle.polyline.size() < 3) throw GeometryError("cycle polyline too short");
  if (chordal(m, cycle.polyline.front(), cycle.polyline.back()) > 1e-6)
    throw GeometryError("cycle polyline does not chain head-to-tail");

  std::vector<Point> pts;
  std::vector<Vec> tans;
  resample_closed(m, cycle.polyline, cycle.tangents, opt.resample_step, opt.min_samples, pts, tans);

  double scale = s.coeff_scale();
  double tube = 1e-12 * scale * scale;
  double calib = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    double nsq = norm_sq(s, pts[i]);
    if (nsq < tube) throw StabilityError(nsq);
    PotentialSample ps = sample_potential(s, pts[i]);
    Vec r = im_rho(m, ps);
    double gn = metric_norm(m, pts[i], tans[i]);
    if (gn > 0) calib = std::max(calib, std::abs(r.dot(tans[i])) / gn);
  }
  cycle.calibration_residual = calib;
  cycle.loop_integral = loop_integral_im_rho(s, pts);

  if (m.kind == ModelKind::CP1) {
    double area = enclosed_area(m, pts);
    // canonical orientation: report the smaller side
    if (area > m.degree - area) {
      std::reverse(cycle.polyline.begin(), cycle.polyline.end());
      std::reverse(cycle.tangents.begin(), cycle.tangents.end());
      for (auto& t : cycle.tangents) t = -t;
      area = m.degree - area;
    }
    cycle.enclosed_area = area;
    cycle.area_defect = std::abs(area - std::round(area));
  }

  // corner angles are recomputed from the stored junction tangents at
  // assembly time; the smooth flag is re-derived here
  cycle.smooth = std::all_of(cycle.corners.begin(), cycle.corners.end(),
                             [](const Corner& c) { return c.exterior_angle <= kSmoothAngleTol; });
  bool bs_ok = (m.kind != ModelKind::CP1) || cycle.area_defect <= kAreaDefectTol;
  bool round_ok = (m.kind != ModelKind::CP1) ||
                  (std::round(cycle.enclosed_area) >= 1 &&
                   std::round(cycle.enclosed_area) <= m.degree - 1);
  cycle.certified = cycle.calibration_residual <= kCalibrationTol && bs_ok && round_ok &&
                    std::abs(cycle.loop_integral) <= 2 * kPi * 1e-5 + 1e-6;
}

ManifoldVerification verify_parametrized(const Section& s,
                                         const std::vector<ManifoldSample>& samples) {
  const Model& m = s.model;
  ManifoldVerification out;
  out.samples = static_cast<int>(samples.size());
  out.min_norm_sq = 1e300;
  double scale = s.coeff_scale();
  double tube = 1e-12 * scale * scale;
  int skipped = 0;
  for (const ManifoldSample& ms : samples) {
    double nsq = norm_sq(s, ms.p);
    out.min_norm_sq = std::min(out.min_norm_sq, nsq);
    if (nsq < 10 * tube) {
      ++skipped;
      continue;
    }
    PotentialSample ps = sample_potential(s, ms.p);
    Vec r = im_rho(m, ps);
    double n1 = metric_norm(m, ms.p, ms.t1);
    double n2 = metric_norm(m, ms.p, ms.t2);
    if (n1 > 1e-12) out.max_im_rho = std::max(out.max_im_rho, std::abs(r.dot(ms.t1)) / n1);
    if (n2 > 1e-12) out.max_im_rho = std::max(out.max_im_rho, std::abs(r.dot(ms.t2)) / n2);
    if (n1 > 1e-12 && n2 > 1e-12) {
      // g-orthonormalize before evaluating omega
      Vec u1 = ms.t1 / n1;
      double g12 = metric_eval(m, ms.p, u1, ms.t2);
      Vec w = ms.t2 - g12 * u1;
      double nw = metric_norm(m, ms.p, w);
      if (nw > 1e-9) {
        Vec u2 = w / nw;
        out.max_omega = std::max(out.max_omega, std::abs(omega_eval(m, ms.p, u1, u2)));
      }
    }
  }
  out.stable = out.min_norm_sq > tube;
  if (skipped > 0)
    out.notes.push_back(std::to_string(skipped) + " samples inside the divisor tube were skipped");
  if (!out.stable) out.notes.push_back("candidate rejected as non-stable: it meets the divisor");
  return out;
}

namespace {

// central finite-difference tangent of a parameterized family of points,
// expressed in the chart of the center point
Vec fd_tangent(const Model& m, const Point& center, const Point& plus, const Point& minus,
               double h) {
  Point a = transition(m, plus, center.chart);
  Point b = transition(m, minus, center.chart);
  return (affine_of(m, a) - affine_of(m, b)) / (2 * h);
}

}  // namespace

std::vector<ManifoldSample> sample_s0_sphere(int n_samples) {
  Model m = Model::quadric();
  std::vector<ManifoldSample> out;
  constexpr double golden = 0.6180339887498949;
  double h = 1e-5;
  auto embed = [&](double theta, double phi_ang) {
    Eigen::Vector2cd x;
    x << std::cos(theta / 2.0), std::sin(theta / 2.0) * std::exp(cplx(0, phi_ang));
    Eigen::Vector3cd hx = Eigen::Vector3cd::Zero();
    hx.head<2>() = x;
    return point_from_homogeneous(m, hx, x.conjugate());
  };
  for (int k = 0; k < n_samples; ++k) {
    double u = (k + 0.5) / n_samples;
    double theta = std::acos(1 - 2 * u);
    double phi_ang = 2 * kPi * std::fmod(k * golden, 1.0);
    ManifoldSample ms;
    ms.p = embed(theta, phi_ang);
    ms.t1 = fd_tangent(m, ms.p, embed(theta + h, phi_ang), embed(theta - h, phi_ang), h);
    ms.t2 = fd_tangent(m, ms.p, embed(theta, phi_ang + h), embed(theta, phi_ang - h), h);
    out.push_back(ms);
  }
  return out;
}

std::vector<ManifoldSample> sample_rp2(int n_samples) {
  Model m = Model::cp2();
  std::vector<ManifoldSample> out;
  constexpr double golden = 0.6180339887498949;
  double h = 1e-5;
  auto embed = [&](double theta, double phi_ang) {
    Eigen::Vector3cd v;
    v << std::sin(theta) * std::cos(phi_ang), std::sin(theta) * std::sin(phi_ang),
        std::cos(theta);
    return point_from_homogeneous(m, v);
  };
  for (int k = 0; k < n_samples; ++k) {
    double u = (k + 0.5) / n_samples;
    double theta = std::acos(1 - 2 * u);
    double phi_ang = 2 * kPi * std::fmod(k * golden, 1.0);
    if (std::sin(theta) < 0.05) continue;  // chart of the parameterization degenerates
    ManifoldSample ms;
    ms.p = embed(theta, phi_ang);
    ms.t1 = fd_tangent(m, ms.p, embed(theta + h, phi_ang), embed(theta - h, phi_ang), h);
    ms.t2 = fd_tangent(m, ms.p, embed(theta, phi_ang + h), embed(theta, phi_ang - h), h);
    out.push_back(ms);
  }
  return out;
}

std::vector<ManifoldSample> sample_meridian(double phase, int n) {
  Model m = Model::cp1(2);
  std::vector<ManifoldSample> out;
  double h = 1e-5;
  auto embed = [&](double t) {
    Eigen::Vector3cd v;
    v << std::cos(t / 2.0), std::sin(t / 2.0) * std::exp(cplx(0, phase)), 0.0;
    return point_from_homogeneous(m, v);
  };
  for (int k = 0; k < n; ++k) {
    double t = 2 * kPi * k / n;
    ManifoldSample ms;
    ms.p = embed(t);
    ms.t1 = fd_tangent(m, ms.p, embed(t + h), embed(t - h), h);
    out.push_back(ms);
  }
  return out;
}

namespace {

Cycle circle_cycle_from_degenerate(const Section& s, const DegeneracyReport& rep) {
  const Model& m = s.model;
  Cycle cy;
  cy.from_degenerate_circle = true;
  cy.polyline = rep.samples;
  cy.polyline.push_back(rep.samples.front());
  size_t n = cy.polyline.size();
  cy.tangents.resize(n);
  for (size_t i = 0; i + 1 < n; ++i) {
    size_t prev = (i == 0) ? n - 2 : i - 1;
    Point a = transition(m, cy.polyline[prev], cy.polyline[i].chart);
    Point b = transition(m, cy.polyline[i + 1], cy.polyline[i].chart);
    Vec d = affine_of(m, b) - affine_of(m, a);
    double dn = d.norm();
    cy.tangents[i] = dn > 0 ? Vec(d / dn) : Vec::Zero();
  }
  cy.tangents[n - 1] = cy.tangents[0];
  cy.notes.push_back("degenerate critical circle taken as a smooth SBS cycle");
  return cy;
}

}  // namespace

VerificationReport count_sbs(const Section& s, const PipelineOptions& opt) {
  const Model& m = s.model;
  VerificationReport r;
  r.model = m;
  r.section = s;
  r.classification = section_is_generic(s);
  r.criticals = find_critical_points(s, opt.search);
  r.warnings = r.criticals.warnings;

  if (r.criticals.degenerate_suspected) {
    r.degenerate = detect_degenerate(s);
    for (const auto& n : r.degenerate.notes) r.warnings.push_back(n);
  }

  if (m.kind == ModelKind::CP1) {
    FlowOptions fopt = opt.flow;
    fopt.h_max = std::min(fopt.h_max, 0.02);  // separatrix recording density
    SeparatrixSet seps = trace_separatrices(s, r.criticals.points, fopt);
    r.separatrices = seps.separatrices;
    for (const auto& w : seps.warnings) r.warnings.push_back(w);
    r.cycles = assemble_cycles(s, r.criticals.points, r.separatrices, &r.warnings);
    if (r.degenerate.present && r.degenerate.dimension == 1 && r.degenerate.closed_loop)
      r.cycles.push_back(circle_cycle_from_degenerate(s, r.degenerate));
    for (Cycle& cy : r.cycles) {
      try {
        verify_cycle(s, cy, opt.cycle);
      } catch (const StabilityError&) {
        cy.certified = false;
        cy.notes.push_back("rejected: cycle meets the divisor tube (non-stable)");
      } catch (const Error& e) {
        cy.certified = false;
        cy.notes.push_back(std::string("verification failed: ") + e.what());
        r.warnings.push_back(cy.notes.back());
      }
    }
    for (const Cycle& cy : r.cycles)
      if (cy.certified) ++r.certified_count;
  } else if (m.kind == ModelKind::Quadric) {
    if (r.degenerate.present) {
      r.warnings.push_back("positive-dimensional critical set: no isolated base sphere");
    } else {
      const CriticalPoint* saddle = nullptr;
      const CriticalPoint* sink = nullptr;
      int saddles = 0;
      for (const auto& cp : r.criticals.points) {
        if (cp.degenerate) continue;
        if (cp.morse_index == 2) {
          saddle = &cp;
          ++saddles;
        }
        if (cp.morse_index == 0 && (!sink || cp.phi_value < sink->phi_value)) sink = &cp;
      }
      if (saddle && sink && saddles == 1) {
        try {
          SphereMesh mesh = reconstruct_base_sphere(s, *saddle, *sink, opt.mesh);
          r.sphere.present = true;
          r.sphere.euler_characteristic = mesh.euler_characteristic;
          r.sphere.vertices = static_cast<int>(mesh.vertices.size());
          r.sphere.triangles = static_cast<int>(mesh.triangles.size());
          r.sphere.omega_residual = mesh.omega_residual;
          r.sphere.calibration_residual = mesh.calibration_residual;
          r.sphere.saddle_isotropy = std::abs(omega_eval(
              m, saddle->location, saddle->neg_eigenvectors[0], saddle->neg_eigenvectors[1]));
          r.sphere.certified = mesh.closed && mesh.euler_characteristic == 2 &&
                               mesh.omega_residual <= opt.sphere_omega_tol &&
                               mesh.calibration_residual <= opt.sphere_calibration_tol &&
                               r.sphere.saddle_isotropy <= 1e-8;
          if (r.sphere.certified) r.certified_count = 1;
        } catch (const Error& e) {
          r.warnings.push_back(std::string("sphere reconstruction failed: ") + e.what());
        }
      } else if (saddles == 0) {
        // reducible-type section: single critical point, no SBS cycles
      } else {
        r.warnings.push_back("unexpected critical inventory on the quadric");
      }
    }
  } else {
    r.warnings.push_back("cycle assembly on CP2 is limited to degenerate-set detection");
  }
  return r;
}

namespace {

void run_indexed(int total, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= total) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

ScanReport scan_moduli(const ScanConfig& cfg) {
  ScanReport rep;
  rep.config = cfg;
  if (cfg.samples < 1) throw ConfigError("scan needs at least one sample");

  // all coefficient draws happen up front so the scan is deterministic for
  // any thread count
  std::vector<std::vector<cplx>> draws(cfg.samples);
  if (cfg.path_from && cfg.path_to) {
    for (int i = 0; i < cfg.samples; ++i) {
      double t = cfg.samples == 1 ? 0.0 : double(i) / (cfg.samples - 1);
      std::vector<cplx> c(cfg.path_from->size());
      for (size_t k = 0; k < c.size(); ++k)
        c[k] = (1.0 - t) * (*cfg.path_from)[k] + t * (*cfg.path_to)[k];
      draws[i] = std::move(c);
    }
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < cfg.samples; ++i) {
      std::vector<cplx> c(cfg.model.coefficient_count());
      for (auto& v : c) {
        double re = g(rng), im = g(rng);
        v = cplx(re, im);
      }
      draws[i] = std::move(c);
    }
  }

  rep.results.resize(cfg.samples);
  run_indexed(cfg.samples, std::max(1, cfg.threads), [&](int i) {
    ScanSample out;
    out.index = i;
    out.coeffs = draws[i];
    try {
      Section s = Section::make(cfg.model, draws[i]);
      out.disc_abs = discriminant_abs(s);
      out.near_discriminant = out.disc_abs < cfg.disc_threshold;
      VerificationReport vr = count_sbs(s, cfg.pipeline);
      out.classification = vr.classification;
      out.count = vr.certified_count;
      if (out.classification != SectionClass::Generic)
        out.flags.push_back(to_string(out.classification));
      if (out.near_discriminant) out.flags.push_back("near-discriminant");
      for (const auto& w : vr.warnings) out.flags.push_back(w);
    } catch (const Error& e) {
      out.count = -1;
      out.flags.push_back(std::string("sample failed: ") + e.what());
    }
    rep.results[i] = std::move(out);
  });

  bool first = true;
  bool invariant = true;
  for (const ScanSample& s : rep.results) {
    if (s.count < 0) {
      rep.warnings.push_back("sample " + std::to_string(s.index) + " failed");
      continue;
    }
    bool generic = s.classification == SectionClass::Generic && !s.near_discriminant;
    if (s.near_discriminant) ++rep.near_discriminant;
    if (!generic) continue;
    ++rep.generic_samples;
    rep.histogram[s.count] += 1;
    if (first) {
      rep.invariant_count = s.count;
      first = false;
    } else if (s.count != rep.invariant_count) {
      invariant = false;
    }
  }
  rep.invariant = !first && invariant;
  if (first) rep.invariant_count = -1;
  return rep;
}

double cycle_hausdorff(const Model& m, const Cycle& a, const Cycle& b) {
  auto subsample = [](const std::vector<Point>& pts) {
    std::vector<const Point*> out;
    size_t stride = std::max<size_t>(1, pts.size() / 800);
    for (size_t i = 0; i < pts.size(); i += stride) out.push_back(&pts[i]);
    return out;
  };
  auto pa = subsample(a.polyline), pb = subsample(b.polyline);
  double h = 0;
  for (auto dir = 0; dir < 2; ++dir) {
    const auto& from = dir == 0 ? pa : pb;
    const auto& to = dir == 0 ? pb : pa;
    for (const Point* p : from) {
      double best = 1e300;
      for (const Point* q : to) best = std::min(best, chordal(m, *p, *q));
      h = std::max(h, best);
    }
  }
  return h;
}

}  // namespace sbs
