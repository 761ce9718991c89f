#include "sbs/report.hpp"

#include <algorithm>

namespace sbs {

namespace {

using json = nlohmann::ordered_json;

json complex_pair(const cplx& c) { return json::array({c.real(), c.imag()}); }

json coeffs_json(const std::vector<cplx>& c) {
  json out = json::array();
  for (const auto& v : c) out.push_back(complex_pair(v));
  return out;
}

json point_json(const Model& m, const Point& p) {
  json out;
  out["chart"] = p.chart;
  json aff = json::array();
  for (int j = 0; j < m.complex_dim(); ++j) aff.push_back(complex_pair(p.affine[j]));
  out["affine"] = aff;
  json h = json::array();
  int hn = (m.kind == ModelKind::CP2) ? 3 : 2;
  for (int i = 0; i < hn; ++i) h.push_back(complex_pair(p.h[i]));
  out["homogeneous"] = h;
  if (m.kind == ModelKind::Quadric) {
    json hy = json::array();
    for (int i = 0; i < 2; ++i) hy.push_back(complex_pair(p.hy[i]));
    out["homogeneous_y"] = hy;
  }
  return out;
}

json model_json(const Model& m) {
  json out;
  out["kind"] = m.name();
  out["degree"] = m.degree;
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const VerificationReport& r) {
  const Model& m = r.model;
  json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "verification";
  out["model"] = model_json(m);
  json sec;
  sec["coefficients"] = coeffs_json(r.section.c);
  sec["classification"] = to_string(r.classification);
  out["section"] = sec;

  json crits = json::array();
  for (size_t i = 0; i < r.criticals.points.size(); ++i) {
    const CriticalPoint& cp = r.criticals.points[i];
    json c;
    c["id"] = i;
    c["location"] = point_json(m, cp.location);
    c["phi"] = cp.phi_value;
    c["grad_norm"] = cp.grad_norm;
    c["morse_index"] = cp.morse_index;
    c["degenerate"] = cp.degenerate;
    json ev = json::array();
    for (int k = 0; k < m.real_dim(); ++k) ev.push_back(cp.eigenvalues[k]);
    c["eigenvalues"] = ev;
    crits.push_back(c);
  }
  out["critical_points"] = crits;
  json audit;
  audit["available"] = r.criticals.audit_available;
  audit["complete"] = r.criticals.complete;
  audit["poincare_hopf_sum"] = r.criticals.poincare_hopf_sum;
  out["critical_audit"] = audit;

  json deg;
  deg["present"] = r.degenerate.present;
  deg["dimension"] = r.degenerate.dimension;
  deg["closed_loop"] = r.degenerate.closed_loop;
  deg["sample_count"] = r.degenerate.samples.size();
  deg["max_grad_norm"] = r.degenerate.max_grad_norm;
  out["degenerate_set"] = deg;

  json seps = json::array();
  for (size_t i = 0; i < r.separatrices.size(); ++i) {
    const Separatrix& sp = r.separatrices[i];
    json s;
    s["id"] = i;
    s["saddle"] = sp.saddle;
    s["ends"] = json::array({sp.end_a, sp.end_b});
    s["merged"] = sp.merged;
    s["arc_length"] = sp.arc_length;
    s["samples"] = sp.points.size();
    seps.push_back(s);
  }
  out["separatrices"] = seps;

  json cycles = json::array();
  for (const Cycle& cy : r.cycles) {
    json c;
    c["segments"] = cy.segments;
    json corners = json::array();
    for (const Corner& co : cy.corners) {
      json cj;
      cj["critical"] = co.critical;
      cj["exterior_angle"] = co.exterior_angle;
      corners.push_back(cj);
    }
    c["corners"] = corners;
    c["calibration_residual"] = cy.calibration_residual;
    c["enclosed_area"] = cy.enclosed_area;
    c["area_defect"] = cy.area_defect;
    c["loop_integral_im_rho"] = cy.loop_integral;
    c["smooth"] = cy.smooth;
    c["certified"] = cy.certified;
    c["from_degenerate_circle"] = cy.from_degenerate_circle;
    c["notes"] = cy.notes;
    cycles.push_back(c);
  }
  out["cycles"] = cycles;

  json sphere;
  sphere["present"] = r.sphere.present;
  sphere["certified"] = r.sphere.certified;
  sphere["euler_characteristic"] = r.sphere.euler_characteristic;
  sphere["vertices"] = r.sphere.vertices;
  sphere["triangles"] = r.sphere.triangles;
  sphere["omega_residual"] = r.sphere.omega_residual;
  sphere["calibration_residual"] = r.sphere.calibration_residual;
  sphere["saddle_isotropy"] = r.sphere.saddle_isotropy;
  out["sphere"] = sphere;

  out["certified_count"] = r.certified_count;
  out["warnings"] = r.warnings;
  return out;
}

nlohmann::ordered_json to_json(const ScanReport& r) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "scan";
  out["model"] = model_json(r.config.model);
  json fam;
  fam["samples"] = r.config.samples;
  fam["seed"] = r.config.seed;
  fam["discriminant_threshold"] = r.config.disc_threshold;
  fam["path"] = static_cast<bool>(r.config.path_from && r.config.path_to);
  out["family"] = fam;

  json results = json::array();
  for (const ScanSample& s : r.results) {
    json e;
    e["index"] = s.index;
    e["coefficients"] = coeffs_json(s.coeffs);
    e["classification"] = to_string(s.classification);
    e["discriminant_abs"] = s.disc_abs;
    e["near_discriminant"] = s.near_discriminant;
    e["count"] = s.count;
    e["flags"] = s.flags;
    results.push_back(e);
  }
  out["results"] = results;

  json hist;
  for (const auto& [count, n] : r.histogram) hist[std::to_string(count)] = n;
  out["histogram"] = hist;
  out["generic_samples"] = r.generic_samples;
  out["near_discriminant"] = r.near_discriminant;
  out["invariant"] = r.invariant;
  out["invariant_count"] = r.invariant_count;
  out["warnings"] = r.warnings;
  return out;
}

nlohmann::ordered_json to_json(const ManifoldVerification& r, const std::string& preset,
                               const Model& model) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = "manifold";
  out["model"] = model_json(model);
  out["preset"] = preset;
  out["samples"] = r.samples;
  out["max_omega"] = r.max_omega;
  out["max_im_rho"] = r.max_im_rho;
  out["min_norm_sq"] = r.min_norm_sq;
  out["stable"] = r.stable;
  out["notes"] = r.notes;
  return out;
}

std::string dump_report(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace sbs
