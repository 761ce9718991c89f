#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbs/flow.hpp"

namespace sbs {

// Theorem-2 certificate threshold on max |Im rho(unit tangent)|
inline constexpr double kCalibrationTol = 1e-6;
// Bohr-Sommerfeld certificate threshold on the integer-area defect (CP1)
inline constexpr double kAreaDefectTol = 1e-4;
// corner exterior angles at or below this classify as smooth
inline constexpr double kSmoothAngleTol = 1e-3;
// chains longer than this are logged, not assembled
inline constexpr int kMaxChainLength = 4;

struct Corner {
  int critical = -1;
  double exterior_angle = 0;  // radians, 0 = smooth junction
};

/// A closed SBS cycle on CP1: a chain of separatrices with corners at
/// critical points, or a degenerate critical circle taken as a whole.
struct Cycle {
  std::vector<int> segments;      // separatrix indices, chained head to tail
  std::vector<bool> reversed;     // per segment orientation
  std::vector<Corner> corners;
  std::vector<Point> polyline;    // oriented closed polyline
  std::vector<Eigen::Vector4d> tangents;  // unit curve tangents at polyline samples
  double calibration_residual = 0;
  double enclosed_area = 0;
  double area_defect = 0;
  double loop_integral = 0;  // \oint Im rho, certified ~ 0
  bool smooth = false;
  bool certified = false;
  bool from_degenerate_circle = false;
  std::vector<std::string> notes;
};

struct CycleOptions {
  double resample_step = 1e-3;  // arc-length spacing of verification samples
  int min_samples = 1000;
};

/// Enumerate vertex-simple closed chains of separatrices (each unordered
/// pair of pole-to-pole curves on CP1 gives one cycle), deduplicated up to
/// cyclic order and orientation.  Corner angles come from the end tangents.
std::vector<Cycle> assemble_cycles(const Section& s, const std::vector<CriticalPoint>& criticals,
                                   const std::vector<Separatrix>& separatrices,
                                   std::vector<std::string>* warnings = nullptr);

/// Dense resampling plus recomputation of every certificate field.
/// Throws StabilityError if a sample enters the divisor tube.
void verify_cycle(const Section& s, Cycle& cycle, const CycleOptions& opt = {});

// --- parametrized candidates -------------------------------------------------

struct ManifoldSample {
  Point p;
  Eigen::Vector4d t1 = Eigen::Vector4d::Zero();
  Eigen::Vector4d t2 = Eigen::Vector4d::Zero();  // unused for 1-dim candidates
};

struct ManifoldVerification {
  int samples = 0;
  double max_omega = 0;       // |omega(t1,t2)| on g-orthonormalized tangent pairs
  double max_im_rho = 0;      // |Im rho(unit tangent)|
  double min_norm_sq = 0;
  bool stable = false;        // min |s|^2 above the divisor tube
  std::vector<std::string> notes;
};

/// Residual report for an externally parameterized candidate Lagrangian.
ManifoldVerification verify_parametrized(const Section& s, const std::vector<ManifoldSample>& samples);

// built-in candidate samplers
std::vector<ManifoldSample> sample_s0_sphere(int n_samples);       // {y = conj(x)} in the quadric
std::vector<ManifoldSample> sample_rp2(int n_samples);             // real points of CP2
std::vector<ManifoldSample> sample_meridian(double phase, int n);  // CP1 meridian through both poles

// --- full pipeline -----------------------------------------------------------

struct SphereSummary {
  bool present = false;
  bool certified = false;
  int euler_characteristic = 0;
  int vertices = 0;
  int triangles = 0;
  double omega_residual = 0;
  double calibration_residual = 0;
  double saddle_isotropy = 0;  // |omega(u,v)| over the saddle's negative pair
};

struct VerificationReport {
  Model model;
  Section section;
  SectionClass classification = SectionClass::Generic;
  CriticalSearch criticals;
  DegeneracyReport degenerate;
  std::vector<Separatrix> separatrices;
  std::vector<Cycle> cycles;
  SphereSummary sphere;
  int certified_count = 0;
  std::vector<std::string> warnings;
};

struct PipelineOptions {
  SearchOptions search{};
  FlowOptions flow{};
  CycleOptions cycle{};
  MeshOptions mesh{};
  // certification thresholds for quadric spheres at default mesh resolution;
  // the strict 1e-5 omega bound is asserted on the structurally flat cases
  double sphere_omega_tol = 1e-3;
  double sphere_calibration_tol = 1e-3;
};

/// classify -> find criticals -> trace -> assemble -> verify; never drops a
/// failed stage silently.  On the quadric the certified object is the base
/// sphere; degenerate critical circles on CP1 are verified as cycles.
VerificationReport count_sbs(const Section& s, const PipelineOptions& opt = {});

// --- family scans ------------------------------------------------------------

struct ScanConfig {
  Model model;
  int samples = 100;
  std::uint64_t seed = 0;
  double disc_threshold = 1e-3;  // |discriminant| genericity filter
  // optional 1-parameter path; when set, samples interpolate from->to
  std::optional<std::vector<cplx>> path_from;
  std::optional<std::vector<cplx>> path_to;
  int threads = 1;
  PipelineOptions pipeline{};
};

struct ScanSample {
  int index = 0;
  std::vector<cplx> coeffs;
  SectionClass classification = SectionClass::Generic;
  double disc_abs = 0;
  bool near_discriminant = false;
  int count = 0;
  std::vector<std::string> flags;
};

struct ScanReport {
  ScanConfig config;
  std::vector<ScanSample> results;
  std::map<int, int> histogram;  // over generic samples only
  int generic_samples = 0;
  int near_discriminant = 0;
  bool invariant = false;          // all generic counts equal
  int invariant_count = -1;
  std::vector<std::string> warnings;
};

ScanReport scan_moduli(const ScanConfig& cfg);

/// Hausdorff distance between two cycle polylines in the chordal metric.
double cycle_hausdorff(const Model& m, const Cycle& a, const Cycle& b);

}  // namespace sbs
