#pragma once

#include <array>
#include <string>
#include <vector>

#include "sbs/critical.hpp"

namespace sbs {

enum class FlowDirection { Ascending, Descending };
enum class Terminus { Critical, DivisorEscape, Budget, Stationary };

/// A traced gradient-flow trajectory: recorded points with the unit flow
/// tangent and phi value at each sample.
struct Trajectory {
  std::vector<Point> points;
  std::vector<Eigen::Vector4d> tangents;  // unit chart direction of motion
  std::vector<double> phis;
  FlowDirection direction = FlowDirection::Descending;
  Terminus terminus = Terminus::Budget;
  int terminus_critical = -1;  // index into the target list
  double arc_length = 0;       // chart arc length accumulated across charts
};

struct FlowOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  double h_max = 0.05;             // max chart step (also the recording density)
  double capture_radius = 1e-8;    // chordal, around target critical points
  double stationary_grad = 1e-11;  // g-norm of grad: degenerate-limit stop
  double divisor_tube_rel = 1e-12;
  int max_steps = 200000;
};

/// Adaptive RK45 integration of +-grad phi_s with chart switching at
/// kChartRadius; halts on capture, divisor-tube entry, a stationary limit, or
/// budget exhaustion.  Monotonicity of phi is verified at every sample.
Trajectory integrate_flow(const Section& s, const Point& start, FlowDirection dir,
                          const std::vector<CriticalPoint>& targets,
                          const FlowOptions& opt = {});

/// A separatrix: a finite trajectory emanating from a saddle along a negative
/// eigen-direction.  When the two opposite launches of one eigenline end at
/// distinct sinks they are joined into a single end-to-end curve through the
/// saddle (the points run sink_a -> saddle -> sink_b); otherwise each launch
/// is kept as its own saddle-to-sink curve.
struct Separatrix {
  std::vector<Point> points;
  std::vector<Eigen::Vector4d> tangents;  // unit curve tangents along `points`
  std::vector<double> phis;
  int saddle = -1;  // critical index
  int end_a = -1, end_b = -1;
  Eigen::Vector4d tangent_a = Eigen::Vector4d::Zero();  // unit curve tangents at the endpoints,
  Eigen::Vector4d tangent_b = Eigen::Vector4d::Zero();  // in the endpoint's chart
  double arc_length = 0;
  bool merged = false;
};

struct SeparatrixSet {
  std::vector<Separatrix> separatrices;
  std::vector<std::string> warnings;
};

inline constexpr double kLaunchOffset = 1e-5;

SeparatrixSet trace_separatrices(const Section& s, const std::vector<CriticalPoint>& criticals,
                                 const FlowOptions& opt = {});

/// The quadric base-set sphere: the closure of the 2-parameter family of
/// descending trajectories from an index-2 saddle, stitched into a closed
/// triangulated mesh with the saddle and the sink as cone points.
struct SphereMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  bool closed = false;
  int euler_characteristic = 0;
  double omega_residual = 0;        // max |omega(e1,e2)| / area over triangles
  double calibration_residual = 0;  // max |Im rho(unit central secant)| over vertices
  double mean_triangle_area = 0;
  double max_omega_raw = 0;  // max |omega(e1,e2)| (unnormalized)
};

struct MeshOptions {
  int n_theta = 256;
  int n_levels = 192;
  double refine_gap = 0.05;  // chordal gap between adjacent trajectories triggering refinement
  int max_theta = 2048;
  FlowOptions flow{.h_max = 0.01};
};

/// Pre: saddle has Morse index 2 with omega-isotropic negative subspace.
/// Throws IntegrationError naming theta if a trajectory misses the sink.
SphereMesh reconstruct_base_sphere(const Section& s, const CriticalPoint& saddle,
                                   const CriticalPoint& sink, const MeshOptions& opt = {});

}  // namespace sbs
