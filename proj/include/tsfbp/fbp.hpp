#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tsfbp/geometry.hpp"
#include "tsfbp/grid.hpp"

namespace tsfbp {

/// Orthonormal frame of a boundary graph: S runs along e, T along eperp.
struct Frame {
  Vec2 e{0.0, 1.0}, eperp{1.0, 0.0};
  Vec2 to_phys(double S, double T) const { return S * e + T * eperp; }
  double S_of(const Vec2& p) const { return p.dot(e); }
  double T_of(const Vec2& p) const { return p.dot(eperp); }
};

enum class EndCondition { Free, Pinned, ZeroSlope };

/// The free boundary as a single-valued graph S = f(T) with monotone cubic
/// interpolation between knots.
struct FreeBoundaryGraph {
  Frame frame;
  std::vector<double> T, f;
  EndCondition end0 = EndCondition::Free, end1 = EndCondition::Free;

  double eval(double t) const;
  double deriv(double t) const;
  Vec2 point(double t) const { return frame.to_phys(eval(t), t); }
  Vec2 knot_point(int k) const { return frame.to_phys(f[k], T[k]); }
  int size() const { return int(T.size()); }
  double lipschitz() const;
  /// Interpolant slopes (Fritsch-Carlson monotone cubic).
  std::vector<double> slopes() const;
};

/// Unit normal (-f', 1)/sqrt(1+f'^2) in the graph frame, mapped to physical
/// coordinates. Points toward increasing S, i.e. into {S > f}.
Vec2 boundary_normal(const FreeBoundaryGraph& g, double t);
Vec2 boundary_tangent(const FreeBoundaryGraph& g, double t);

/// Level-set sampler: value and directional derivative along the frame's
/// S-direction at a physical point.
struct LevelSample {
  double value = 0.0;
  double dS = 0.0;
};
using LevelSampler = std::function<LevelSample(const Vec2&)>;

/// Root of w(S, T) = 0 along each e-line through the knots, by monotone
/// bisection plus a Newton polish. `floor` is the nondegeneracy bound on
/// the S-derivative of w; violation throws, naming the worst knot.
FreeBoundaryGraph extract_boundary(const LevelSampler& w, const Frame& frame,
                                   const std::vector<double>& knots,
                                   const std::vector<double>& s_guess, double floor,
                                   double s_halfwidth);

struct IterationConfig {
  double theta_relax = 0.7;
  double tol_boundary = 1e-9;
  double tol_field = 1e-9;
  int max_outer = 80;
  double nondeg_floor = 1e-6;
  bool adapt_damping = true;
  /// Smooth the boundary increment with a [1/4, 1/2, 1/4] stencil before
  /// damping; leaves fixed points unchanged but stabilizes grid-scale modes
  /// of the update map.
  bool filter_increment = true;
  bool snapshots = false;
};

struct OuterRecord {
  int iteration = 0;
  double boundary_delta = 0.0;
  double field_residual = 0.0;
  double damping = 0.0;
};

struct IterationState {
  FreeBoundaryGraph boundary;
  Field field;
  std::vector<OuterRecord> history;
  bool converged = false;
  bool nondegeneracy_hit = false;
  bool cutoff_active = false;
};

/// Problem adapter consumed by the generic driver: rebuild the domain and
/// solve the interior problem for a given boundary, then propose the updated
/// boundary from the solved field.
struct FixedPointProblem {
  std::function<Field(const FreeBoundaryGraph&, const Field& prev)> solve_interior;
  std::function<FreeBoundaryGraph(const FreeBoundaryGraph&, const Field&)> propose_boundary;
  /// Optional interior residual diagnostic of the current iterate.
  std::function<double(const FreeBoundaryGraph&, const Field&)> interior_residual;
  /// Optional per-iteration snapshot hook.
  std::function<void(int, const IterationState&)> on_iteration;
};

/// Damped fixed-point loop w_{k+1} = (1-theta) w_k + theta u_k over the
/// boundary graph, with the interior re-solved on each new domain.
IterationState drive_fixed_point(const FixedPointProblem& problem, const IterationConfig& config,
                                 IterationState init);

struct ContinuationResult {
  std::vector<double> parameters;
  std::vector<IterationState> states;
  bool complete = false;
  double last_good = 0.0;
};

/// Parameter marching with warm starts; on failure the step is bisected down
/// to `min_step` before aborting with the partial result.
ContinuationResult continuation(
    const std::function<FixedPointProblem(double)>& family,
    const std::function<IterationState(double, const IterationState*)>& initial_state,
    const std::vector<double>& schedule, const IterationConfig& config, double min_step = 1e-4);

}  // namespace tsfbp
