#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "tsfbp/geometry.hpp"
#include "tsfbp/thermo.hpp"

namespace tsfbp {

/// Full Euler state U = (u, p, rho).
struct UniformState {
  Vec2 u;
  double p = 1.0, rho = 1.0;
  void validate() const {
    if (!(p > 0.0) || !(rho > 0.0)) throw std::domain_error("UniformState: need p > 0 and rho > 0");
  }
  double speed() const { return u.norm(); }
  double sonic(const GasLaw& gas) const { return sonic_speed_full_euler(p, rho, gas); }
  double mach(const GasLaw& gas) const { return speed() / sonic(gas); }
};

/// Constant self-similar state: phi(xi) = -|xi|^2/2 + v.xi + offset.
struct PseudoPotentialState {
  Vec2 v;
  double offset = 0.0;
  double value(const Vec2& xi) const { return -0.5 * xi.norm_sq() + v.dot(xi) + offset; }
  Vec2 grad(const Vec2& xi) const { return v - xi; }
  /// (1/2)|Dphi|^2 + phi, constant over xi.
  double bernoulli_arg() const { return 0.5 * v.norm_sq() + offset; }
};

/// Density/sonic speed of a constant state from its xi-independent Bernoulli argument.
double constant_state_density(const PseudoPotentialState& s, const GasLaw& gas);
double constant_state_sonic(const PseudoPotentialState& s, const GasLaw& gas);

struct PolarPoint {
  UniformState state;
  double slope = 0.0;       // shock slope sigma' = tan(beta)
  double flow_angle = 0.0;  // downstream deflection, radians
  FlowRegime regime;
  double rh_residual = 0.0;  // max-norm of the four RH conditions
  double density_ratio = 1.0;
};

struct CriticalAngles {
  double detachment = 0.0;  // theta_w^d
  double sonic = 0.0;       // theta_w^s
  enum class Convention { Steady, SelfSimilar } convention = Convention::Steady;
};

/// Local algebraic data of a regular reflection at P0.
struct ReflectionLocalData {
  double xi1_0 = 0.0;  // incident shock position
  double u1 = 0.0;     // state-(1) velocity
  double c0 = 0.0, c1 = 0.0;
  PseudoPotentialState state2_weak, state2_strong;
  double rho2_weak = 0.0, rho2_strong = 0.0;
  Vec2 reflection_point;  // P0
};

using Vec4 = std::array<double, 4>;

/// The four conditions of the steady RH system, left minus right, for a shock
/// x2 = sigma(x1) of slope `slope`.
Vec4 rh_residual_steady(const UniformState& up, const UniformState& down, double slope,
                        const GasLaw& gas);
double rh_residual_steady_max(const UniformState& up, const UniformState& down, double slope,
                              const GasLaw& gas);
/// Same conditions scaled by 1/sqrt(1+slope^2); finite for vertical shocks
/// (slope = +inf reduces to the plain x1-flux jumps).
double rh_residual_steady_normalized(const UniformState& up, const UniformState& down, double slope,
                                     const GasLaw& gas);

/// Entropy-satisfying branch of the steady polar, sampled from the normal-shock
/// point H to the zero-strength point Q by the downstream density ratio.
std::vector<PolarPoint> shock_polar_steady(const UniformState& up, const GasLaw& gas, int n);

/// Downstream state at a given density ratio r in (1, r_H].
PolarPoint polar_point_at_ratio(const UniformState& up, const GasLaw& gas, double r);
double polar_ratio_normal(const UniformState& up, const GasLaw& gas);  // r_H

struct WedgePair {
  PolarPoint weak, strong;
};
WedgePair wedge_states(const UniformState& up, const GasLaw& gas, double theta_w);
CriticalAngles critical_angles_steady(const UniformState& up, const GasLaw& gas);

/// Value-and-gradient sampler of a pseudo-potential phase.
struct PhaseSample {
  double value;
  Vec2 grad;
};
using PhaseSampler = std::function<PhaseSample(const Vec2&)>;

/// (flux jump, value jump) of the self-similar RH conditions at `point`.
std::pair<double, double> rh_residual_selfsim(const PhaseSampler& inner, const PhaseSampler& outer,
                                              const Vec2& point, const Vec2& normal, const GasLaw& gas);

struct IncidentShockData {
  double xi1_0 = 0.0, u1 = 0.0, c0 = 0.0, c1 = 0.0;
};
/// States (0), (1) across the vertical incident shock, scaled units (B0 = rho0^{gamma-1}).
IncidentShockData incident_shock(double rho0, double rho1, const GasLaw& gas);

/// Pseudo-potentials of states (0) and (1) of the reflection problem.
PseudoPotentialState reflection_phi0();
PseudoPotentialState reflection_phi1(const IncidentShockData& inc);

struct NormalReflectionData {
  double rho2 = 0.0;
  double xi_bar = 0.0;  // reflected-shock position, < 0
};
NormalReflectionData normal_reflection(double rho0, double rho1, const GasLaw& gas);

ReflectionLocalData selfsim_state2(double rho0, double rho1, const GasLaw& gas, double theta_w);
CriticalAngles selfsim_critical_angles(double rho0, double rho1, const GasLaw& gas);

/// One-dimensional wall reflection: uniform state (rho_ahead, v_n towards the
/// wall) reflects into a rest state behind a receding shock at distance s.
struct WallReflection {
  double rho_behind = 0.0;
  double standoff = 0.0;  // shock distance from the wall in self-similar units
};
WallReflection wall_reflection(double rho_ahead, double v_n, double B0, const GasLaw& gas);

/// Steady potential-flow polar (shared-Bernoulli constant states joined by a
/// shock through the origin); used by the Prandtl-Meyer construction.
struct PotentialPolarPoint {
  Vec2 u;
  double rho = 0.0;
  FlowRegime regime;
  double flux_residual = 0.0;
};
struct PotentialWedgePair {
  PotentialPolarPoint weak, strong;
};
PotentialWedgePair potential_wedge_states(double rho0, double u10, const GasLaw& gas, double theta_w);
CriticalAngles potential_critical_angles(double rho0, double u10, const GasLaw& gas);

struct PrandtlStates {
  PseudoPotentialState phi0, phi1, phi2;
  double rho0 = 0.0, rho1 = 0.0, rho2 = 0.0;
  double c1 = 0.0, c2 = 0.0;
  double standoff = 0.0;  // wall distance s of the normal shock S1
  bool vertex_supersonic = false;
};
/// States (0), (1), (2) of the Prandtl-Meyer configuration in the wedge frame
/// (face along +x, flow incoming at -theta_w).
PrandtlStates prandtl_states(double rho0, double u10, const GasLaw& gas, double theta_w);

struct SonicArcData {
  Vec2 center;
  double radius = 0.0;
  Vec2 end0, end1;
  double angle0 = 0.0, angle1 = 0.0;  // polar angles of the endpoints about the center
  double span = 0.0;                  // signed angular span from end0 to end1
};
enum class ArcPick { CcwFrom0, CwFrom0 };
/// Intersection arc of a constant state's sonic circle with a cutting line.
SonicArcData sonic_arc(const PseudoPotentialState& state, double rho, const GasLaw& gas,
                       const Line& cutter, ArcPick pick);

struct EntropyVerdict {
  bool ok = false;
  double margin = 0.0;
};
EntropyVerdict entropy_check(double up_density, double down_density);

}  // namespace tsfbp
