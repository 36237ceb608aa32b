#pragma once

#include <optional>

#include "tsfbp/elliptic.hpp"
#include "tsfbp/fbp.hpp"
#include "tsfbp/states.hpp"

namespace tsfbp {

struct ReflectionConfig {
  GasLaw gas{1.4, 1.0};
  double rho0 = 1.0, rho1 = 2.0;
  double theta_w = 1.45;
  int n1 = 65, n2 = 65;        // outer chart
  int nb1 = 49, nb2 = 49;      // sonic band chart
  double band_frac = 0.35;     // x_b as a fraction of c2
  double overlap_frac = 0.55;  // x_o / x_b
  SonicCutoff cutoff;
  IterationConfig iteration;
  SolveOptions inner;
  int schwarz_sweeps = 3;
  double delta_ell0 = 0.5;     // initial ellipticity floor scale (times h)
  double delta_ell_decay = 0.7;
  double delta_ell_min = 1e-3;
};

/// Fixed local geometry of a regular-reflection run at one wedge angle.
struct ReflectionGeometry {
  GasLaw gas;                 // carries B0 = rho0^{gamma-1}
  double theta_w = 0.0;
  IncidentShockData incident;
  PseudoPotentialState phi0, phi1, phi2;
  double rho2 = 0.0, c2 = 0.0;
  Vec2 O2;       // sonic-circle center of state (2)
  Vec2 P0, P1;   // reflection point (P0 at infinity for normal) and shock/sonic junction
  Vec2 P3;       // wedge vertex (origin)
  Vec2 tau_w, nu_w;
  bool supersonic_type = true;
  Frame frame;   // e = (-1, 0): shock as a graph over T = xi_2
  double T_P1 = 0.0;

  /// Band coordinates of a physical point: x = c2 - r, y = theta - theta_w.
  Vec2 to_band(const Vec2& xi) const;
  Vec2 from_band(const Vec2& xy) const;
};

ReflectionGeometry reflection_geometry(double rho0, double rho1, const GasLaw& gas, double theta_w);

struct ReflectionSolution {
  ReflectionConfig config;
  ReflectionGeometry geom;
  MappedDomain outer;          // xi coordinates
  Field psi_outer;             // psi = phi - phi2 on the outer chart
  MappedDomain band;           // (x, y) sonic-band chart
  Field psi_band;
  IterationState state;        // boundary graph + outer field + history
  bool cutoff_active = false;  // elliptic cutoff/floor still active at the fixed point

  /// psi = phi - phi2 at a physical point inside Omega.
  double psi_at(const Vec2& xi) const;
  Vec2 dpsi_at(const Vec2& xi) const;
  double phi_at(const Vec2& xi) const { return geom.phi2.value(xi) + psi_at(xi); }
  Vec2 dphi_at(const Vec2& xi) const { return geom.phi2.grad(xi) + dpsi_at(xi); }

  double sup_psi() const;
  /// RH flux residual along the converged shock, per knot.
  std::vector<double> rh_residuals() const;
  /// max over the band of psi_x / x (cutoff-removal check).
  double max_psi_x_over_x() const;
};

ReflectionSolution reflection_solve(const ReflectionConfig& config);

/// Continuation in the wedge angle from pi/2 downward; each run warm-starts
/// from the previous shock shape.
std::vector<ReflectionSolution> reflection_schedule(const ReflectionConfig& base,
                                                    const std::vector<double>& angles);

}  // namespace tsfbp
