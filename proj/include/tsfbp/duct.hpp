#pragma once

#include <functional>

#include "tsfbp/elliptic.hpp"
#include "tsfbp/fbp.hpp"
#include "tsfbp/states.hpp"

namespace tsfbp {

/// Analytic upstream phase for the duct: value and gradient at a point.
using AnalyticPhase = std::function<PhaseSample(const Vec2&)>;

struct DuctConfig {
  GasLaw gas{2.0, 1.0};
  double q_minus = 1.0;
  double sigma = 0.0;  // perturbation amplitude
  /// Perturbation of phi^- relative to q^- x2, already scaled by sigma;
  /// must have zero wall-normal derivative at x1 = 0, 1. Null means none.
  AnalyticPhase perturbation;
  int n1 = 65, n2 = 65;
  IterationConfig iteration;
  SolveOptions inner;
};

/// Exact transonic background: q+ = conjugate of q-, flat shock at x2 = 0.
struct DuctBackground {
  double q_plus = 0.0, q_minus = 0.0;
  double phi0(const Vec2& x) const { return std::min(q_plus * x.y, q_minus * x.y); }
};
DuctBackground duct_background(double q_minus, const GasLaw& gas);

struct DuctSolution {
  DuctConfig config;
  DuctBackground background;
  TruncatedGasLaw truncation;
  IterationState state;       // boundary graph (T = x1) + subsonic field phi
  MappedDomain domain;        // mapped subsonic region at the converged boundary
  AnalyticPhase phi_minus;    // upstream phase
  int outer_iterations = 0;

  /// RH flux residual along the converged shock, per knot.
  std::vector<double> rh_residuals() const;
  /// u = phi^- - phi at the grid nodes.
  Field u_field() const;
  bool truncation_active() const;
};

DuctSolution duct_solve(const DuctConfig& config);

/// The upstream phase phi^- of a config (background plus perturbation).
AnalyticPhase duct_phi_minus(const DuctConfig& config, const DuctBackground& bg);

/// Domain of the subsonic region above a boundary graph f: x2 in (f(x1), 1).
MappedDomain duct_domain(const FreeBoundaryGraph& f, int n1, int n2);

}  // namespace tsfbp
