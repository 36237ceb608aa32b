#include "tsfbp/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsfbp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double total_enthalpy_flux_term(const UniformState& s, const GasLaw& gas) {
  // E + p/rho with E = |u|^2/2 + p/((gamma-1) rho)
  return 0.5 * s.u.norm_sq() + gas.gamma * s.p / ((gas.gamma - 1.0) * s.rho);
}

/// Bisection root of a scalar function on a bracketing interval.
double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// All sign-change roots of f on a uniform n-point scan of [lo, hi].
std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi, int n) {
  std::vector<double> roots;
  double prev = f(lo);
  double xprev = lo;
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double val = f(x);
    if (std::isfinite(prev) && std::isfinite(val) && (prev < 0.0) != (val < 0.0))
      roots.push_back(bisect(f, xprev, x));
    prev = val;
    xprev = x;
  }
  return roots;
}

}  // namespace

double constant_state_density(const PseudoPotentialState& s, const GasLaw& gas) {
  const double gm1 = gas.gamma - 1.0;
  const double rad = gas.bernoulli - gm1 * s.bernoulli_arg();
  if (rad <= 0.0) throw std::domain_error("constant_state_density: cavitated state");
  return std::pow(rad, 1.0 / gm1);
}

double constant_state_sonic(const PseudoPotentialState& s, const GasLaw& gas) {
  return std::pow(constant_state_density(s, gas), 0.5 * (gas.gamma - 1.0));
}

Vec4 rh_residual_steady(const UniformState& up, const UniformState& down, double slope,
                        const GasLaw& gas) {
  up.validate();
  down.validate();
  auto jump = [&](auto f) { return f(down) - f(up); };
  const double m1 = jump([](const UniformState& s) { return s.rho * s.u.x; });
  const double m2 = jump([](const UniformState& s) { return s.rho * s.u.y; });
  const double px = jump([](const UniformState& s) { return s.rho * s.u.x * s.u.x + s.p; });
  const double pxy = jump([](const UniformState& s) { return s.rho * s.u.x * s.u.y; });
  const double py = jump([](const UniformState& s) { return s.rho * s.u.y * s.u.y + s.p; });
  const double e1 = jump([&](const UniformState& s) { return s.rho * s.u.x * total_enthalpy_flux_term(s, gas); });
  const double e2 = jump([&](const UniformState& s) { return s.rho * s.u.y * total_enthalpy_flux_term(s, gas); });
  return {slope * m1 - m2, slope * px - pxy, slope * pxy - py, slope * e1 - e2};
}

double rh_residual_steady_max(const UniformState& up, const UniformState& down, double slope,
                              const GasLaw& gas) {
  const Vec4 r = rh_residual_steady(up, down, slope, gas);
  double m = 0.0;
  for (double v : r) m = std::max(m, std::fabs(v));
  return m;
}

double rh_residual_steady_normalized(const UniformState& up, const UniformState& down, double slope,
                                     const GasLaw& gas) {
  if (!std::isfinite(slope)) {
    // Vertical shock: the conditions collapse to continuity of the x1-fluxes.
    auto jump = [&](auto f) { return f(down) - f(up); };
    const double m = jump([](const UniformState& s) { return s.rho * s.u.x; });
    const double px = jump([](const UniformState& s) { return s.rho * s.u.x * s.u.x + s.p; });
    const double pxy = jump([](const UniformState& s) { return s.rho * s.u.x * s.u.y; });
    const double e = jump([&](const UniformState& s) {
      return s.rho * s.u.x * total_enthalpy_flux_term(s, gas);
    });
    return std::max({std::fabs(m), std::fabs(px), std::fabs(pxy), std::fabs(e)});
  }
  return rh_residual_steady_max(up, down, slope, gas) / std::sqrt(1.0 + slope * slope);
}

double polar_ratio_normal(const UniformState& up, const GasLaw& gas) {
  const double M = up.mach(gas);
  return (gas.gamma + 1.0) * M * M / ((gas.gamma - 1.0) * M * M + 2.0);
}

PolarPoint polar_point_at_ratio(const UniformState& up, const GasLaw& gas, double r) {
  up.validate();
  const double M = up.mach(gas);
  if (!(M > 1.0)) throw std::domain_error("shock polar: upstream must be supersonic");
  const double rH = polar_ratio_normal(up, gas);
  if (!(r > 1.0) || r > rH * (1.0 + 1e-13))
    throw std::domain_error("shock polar: density ratio outside (1, r_H]");
  r = std::min(r, rH);

  const double g = gas.gamma;
  const double q = up.speed();
  const double c = up.sonic(gas);
  const double Mn2 = 2.0 * r / ((g + 1.0) - (g - 1.0) * r);
  const double un = std::sqrt(Mn2) * c;          // upstream normal speed
  const double sinb = std::min(1.0, un / q);
  const double beta = std::asin(sinb);           // shock angle from the upstream flow
  const double ut = q * std::cos(beta);          // tangential speed, preserved
  const double un2 = un / r;
  const double p2 = up.p * (1.0 + 2.0 * g / (g + 1.0) * (Mn2 - 1.0));
  const double rho2 = up.rho * r;
  const double theta = beta - std::atan2(un2, ut);  // flow deflection

  // Rotate back: upstream flow direction defines the x'-axis.
  const Vec2 ed = up.u.normalized();
  const double q2 = std::hypot(ut, un2);
  const Vec2 u2 = q2 * Vec2{ed.x * std::cos(theta) - ed.y * std::sin(theta),
                            ed.x * std::sin(theta) + ed.y * std::cos(theta)};

  PolarPoint pt;
  pt.state = UniformState{u2, p2, rho2};
  pt.density_ratio = r;
  pt.flow_angle = theta;
  // Shock direction in the lab frame: beta measured from the upstream flow.
  const double ang = std::atan2(ed.y, ed.x) + beta;
  pt.slope = (std::fabs(std::cos(ang)) < 1e-14) ? std::numeric_limits<double>::infinity()
                                                : std::tan(ang);
  const double c2 = pt.state.sonic(gas);
  pt.regime = classify_regime(c2 * c2 - q2 * q2, 1e-12);
  pt.rh_residual = rh_residual_steady_normalized(up, pt.state, pt.slope, gas);
  return pt;
}

std::vector<PolarPoint> shock_polar_steady(const UniformState& up, const GasLaw& gas, int n) {
  if (n < 8) throw std::domain_error("shock_polar_steady: need n >= 8 samples");
  const double rH = polar_ratio_normal(up, gas);
  std::vector<PolarPoint> polar;
  polar.reserve(n);
  // From H (normal shock, r = rH) to Q (zero strength, r -> 1).
  for (int i = 0; i < n; ++i) {
    const double f = double(i) / (n - 1);
    const double r = rH + (1.0 + 1e-9 - rH) * f;
    polar.push_back(polar_point_at_ratio(up, gas, std::clamp(r, 1.0 + 1e-9, rH)));
  }
  return polar;
}

namespace {

double flow_angle_at_ratio(const UniformState& up, const GasLaw& gas, double r) {
  return polar_point_at_ratio(up, gas, r).flow_angle;
}

}  // namespace

CriticalAngles critical_angles_steady(const UniformState& up, const GasLaw& gas) {
  const double rH = polar_ratio_normal(up, gas);
  const double lo = 1.0 + 1e-9, hi = rH - 1e-12;
  // Golden-section maximization of the flow angle.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = flow_angle_at_ratio(up, gas, x1), f2 = flow_angle_at_ratio(up, gas, x2);
  while (b - a > 1e-13 * rH) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = flow_angle_at_ratio(up, gas, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = flow_angle_at_ratio(up, gas, x1);
    }
  }
  CriticalAngles ca;
  ca.convention = CriticalAngles::Convention::Steady;
  ca.detachment = flow_angle_at_ratio(up, gas, 0.5 * (a + b));

  // Sonic point: downstream |u| = c, unique on the polar.
  auto sonic_margin = [&](double r) {
    const PolarPoint p = polar_point_at_ratio(up, gas, r);
    return p.regime.margin;
  };
  const double r_s = bisect(sonic_margin, lo, hi);
  ca.sonic = flow_angle_at_ratio(up, gas, r_s);
  return ca;
}

WedgePair wedge_states(const UniformState& up, const GasLaw& gas, double theta_w) {
  const CriticalAngles ca = critical_angles_steady(up, gas);
  if (!(theta_w > 0.0) || theta_w >= ca.detachment)
    throw std::domain_error("wedge_states: flow detaches, theta_w >= theta_d = " +
                            std::to_string(ca.detachment));
  const double rH = polar_ratio_normal(up, gas);
  // Locate the maximizing ratio, then bisect on each side.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1.0 + 1e-9, b = rH - 1e-12;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = flow_angle_at_ratio(up, gas, x1), f2 = flow_angle_at_ratio(up, gas, x2);
  while (b - a > 1e-12 * rH) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = flow_angle_at_ratio(up, gas, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = flow_angle_at_ratio(up, gas, x1);
    }
  }
  const double r_peak = 0.5 * (a + b);
  auto offset = [&](double r) { return flow_angle_at_ratio(up, gas, r) - theta_w; };
  const double r_weak = bisect(offset, 1.0 + 1e-9, r_peak);
  const double r_strong = bisect(offset, r_peak, rH - 1e-12);
  WedgePair pair;
  pair.weak = polar_point_at_ratio(up, gas, r_weak);
  pair.strong = polar_point_at_ratio(up, gas, r_strong);
  return pair;
}

std::pair<double, double> rh_residual_selfsim(const PhaseSampler& inner, const PhaseSampler& outer,
                                              const Vec2& point, const Vec2& normal,
                                              const GasLaw& gas) {
  const PhaseSample a = inner(point);
  const PhaseSample b = outer(point);
  const double rho_a = density_selfsim(a.grad.norm_sq(), a.value, gas);
  const double rho_b = density_selfsim(b.grad.norm_sq(), b.value, gas);
  return {rho_a * a.grad.dot(normal) - rho_b * b.grad.dot(normal), a.value - b.value};
}

IncidentShockData incident_shock(double rho0, double rho1, const GasLaw& gas) {
  gas.validate();
  if (!(rho0 > 0.0) || !(rho1 > rho0))
    throw std::domain_error("incident_shock: entropy requires rho1 > rho0 > 0");
  const double gm1 = gas.gamma - 1.0;
  IncidentShockData d;
  d.c0 = std::pow(rho0, 0.5 * gm1);
  d.c1 = std::pow(rho1, 0.5 * gm1);
  d.u1 = (rho1 - rho0) *
         std::sqrt(2.0 * (d.c1 * d.c1 - d.c0 * d.c0) / (gm1 * (rho1 * rho1 - rho0 * rho0)));
  d.xi1_0 = rho1 * d.u1 / (rho1 - rho0);
  return d;
}

PseudoPotentialState reflection_phi0() { return PseudoPotentialState{{0.0, 0.0}, 0.0}; }

PseudoPotentialState reflection_phi1(const IncidentShockData& inc) {
  // phi1 = -|xi|^2/2 + u1 (xi1 - xi1_0)
  return PseudoPotentialState{{inc.u1, 0.0}, -inc.u1 * inc.xi1_0};
}

WallReflection wall_reflection(double rho_ahead, double v_n, double B0, const GasLaw& gas) {
  if (!(rho_ahead > 0.0) || !(v_n > 0.0))
    throw std::domain_error("wall_reflection: need rho_ahead > 0 and v_n > 0");
  const double gm1 = gas.gamma - 1.0;
  (void)B0;  // the closure below is B0-independent: it only uses density differences
  auto closure = [&](double rho2) {
    const double s = rho_ahead * v_n / (rho2 - rho_ahead);
    return std::pow(rho2, gm1) - std::pow(rho_ahead, gm1) - gm1 * (0.5 * v_n * v_n + s * v_n);
  };
  double hi = rho_ahead * 2.0;
  while (closure(hi) < 0.0) hi *= 2.0;
  const double rho2 = bisect(closure, rho_ahead * (1.0 + 1e-14), hi);
  WallReflection w;
  w.rho_behind = rho2;
  w.standoff = rho_ahead * v_n / (rho2 - rho_ahead);
  return w;
}

NormalReflectionData normal_reflection(double rho0, double rho1, const GasLaw& gas) {
  const IncidentShockData inc = incident_shock(rho0, rho1, gas);
  GasLaw g = gas;
  g.bernoulli = std::pow(rho0, gas.gamma - 1.0);
  const WallReflection w = wall_reflection(rho1, inc.u1, g.bernoulli, g);
  NormalReflectionData d;
  d.rho2 = w.rho_behind;
  d.xi_bar = -w.standoff;
  return d;
}

namespace {

struct State2Solve {
  GasLaw gas;       // carries B0 = rho0^{gamma-1}
  double rho1, u1;  // state (1)
  Vec2 P0, tau;
  double aP0;

  double density(double q2) const {
    const double rad = gas.bernoulli - (gas.gamma - 1.0) * (0.5 * q2 * q2 - q2 * aP0);
    if (rad <= 0.0) return -1.0;
    return std::pow(rad, 1.0 / (gas.gamma - 1.0));
  }
  /// Mass-flux mismatch across S1 at P0 as a function of the state-2 speed.
  double flux_mismatch(double q2) const {
    const double rho2 = density(q2);
    if (rho2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const Vec2 u1v{u1, 0.0};
    const Vec2 v2 = q2 * tau;
    const Vec2 d = u1v - v2;
    const double nd = d.norm();
    if (nd < 1e-15) return std::numeric_limits<double>::quiet_NaN();
    const Vec2 nu = (1.0 / nd) * d;
    return rho2 * (v2 - P0).dot(nu) - rho1 * (u1v - P0).dot(nu);
  }
};

State2Solve make_state2_solve(double rho0, double rho1, const GasLaw& gas, double theta_w) {
  const IncidentShockData inc = incident_shock(rho0, rho1, gas);
  State2Solve s;
  s.gas = gas;
  s.gas.bernoulli = std::pow(rho0, gas.gamma - 1.0);
  s.rho1 = rho1;
  s.u1 = inc.u1;
  s.tau = {std::cos(theta_w), std::sin(theta_w)};
  s.P0 = {inc.xi1_0, inc.xi1_0 * std::tan(theta_w)};
  s.aP0 = s.P0.norm();
  return s;
}

std::vector<double> state2_speed_roots(const State2Solve& s) {
  const double gm1 = s.gas.gamma - 1.0;
  // Radicand positive for q2 in [0, qmax).
  const double qmax = s.aP0 + std::sqrt(s.aP0 * s.aP0 + 2.0 * s.gas.bernoulli / gm1) - 1e-10;
  auto f = [&](double q) { return s.flux_mismatch(q); };
  return scan_roots(f, 1e-10, qmax, 6000);
}

}  // namespace

ReflectionLocalData selfsim_state2(double rho0, double rho1, const GasLaw& gas, double theta_w) {
  if (!(theta_w > 0.0) || !(theta_w < 0.5 * kPi + 1e-14))
    throw std::domain_error("selfsim_state2: theta_w must lie in (0, pi/2]");
  const IncidentShockData inc = incident_shock(rho0, rho1, gas);
  ReflectionLocalData out;
  out.xi1_0 = inc.xi1_0;
  out.u1 = inc.u1;
  out.c0 = inc.c0;
  out.c1 = inc.c1;

  if (std::fabs(theta_w - 0.5 * kPi) < 1e-14) {
    // Exact normal-reflection case; P0 recedes to infinity.
    const NormalReflectionData nr = normal_reflection(rho0, rho1, gas);
    PseudoPotentialState st2{{0.0, 0.0}, inc.u1 * (nr.xi_bar - inc.xi1_0)};
    out.state2_weak = st2;
    out.state2_strong = st2;
    out.rho2_weak = out.rho2_strong = nr.rho2;
    out.reflection_point = {inc.xi1_0, std::numeric_limits<double>::infinity()};
    return out;
  }

  const State2Solve s = make_state2_solve(rho0, rho1, gas, theta_w);
  const std::vector<double> roots = state2_speed_roots(s);
  std::vector<std::pair<double, double>> admissible;  // (rho2, q2)
  for (double q2 : roots) {
    const double r2 = s.density(q2);
    if (r2 > rho1) admissible.emplace_back(r2, q2);
  }
  if (admissible.size() < 2)
    throw std::domain_error("selfsim_state2: no regular reflection, theta_w below theta_d = " +
                            std::to_string(selfsim_critical_angles(rho0, rho1, gas).detachment));
  std::sort(admissible.begin(), admissible.end());
  const auto mk = [&](double q2) {
    return PseudoPotentialState{q2 * s.tau, -q2 * s.aP0};
  };
  out.rho2_weak = admissible.front().first;
  out.state2_weak = mk(admissible.front().second);
  out.rho2_strong = admissible.back().first;
  out.state2_strong = mk(admissible.back().second);
  out.reflection_point = s.P0;
  return out;
}

CriticalAngles selfsim_critical_angles(double rho0, double rho1, const GasLaw& gas) {
  if (!(rho1 > rho0)) throw std::domain_error("selfsim_critical_angles: need rho1 > rho0");
  auto solvable = [&](double th) {
    const State2Solve s = make_state2_solve(rho0, rho1, gas, th);
    int count = 0;
    for (double q2 : state2_speed_roots(s))
      if (s.density(q2) > rho1) ++count;
    return count >= 2;
  };
  double lo = 1e-3, hi = 0.5 * kPi - 1e-3;
  if (solvable(lo)) lo = 1e-6;
  while (!solvable(hi)) hi -= 1e-3;
  // Bisection for the solvability edge (theta_d) to 1e-8 rad.
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (solvable(mid))
      hi = mid;
    else
      lo = mid;
  }
  CriticalAngles ca;
  ca.convention = CriticalAngles::Convention::SelfSimilar;
  ca.detachment = hi;

  // Sonic angle: weak state exactly sonic at P0.
  auto weak_margin = [&](double th) {
    const ReflectionLocalData d = selfsim_state2(rho0, rho1, gas, th);
    const double c2 = std::pow(d.rho2_weak, 0.5 * (gas.gamma - 1.0));
    const double spd = (d.state2_weak.v - d.reflection_point).norm();
    return spd - c2;  // > 0: supersonic at P0
  };
  double slo = ca.detachment + 1e-6, shi = 0.5 * kPi - 1e-6;
  ca.sonic = bisect(weak_margin, slo, shi, 120);
  return ca;
}

PotentialWedgePair potential_wedge_states(double rho0, double u10, const GasLaw& gas, double theta_w) {
  gas.validate();
  const double gm1 = gas.gamma - 1.0;
  const double c0 = std::pow(rho0, 0.5 * gm1);
  if (!(u10 > c0)) throw std::domain_error("potential_wedge_states: upstream must be supersonic");
  const Vec2 u0{u10, 0.0};
  const Vec2 tau{std::cos(theta_w), std::sin(theta_w)};
  auto dens = [&](double q) {
    const double rad = std::pow(rho0, gm1) + 0.5 * gm1 * (u10 * u10 - q * q);
    return rad > 0.0 ? std::pow(rad, 1.0 / gm1) : -1.0;
  };
  auto mismatch = [&](double q) {
    const double rho = dens(q);
    if (rho <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const Vec2 u1 = q * tau;
    const Vec2 d = u0 - u1;
    const double nd = d.norm();
    if (nd < 1e-15) return std::numeric_limits<double>::quiet_NaN();
    const Vec2 nu = (1.0 / nd) * d;
    return rho * u1.dot(nu) - rho0 * u0.dot(nu);
  };
  std::vector<double> roots = scan_roots(mismatch, 1e-9, u10 - 1e-12, 6000);
  std::vector<double> entropic;
  for (double q : roots)
    if (dens(q) > rho0) entropic.push_back(q);
  if (entropic.size() < 2)
    throw std::domain_error("potential_wedge_states: no attached oblique state, theta_w at or beyond detachment");
  std::sort(entropic.begin(), entropic.end());
  auto mk = [&](double q) {
    PotentialPolarPoint p;
    p.u = q * tau;
    p.rho = dens(q);
    const double c = std::pow(p.rho, 0.5 * gm1);
    p.regime = classify_regime(c * c - q * q, 1e-12);
    p.flux_residual = std::fabs(mismatch(q));
    return p;
  };
  PotentialWedgePair pair;
  pair.weak = mk(entropic.back());    // weaker shock: speed closer to upstream
  pair.strong = mk(entropic.front());
  return pair;
}

CriticalAngles potential_critical_angles(double rho0, double u10, const GasLaw& gas) {
  auto solvable = [&](double th) {
    try {
      potential_wedge_states(rho0, u10, gas, th);
      return true;
    } catch (const std::domain_error&) {
      return false;
    }
  };
  double lo = 1e-4, hi = 0.5 * kPi - 1e-4;
  while (!solvable(lo)) lo *= 0.5;
  while (solvable(hi)) hi = 0.5 * (hi + 0.5 * kPi);
  double a = lo, b = hi;
  while (b - a > 1e-9) {
    const double mid = 0.5 * (a + b);
    if (solvable(mid))
      a = mid;
    else
      b = mid;
  }
  CriticalAngles ca;
  ca.convention = CriticalAngles::Convention::Steady;
  ca.detachment = a;
  auto weak_margin = [&](double th) {
    const PotentialWedgePair p = potential_wedge_states(rho0, u10, gas, th);
    return p.weak.regime.margin;  // c^2 - q^2, < 0 when supersonic
  };
  ca.sonic = bisect(weak_margin, 1e-6, a - 1e-8, 120);
  return ca;
}

PrandtlStates prandtl_states(double rho0, double u10, const GasLaw& gas, double theta_w) {
  const double gm1 = gas.gamma - 1.0;
  const double c0 = std::pow(rho0, 0.5 * gm1);
  if (!(u10 > c0)) throw std::domain_error("prandtl_states: upstream must be supersonic");
  if (!(theta_w > 0.0) || !(theta_w < 0.5 * kPi))
    throw std::domain_error("prandtl_states: theta_w must lie in (0, pi/2)");
  const double B0 = std::pow(rho0, gm1) + 0.5 * gm1 * u10 * u10;

  PrandtlStates out;
  out.rho0 = rho0;

  // Wedge frame: face along +x, incoming flow rotated down by theta_w.
  const Vec2 u0{u10 * std::cos(theta_w), -u10 * std::sin(theta_w)};
  out.phi0 = PseudoPotentialState{u0, 0.0};

  // Oblique state (1): weak root of the potential polar, deflected onto the face.
  const PotentialWedgePair pol = potential_wedge_states(rho0, u10, gas, theta_w);
  const double q1 = pol.weak.u.norm();
  out.phi1 = PseudoPotentialState{{q1, 0.0}, 0.0};
  out.rho1 = pol.weak.rho;
  out.c1 = std::pow(out.rho1, 0.5 * gm1);
  out.vertex_supersonic = (q1 > out.c1);

  // Normal-shock state (2): 1-D reflection of the wall-normal inflow component.
  const double vn = u10 * std::sin(theta_w);
  const WallReflection wr = wall_reflection(rho0, vn, B0, gas);
  out.rho2 = wr.rho_behind;
  out.c2 = std::pow(out.rho2, 0.5 * gm1);
  out.standoff = wr.standoff;
  // S1 = {y = standoff}; jump parallel to the wall normal, tangential speed kept.
  out.phi2 = PseudoPotentialState{{u10 * std::cos(theta_w), 0.0}, -vn * wr.standoff};

  GasLaw check = gas;
  check.bernoulli = B0;
  // Constant-state densities must re-derive from (1-o); guards the offsets above.
  const double r1 = constant_state_density(out.phi1, check);
  const double r2 = constant_state_density(out.phi2, check);
  if (std::fabs(r1 - out.rho1) > 1e-9 || std::fabs(r2 - out.rho2) > 1e-9)
    throw std::logic_error("prandtl_states: density bookkeeping failure");
  return out;
}

SonicArcData sonic_arc(const PseudoPotentialState& state, double rho, const GasLaw& gas,
                       const Line& cutter, ArcPick pick) {
  SonicArcData arc;
  arc.center = state.v;
  arc.radius = std::pow(rho, 0.5 * (gas.gamma - 1.0));
  const double d = cutter.signed_distance(arc.center);
  if (std::fabs(d) > arc.radius * (1.0 + 1e-13))
    throw std::domain_error("sonic_arc: cutter does not intersect the sonic circle");
  const double half = std::sqrt(std::max(0.0, arc.radius * arc.radius - d * d));
  const Vec2 foot = arc.center - d * cutter.normal();
  arc.end0 = foot - half * cutter.dir;
  arc.end1 = foot + half * cutter.dir;
  arc.angle0 = std::atan2(arc.end0.y - arc.center.y, arc.end0.x - arc.center.x);
  arc.angle1 = std::atan2(arc.end1.y - arc.center.y, arc.end1.x - arc.center.x);
  double span = arc.angle1 - arc.angle0;
  if (pick == ArcPick::CcwFrom0) {
    while (span < 0.0) span += 2.0 * kPi;
  } else {
    while (span > 0.0) span -= 2.0 * kPi;
  }
  arc.span = span;
  return arc;
}

EntropyVerdict entropy_check(double up_density, double down_density) {
  if (!(up_density > 0.0) || !(down_density > 0.0))
    throw std::domain_error("entropy_check: densities must be positive");
  EntropyVerdict v;
  v.margin = down_density - up_density;
  v.ok = v.margin > 0.0;
  return v;
}

}  // namespace tsfbp
