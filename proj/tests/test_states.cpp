#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsfbp/states.hpp"

using namespace tsfbp;

namespace {

/// 1-D normal-shock oracle: brute-force bisection on the downstream normal
/// speed from the mass/momentum/energy conditions, no Mach-relation shortcuts.
struct NormalShock1D {
  double un2, p2, rho2;
};
NormalShock1D normal_shock_oracle(double rho1, double un1, double p1, const GasLaw& gas) {
  const double m = rho1 * un1;
  auto energy_residual = [&](double un2) {
    const double p2 = p1 + m * (un1 - un2);
    const double rho2 = m / un2;
    return 0.5 * un1 * un1 + gas.gamma * p1 / ((gas.gamma - 1.0) * rho1) -
           (0.5 * un2 * un2 + gas.gamma * p2 / ((gas.gamma - 1.0) * rho2));
  };
  double lo = 1e-6 * un1, hi = un1 * (1.0 - 1e-12);
  double flo = energy_residual(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = energy_residual(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else
      hi = mid;
  }
  const double un2 = 0.5 * (lo + hi);
  return {un2, p1 + m * (un1 - un2), m / un2};
}

PhaseSampler sampler_of(const PseudoPotentialState& s) {
  return [s](const Vec2& xi) { return PhaseSample{s.value(xi), s.grad(xi)}; };
}

}  // namespace

TEST_CASE("steady RH residual: zero jump and 1-D normal shock oracle") {
  GasLaw gas{1.4, 1.0};
  UniformState up{{0.3, 0.7}, 1.3, 0.8};
  for (double slope : {-1.0, 0.0, 2.5}) {
    CHECK(rh_residual_steady_max(up, up, slope, gas) == doctest::Approx(0.0));
  }
  // Flow along +x2 over a horizontal shock (slope 0): the 1-D case in con-RH form.
  const NormalShock1D ns = normal_shock_oracle(1.0, 2.0, 1.0, gas);
  UniformState up2{{0.0, 2.0}, 1.0, 1.0};
  UniformState down2{{0.0, ns.un2}, ns.p2, ns.rho2};
  CHECK(rh_residual_steady_max(up2, down2, 0.0, gas) < 1e-12);
}

TEST_CASE("steady shock polar: endpoints, entropy, residuals") {
  GasLaw gas{1.4, 1.0};
  UniformState up{{2.0 * std::sqrt(1.4), 0.0}, 1.0, 1.0};  // Mach 2
  const auto polar = shock_polar_steady(up, gas, 96);
  REQUIRE(polar.size() == 96);

  // Endpoint H: normal shock; downstream parallel to upstream, oracle density.
  const NormalShock1D ns = normal_shock_oracle(up.rho, up.speed(), up.p, gas);
  const PolarPoint& H = polar.front();
  CHECK(H.state.u.y == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(H.state.rho == doctest::Approx(ns.rho2).epsilon(1e-9));
  CHECK(H.state.u.x == doctest::Approx(ns.un2).epsilon(1e-9));
  CHECK(H.state.p == doctest::Approx(ns.p2).epsilon(1e-9));

  // Endpoint Q: zero strength.
  const PolarPoint& Q = polar.back();
  CHECK((Q.state.u - up.u).norm() < 1e-3);
  CHECK(Q.state.rho == doctest::Approx(up.rho).epsilon(1e-6));

  for (const PolarPoint& p : polar) {
    CHECK(p.rh_residual < 1e-10);
    CHECK(entropy_check(up.rho, p.state.rho).ok);
  }
}

TEST_CASE("steady critical angles and wedge states") {
  GasLaw gas{1.4, 1.0};
  UniformState up{{2.0 * std::sqrt(1.4), 0.0}, 1.0, 1.0};
  const CriticalAngles ca = critical_angles_steady(up, gas);
  CHECK(ca.sonic < ca.detachment);
  // Independent bisection oracle values (gamma = 1.4, Mach 2).
  CHECK(ca.detachment == doctest::Approx(22.9735 * M_PI / 180.0).epsilon(2e-4));
  CHECK(ca.sonic == doctest::Approx(22.7060 * M_PI / 180.0).epsilon(2e-4));

  // Solvable just below the detachment angle, detached just above.
  CHECK_NOTHROW(wedge_states(up, gas, ca.detachment - 1e-4));
  CHECK_THROWS_AS(wedge_states(up, gas, ca.detachment + 1e-4), std::domain_error);

  const WedgePair mid = wedge_states(up, gas, 0.5 * ca.detachment);
  CHECK(mid.weak.state.rho < mid.strong.state.rho);
  CHECK(mid.weak.rh_residual < 1e-10);
  CHECK(mid.strong.rh_residual < 1e-10);
  CHECK(mid.weak.flow_angle == doctest::Approx(0.5 * ca.detachment).epsilon(1e-9));
  CHECK(mid.strong.flow_angle == doctest::Approx(0.5 * ca.detachment).epsilon(1e-9));

  // Mach-wave limit: weak state degenerates toward the upstream state.
  const WedgePair tiny = wedge_states(up, gas, 1e-3);
  CHECK((tiny.weak.state.u - up.u).norm() < 1e-2);

  // Subsonic on both branches between theta_s and theta_d.
  const WedgePair between = wedge_states(up, gas, 0.5 * (ca.sonic + ca.detachment));
  CHECK(between.weak.regime.tag == Regime::Subsonic);
  CHECK(between.strong.regime.tag == Regime::Subsonic);

  // Near-coincidence at the detachment angle.
  const WedgePair close = wedge_states(up, gas, ca.detachment - 1e-8);
  CHECK(std::fabs(close.weak.state.rho - close.strong.state.rho) < 1e-2);

  // Ordering holds across an upstream Mach grid.
  for (double M : {1.6, 2.0, 2.5, 3.0, 4.0}) {
    UniformState u{{M * std::sqrt(1.4), 0.0}, 1.0, 1.0};
    const CriticalAngles c = critical_angles_steady(u, gas);
    CHECK(c.sonic < c.detachment);
    CHECK(c.detachment < 0.5 * M_PI);
  }
}

TEST_CASE("incident shock: RH-consistent values and threshold") {
  GasLaw gas{1.4, 1.0};
  const IncidentShockData inc = incident_shock(1.0, 2.0, gas);
  // Recomputed from the mass-flux + Bernoulli-jump conditions.
  CHECK(inc.u1 == doctest::Approx(0.7297350099871463).epsilon(1e-10));
  CHECK(inc.xi1_0 == doctest::Approx(1.4594700199742925).epsilon(1e-10));
  CHECK(inc.c1 == doctest::Approx(1.148698354997035).epsilon(1e-12));
  CHECK(inc.u1 < inc.c1);
  CHECK_THROWS_AS(incident_shock(2.0, 1.0, gas), std::domain_error);

  // Zero-strength limit.
  const IncidentShockData weak = incident_shock(1.0, 1.0 + 1e-8, gas);
  CHECK(weak.u1 < 1e-7);

  // States (0), (1) satisfy the self-similar RH conditions across xi1 = xi1_0.
  GasLaw g = gas;
  g.bernoulli = 1.0;  // rho0 = 1
  const PseudoPotentialState phi0 = reflection_phi0();
  const PseudoPotentialState phi1 = reflection_phi1(inc);
  for (double xi2 : {0.0, 0.5, 2.0}) {
    const auto [flux, val] = rh_residual_selfsim(sampler_of(phi1), sampler_of(phi0),
                                                 {inc.xi1_0, xi2}, {1.0, 0.0}, g);
    CHECK(std::fabs(flux) < 1e-12);
    CHECK(std::fabs(val) < 1e-12);
  }
  // Identical phases: zero residual.
  const auto [f0, v0] = rh_residual_selfsim(sampler_of(phi1), sampler_of(phi1), {1.0, 1.0},
                                            {0.6, 0.8}, g);
  CHECK(f0 == doctest::Approx(0.0));
  CHECK(v0 == doctest::Approx(0.0));

  // u1 <= c1 iff rho1 below a threshold rho_c; locate by bisection.
  double lo = 1.01, hi = 100.0;
  REQUIRE(incident_shock(1.0, lo, gas).u1 < incident_shock(1.0, lo, gas).c1);
  REQUIRE(incident_shock(1.0, hi, gas).u1 > incident_shock(1.0, hi, gas).c1);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    const IncidentShockData d = incident_shock(1.0, mid, gas);
    (d.u1 < d.c1 ? lo : hi) = mid;
  }
  const double rho_c = 0.5 * (lo + hi);
  CHECK(incident_shock(1.0, rho_c * 0.99, gas).u1 < incident_shock(1.0, rho_c * 0.99, gas).c1);
  CHECK(incident_shock(1.0, rho_c * 1.01, gas).u1 > incident_shock(1.0, rho_c * 1.01, gas).c1);
}

TEST_CASE("normal reflection") {
  GasLaw gas{1.4, 1.0};
  const NormalReflectionData nr = normal_reflection(1.0, 2.0, gas);
  // Frozen from an independent bisection oracle of the same jump conditions.
  CHECK(nr.rho2 == doctest::Approx(3.66687919).epsilon(1e-7));
  CHECK(nr.xi_bar == doctest::Approx(-0.87557037).epsilon(1e-6));
  CHECK(nr.rho2 > 2.0);  // entropy across the reflected shock
  CHECK(nr.xi_bar < 0.0);

  // RH conditions between states (1) and (2) across {xi1 = xi_bar}.
  const IncidentShockData inc = incident_shock(1.0, 2.0, gas);
  GasLaw g = gas;
  g.bernoulli = 1.0;
  const PseudoPotentialState phi1 = reflection_phi1(inc);
  const PseudoPotentialState phi2{{0.0, 0.0}, inc.u1 * (nr.xi_bar - inc.xi1_0)};
  CHECK(constant_state_density(phi2, g) == doctest::Approx(nr.rho2).epsilon(1e-12));
  for (double xi2 : {0.0, 0.4, 1.3}) {
    const auto [flux, val] = rh_residual_selfsim(sampler_of(phi2), sampler_of(phi1),
                                                 {nr.xi_bar, xi2}, {1.0, 0.0}, g);
    CHECK(std::fabs(flux) < 1e-12);
    CHECK(std::fabs(val) < 1e-12);
  }
}

TEST_CASE("self-similar state (2) and critical angles") {
  GasLaw gas{1.4, 1.0};
  const CriticalAngles ca = selfsim_critical_angles(1.0, 2.0, gas);
  CHECK(ca.detachment > 0.0);
  CHECK(ca.detachment < ca.sonic);
  CHECK(ca.sonic < 0.5 * M_PI);
  // Independent scipy-bisection oracle values for gamma=1.4, rho0=1, rho1=2.
  CHECK(ca.detachment == doctest::Approx(0.853967).epsilon(5e-4));
  CHECK(ca.sonic == doctest::Approx(0.872861).epsilon(5e-4));

  // Solvability flips across theta_d.
  CHECK_THROWS_AS(selfsim_state2(1.0, 2.0, gas, ca.detachment - 1e-4), std::domain_error);
  CHECK_NOTHROW(selfsim_state2(1.0, 2.0, gas, ca.detachment + 1e-4));

  GasLaw g = gas;
  g.bernoulli = 1.0;
  const double theta = 0.5 * (ca.detachment + 0.5 * M_PI);
  const ReflectionLocalData d = selfsim_state2(1.0, 2.0, gas, theta);
  CHECK(2.0 < d.rho2_weak);
  CHECK(d.rho2_weak < d.rho2_strong);
  CHECK(constant_state_density(d.state2_weak, g) == doctest::Approx(d.rho2_weak).epsilon(1e-10));

  // Both roots satisfy the RH conditions at P0 across S1.
  const PseudoPotentialState phi1 = reflection_phi1(incident_shock(1.0, 2.0, gas));
  for (const PseudoPotentialState& s2 : {d.state2_weak, d.state2_strong}) {
    const Vec2 nu = (phi1.grad(d.reflection_point) - s2.grad(d.reflection_point)).normalized();
    const auto [flux, val] =
        rh_residual_selfsim(sampler_of(s2), sampler_of(phi1), d.reflection_point, nu, g);
    CHECK(std::fabs(flux) < 1e-10);
    CHECK(std::fabs(val) < 1e-10);
    // Slip on the wedge at P0.
    const Vec2 nw{-std::sin(theta), std::cos(theta)};
    CHECK(std::fabs(s2.grad(d.reflection_point).dot(nw)) < 1e-10);
  }

  // Supersonic at P0 above theta_s, subsonic below.
  {
    const double th_sup = 0.5 * (ca.sonic + 0.5 * M_PI);
    const ReflectionLocalData s = selfsim_state2(1.0, 2.0, gas, th_sup);
    const double c2 = std::pow(s.rho2_weak, 0.2);
    CHECK((s.state2_weak.v - s.reflection_point).norm() > c2);
    const double th_sub = 0.5 * (ca.detachment + ca.sonic) - 0.005;
    const ReflectionLocalData b = selfsim_state2(1.0, 2.0, gas, th_sub);
    const double c2b = std::pow(b.rho2_weak, 0.2);
    CHECK((b.state2_weak.v - b.reflection_point).norm() < c2b);
  }

  // theta_w = pi/2 agrees with normal reflection.
  const ReflectionLocalData n = selfsim_state2(1.0, 2.0, gas, 0.5 * M_PI);
  const NormalReflectionData nr = normal_reflection(1.0, 2.0, gas);
  CHECK(n.rho2_weak == doctest::Approx(nr.rho2).epsilon(1e-10));
  // Near-coincidence of weak/strong at theta_d.
  const ReflectionLocalData c = selfsim_state2(1.0, 2.0, gas, ca.detachment + 2e-6);
  CHECK(std::fabs(c.rho2_weak - c.rho2_strong) < 2e-2);

  // Ordering holds over a (rho0, rho1) sample.
  for (double rho1 : {1.3, 1.7, 2.0, 2.8, 4.0}) {
    const CriticalAngles cc = selfsim_critical_angles(1.0, rho1, gas);
    CHECK(cc.detachment < cc.sonic);
  }
}

TEST_CASE("potential polar and Prandtl-Meyer states") {
  GasLaw gas{1.4, 1.0};
  const double rho0 = 1.0, u10 = 1.8;  // c0 = 1, supersonic upstream
  const CriticalAngles ca = potential_critical_angles(rho0, u10, gas);
  CHECK(ca.sonic < ca.detachment);

  const double theta = 0.5 * ca.sonic;
  const PrandtlStates ps = prandtl_states(rho0, u10, gas, theta);
  CHECK(ps.vertex_supersonic);  // theta < theta_s
  const PrandtlStates ps2 = prandtl_states(rho0, u10, gas, 0.5 * (ca.sonic + ca.detachment));
  CHECK_FALSE(ps2.vertex_supersonic);

  const double gm1 = gas.gamma - 1.0;
  const double B0 = std::pow(rho0, gm1) + 0.5 * gm1 * u10 * u10;
  GasLaw g = gas;
  g.bernoulli = B0;

  // Density identity (shared Bernoulli level): exact for state (1), and for
  // state (2) once the potential constant is carried.
  CHECK(std::pow(ps.rho1, gm1) ==
        doctest::Approx(std::pow(rho0, gm1) + 0.5 * gm1 * (u10 * u10 - ps.phi1.v.norm_sq()))
            .epsilon(1e-13));
  CHECK(std::pow(ps.rho2, gm1) ==
        doctest::Approx(std::pow(rho0, gm1) +
                        gm1 * (0.5 * (u10 * u10 - ps.phi2.v.norm_sq()) - ps.phi2.offset))
            .epsilon(1e-13));

  // RH residuals on S0 (through the origin) and on S1 (wall-parallel line).
  const Vec2 nu0 = (ps.phi0.v - ps.phi1.v).normalized();
  for (double t : {0.2, 1.0, 3.0}) {
    const Vec2 p = t * nu0.perp();  // along S0
    const auto [flux, val] = rh_residual_selfsim(sampler_of(ps.phi1), sampler_of(ps.phi0), p, nu0, g);
    CHECK(std::fabs(flux) < 1e-10);
    CHECK(std::fabs(val) < 1e-10);
  }
  for (double x : {0.0, 2.0, 7.0}) {
    const Vec2 p{x, ps.standoff};
    const Vec2 nu1{0.0, 1.0};
    const auto [flux, val] = rh_residual_selfsim(sampler_of(ps.phi2), sampler_of(ps.phi0), p, nu1, g);
    CHECK(std::fabs(flux) < 1e-10);
    CHECK(std::fabs(val) < 1e-10);
  }
  CHECK(entropy_check(ps.rho0, ps.rho1).ok);
  CHECK(entropy_check(ps.rho0, ps.rho2).ok);

  // theta_w -> 0: zero-strength oblique shock.
  const PrandtlStates small = prandtl_states(rho0, u10, gas, 1e-5);
  CHECK((small.phi1.v - Vec2{u10, 0.0}).norm() < 1e-3);
}

TEST_CASE("sonic arc geometry") {
  GasLaw gas{1.4, 1.0};
  PseudoPotentialState st{{0.5, 0.0}, 0.1};
  GasLaw g = gas;
  g.bernoulli = 1.0;
  const double rho = constant_state_density(st, g);
  const double c = std::pow(rho, 0.2);

  // Vertical cutter through the center: symmetric endpoints.
  Line cutter{{0.5, 0.0}, {0.0, 1.0}};
  const SonicArcData arc = sonic_arc(st, rho, g, cutter, ArcPick::CcwFrom0);
  CHECK(arc.radius == doctest::Approx(c).epsilon(1e-13));
  CHECK(arc.end0.y == doctest::Approx(-c).epsilon(1e-12));
  CHECK(arc.end1.y == doctest::Approx(c).epsilon(1e-12));

  // Tangent cutter: single endpoint, zero span.
  Line tangent{{0.5 + c, 0.0}, {0.0, 1.0}};
  const SonicArcData t = sonic_arc(st, rho, g, tangent, ArcPick::CcwFrom0);
  CHECK((t.end0 - t.end1).norm() < 1e-6);

  // No intersection.
  Line miss{{0.5 + 2.0 * c, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(sonic_arc(st, rho, g, miss, ArcPick::CcwFrom0), std::domain_error);
}

TEST_CASE("entropy check") {
  CHECK(entropy_check(1.0, 2.0).ok);
  CHECK_FALSE(entropy_check(2.0, 2.0).ok);
  CHECK(entropy_check(1.0, 2.0).margin == doctest::Approx(1.0));
  CHECK_THROWS_AS(entropy_check(-1.0, 2.0), std::domain_error);
}
