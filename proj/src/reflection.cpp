#include "tsfbp/reflection.hpp"

#include <cmath>

namespace tsfbp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec2 ReflectionGeometry::to_band(const Vec2& xi) const {
  const Vec2 d = xi - O2;
  const double r = d.norm();
  double ang = std::atan2(d.y, d.x) - theta_w;
  while (ang < -kPi) ang += 2.0 * kPi;
  while (ang > kPi) ang -= 2.0 * kPi;
  return {c2 - r, ang};
}

Vec2 ReflectionGeometry::from_band(const Vec2& xy) const {
  const double r = c2 - xy.x;
  const double ang = theta_w + xy.y;
  return O2 + r * Vec2{std::cos(ang), std::sin(ang)};
}

ReflectionGeometry reflection_geometry(double rho0, double rho1, const GasLaw& gas_in,
                                       double theta_w) {
  ReflectionGeometry g;
  g.gas = gas_in;
  g.gas.bernoulli = std::pow(rho0, gas_in.gamma - 1.0);
  g.theta_w = theta_w;
  g.incident = incident_shock(rho0, rho1, gas_in);
  g.phi0 = reflection_phi0();
  g.phi1 = reflection_phi1(g.incident);
  g.tau_w = {std::cos(theta_w), std::sin(theta_w)};
  g.nu_w = {-std::sin(theta_w), std::cos(theta_w)};
  g.P3 = {0.0, 0.0};
  g.frame = Frame{{-1.0, 0.0}, {0.0, 1.0}};

  const ReflectionLocalData local = selfsim_state2(rho0, rho1, gas_in, theta_w);
  g.phi2 = local.state2_weak;
  g.rho2 = local.rho2_weak;
  g.c2 = std::pow(g.rho2, 0.5 * (gas_in.gamma - 1.0));
  g.O2 = g.phi2.v;
  g.P0 = local.reflection_point;

  const bool normal_case = !std::isfinite(g.P0.y);
  if (normal_case) {
    const double xb = g.phi2.offset / g.incident.u1 + g.incident.xi1_0;  // xi_bar
    g.P1 = {xb, std::sqrt(std::max(0.0, g.c2 * g.c2 - xb * xb))};
    g.supersonic_type = true;
  } else {
    // P1: first intersection of S1 (from P0 toward the domain) with the circle.
    const Vec2 d = (g.phi1.v - g.phi2.v);  // D(phi1 - phi2), constant
    const Vec2 along = d.perp().normalized();
    const Vec2 dir = (along.y < 0.0) ? along : -along;  // descend from P0
    const Vec2 w = g.P0 - g.O2;
    const double b = w.dot(dir);
    const double cc = w.norm_sq() - g.c2 * g.c2;
    const double disc = b * b - cc;
    g.supersonic_type = disc > 0.0 && w.norm() > g.c2;
    if (g.supersonic_type) {
      const double t = -b - std::sqrt(disc);
      g.P1 = g.P0 + t * dir;
    } else {
      g.P1 = g.P0;  // sonic arc degenerates to the reflection point
    }
  }
  g.T_P1 = g.frame.T_of(g.P1);
  return g;
}

namespace {

struct ShockInBand {
  const ReflectionGeometry* geom;
  const FreeBoundaryGraph* graph;

  Vec2 xi(double T) const { return graph->frame.to_phys(graph->eval(T), T); }
  double x_of_T(double T) const { return geom->to_band(xi(T)).x; }
  /// T at which the shock sits at band depth x (monotone near P1).
  double T_at_x(double x) const {
    double lo = 0.0, hi = geom->T_P1;  // x(hi) = 0, x(lo) = max depth
    if (x <= 0.0) return hi;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (x_of_T(mid) > x)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
  double y_at_x(double x) const { return geom->to_band(xi(T_at_x(x))).y; }
};

double band_x_of_s(double s, double xb) { return xb * (0.25 * s + 0.75 * s * s); }

MappedDomain build_band(const ReflectionGeometry& g, const FreeBoundaryGraph& f, double xb,
                        int n1, int n2) {
  ShockInBand sh{&g, &f};
  auto map = [&](double s, double t) {
    const double x = band_x_of_s(s, xb);
    const double ys = sh.y_at_x(x);
    return Vec2{x, t * ys};
  };
  // west: sonic arc (x=0); south: wedge ray (y=0); north: shock; east: matching.
  return MappedDomain::from_map(
      n1, n2, map, {EdgeTag::Wall, EdgeTag::Matching, EdgeTag::Free, EdgeTag::SonicEdge});
}

MappedDomain build_outer(const ReflectionGeometry& g, const FreeBoundaryGraph& f, double xo,
                         int n1, int n2) {
  ShockInBand sh{&g, &f};
  const double TB = sh.T_at_x(xo);
  const double yB = g.to_band(sh.xi(TB)).y;
  const double tA = g.O2.dot(g.tau_w) + (g.c2 - xo);  // wedge coordinate of corner A
  const Vec2 P2 = sh.xi(0.0);

  Curve south = [=](double u) { return (u * tA) * g.tau_w; };
  Curve east = [=, &g](double u) {
    const double ang = g.theta_w + u * yB;
    return g.O2 + (g.c2 - xo) * Vec2{std::cos(ang), std::sin(ang)};
  };
  Curve north = [=, &sh](double u) { return sh.xi(u * TB); };
  Curve west = [=](double u) { return Vec2{u * P2.x, 0.0}; };
  return MappedDomain::transfinite(
      n1, n2, south, east, north, west,
      {EdgeTag::Wall, EdgeTag::Matching, EdgeTag::Free, EdgeTag::Symmetry});
}

/// Frozen-state data for the interior Picard coefficient callbacks.
struct FrozenPhase {
  const ReflectionGeometry* g;
  double density(const Vec2& xi, double psi, const Vec2& dpsi_xi) const {
    const Vec2 dphi = g->phi2.grad(xi) + dpsi_xi;
    const double phi = g->phi2.value(xi) + psi;
    return density_selfsim(dphi.norm_sq(), phi, g->gas);
  }
};

/// Stabilized nondivergence coefficients of the outer psi-equation.
NonDivModel::Coeffs outer_coeffs(const ReflectionGeometry& g, const Vec2& xi, double psi,
                                 const Vec2& dpsi, double floor_frac) {
  const Vec2 dphi = g.phi2.grad(xi) + dpsi;
  const double phi = g.phi2.value(xi) + psi;
  const double gm1 = g.gas.gamma - 1.0;
  double csq = g.gas.bernoulli - gm1 * (0.5 * dphi.norm_sq() + phi);
  csq = std::max(csq, 1e-8);
  NonDivModel::Coeffs c;
  c.a11 = csq - dphi.x * dphi.x;
  c.a12 = -dphi.x * dphi.y;
  c.a22 = csq - dphi.y * dphi.y;
  // Shiffman-style safeguard: floor the eigenvalues of the coefficient matrix.
  const double tr = c.a11 + c.a22;
  const double det = c.a11 * c.a22 - c.a12 * c.a12;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lam_min = 0.5 * tr - disc;
  const double lam_floor = floor_frac * csq;
  if (lam_min < lam_floor) {
    const double shift = lam_floor - lam_min;
    c.a11 += shift;
    c.a22 += shift;
  }
  return c;
}

struct ChartSolutions {
  Field psi_outer, psi_band;
};

}  // namespace

double ReflectionSolution::psi_at(const Vec2& xi) const {
  const Vec2 xy = geom.to_band(xi);
  if (xy.x < band_x_of_s(1.0, config.band_frac * geom.c2) * 0.92 && xy.x > -1e-12 &&
      xy.y > -1e-12) {
    const FieldSampler s(band, psi_band);
    return s.value(xy);
  }
  const FieldSampler s(outer, psi_outer);
  return s.value(xi);
}

Vec2 ReflectionSolution::dpsi_at(const Vec2& xi) const {
  const Vec2 xy = geom.to_band(xi);
  if (xy.x < band_x_of_s(1.0, config.band_frac * geom.c2) * 0.92 && xy.x > -1e-12 &&
      xy.y > -1e-12) {
    const FieldSampler s(band, psi_band);
    const Vec2 gb = s.grad(xy);  // (psi_x, psi_y) in band coordinates
    const double r = geom.c2 - xy.x;
    const double ang = geom.theta_w + xy.y;
    const Vec2 er{std::cos(ang), std::sin(ang)};
    const Vec2 et{-std::sin(ang), std::cos(ang)};
    return -gb.x * er + (gb.y / r) * et;
  }
  const FieldSampler s(outer, psi_outer);
  return s.grad(xi);
}

double ReflectionSolution::sup_psi() const {
  double m = 0.0;
  for (double v : psi_outer.v) m = std::max(m, std::fabs(v));
  for (double v : psi_band.v) m = std::max(m, std::fabs(v));
  return m;
}

std::vector<double> ReflectionSolution::rh_residuals() const {
  const FreeBoundaryGraph& f = state.boundary;
  std::vector<double> res(f.T.size(), 0.0);
  for (size_t k = 0; k < f.T.size(); ++k) {
    const Vec2 p = f.knot_point(int(k));
    const Vec2 nu = boundary_normal(f, f.T[k]);
    const Vec2 dphi = dphi_at(p);
    const double phi = phi_at(p);
    const double rho = density_selfsim(dphi.norm_sq(), phi, geom.gas);
    const double rho1 = density_selfsim(geom.phi1.grad(p).norm_sq(), geom.phi1.value(p), geom.gas);
    res[k] = std::fabs(rho * dphi.dot(nu) - rho1 * geom.phi1.grad(p).dot(nu));
  }
  return res;
}

double ReflectionSolution::max_psi_x_over_x() const {
  double m = 0.0;
  const std::vector<Vec2> gb = gradient(band, psi_band);
  for (int j = 0; j < band.n2; ++j)
    for (int i = 1; i < band.n1; ++i) {
      const int k = band.idx(i, j);
      const double x = band.nodes[k].x;
      if (x > 1e-8) m = std::max(m, gb[k].x / x);
    }
  return m;
}

ReflectionSolution reflection_solve(const ReflectionConfig& config) {
  ReflectionSolution sol;
  sol.config = config;
  sol.geom = reflection_geometry(config.rho0, config.rho1, config.gas, config.theta_w);
  const ReflectionGeometry& g = sol.geom;
  if (!g.supersonic_type)
    throw std::domain_error("reflection_solve: subsonic-type configuration not supported here");

  const double q2 = g.O2.norm();
  const double xb = std::min(config.band_frac * g.c2, 0.6 * (g.c2 - q2));
  const double xo = config.overlap_frac * xb;

  // Shock knots over T in [0, T_P1]; initial graph: the straight S1 chord.
  const int nk = config.n1;
  FreeBoundaryGraph init_graph;
  init_graph.frame = g.frame;
  init_graph.end1 = EndCondition::Pinned;
  init_graph.T.resize(nk);
  init_graph.f.resize(nk);
  const Vec2 dS1 = std::isfinite(g.P0.y) ? (g.phi1.v - g.phi2.v).perp().normalized()
                                         : Vec2{0.0, 1.0};
  for (int k = 0; k < nk; ++k) {
    const double T = g.T_P1 * k / (nk - 1);
    init_graph.T[k] = T;
    // Point on S1 at height T.
    const double dt = (std::fabs(dS1.y) > 1e-14) ? (T - g.P1.y) / dS1.y : 0.0;
    init_graph.f[k] = g.frame.S_of(g.P1 + dt * dS1);
  }

  // Shared chart state across outer iterations.
  struct Charts {
    MappedDomain outer, band;
    Field psi_outer, psi_band;
    bool valid = false;
  };
  auto charts = std::make_shared<Charts>();
  auto delta_ell = std::make_shared<double>(config.delta_ell0);

  const double jump_slope = g.phi2.v.x - g.incident.u1;  // d_S(phi1 - phi) at background

  FixedPointProblem problem;
  problem.solve_interior = [&, charts, delta_ell](const FreeBoundaryGraph& f, const Field&) {
    const MappedDomain band = build_band(g, f, xb, config.nb1, config.nb2);
    const MappedDomain outer = build_outer(g, f, xo, config.n1, config.n2);

    Field psi_b = charts->valid && int(charts->psi_band.v.size()) == band.size()
                      ? charts->psi_band
                      : Field("psi", band.size());
    Field psi_o = charts->valid && int(charts->psi_outer.v.size()) == outer.size()
                      ? charts->psi_outer
                      : Field("psi", outer.size());

    const double hx = xb / (config.nb1 - 1);
    const double floor_band = *delta_ell * hx;

    for (int sweep = 0; sweep < config.schwarz_sweeps; ++sweep) {
      // --- band solve, Dirichlet on the matching (east) edge from the outer chart
      const FieldSampler outer_s(outer, psi_o);
      const FieldSampler band_prev(band, psi_b);
      NonDivModel band_model;
      band_model.coeff = [&](const Vec2& xy, double pv, const Vec2& gp) {
        const SonicCoeffs sc =
            sonic_coefficients({gp.x, gp.y}, pv, std::max(xy.x, 1e-12), g.c2, g.gas, config.cutoff);
        NonDivModel::Coeffs c;
        c.a11 = std::max(sc.a11, floor_band);
        c.a12 = 0.5 * sc.a12;  // solver convention: a11 uxx + 2 a12 uxy + a22 uyy
        c.a22 = sc.a22;
        c.b1 = sc.b1;
        c.b2 = sc.b2;
        return c;
      };
      auto band_shock_bc = [&](const Vec2& xy) {
        // rho_hat (Dphi2 + Dpsi).nu = rho1 Dphi1.nu on the shock, frozen at the
        // previous sweep. Returns the oblique vector in band coordinates.
        const Vec2 xi = g.from_band(xy);
        return xi;
      };
      (void)band_shock_bc;
      auto shock_dir_band = [&, f](const Vec2& xy) {
        const Vec2 xi = g.from_band(xy);
        const Vec2 nu = boundary_normal(f, xi.y);
        const double rho_hat =
            density_selfsim((g.phi2.grad(xi) + band_prev.grad(xy) /*chart grad!*/).norm_sq(),
                            g.phi2.value(xi) + band_prev.value(xy), g.gas);
        const double r = g.c2 - xy.x;
        const double ang = g.theta_w + xy.y;
        const Vec2 er{std::cos(ang), std::sin(ang)};
        const Vec2 et{-std::sin(ang), std::cos(ang)};
        return rho_hat * Vec2{-er.dot(nu), et.dot(nu) / r};
      };
      (void)shock_dir_band;
      std::array<BoundaryCondition, 4> band_bcs = {
          // south: wedge ray, psi_y = 0
          BoundaryCondition::oblique([](const Vec2&) { return Vec2{0.0, 1.0}; },
                                     [](const Vec2&) { return 0.0; }),
          // east: matching Dirichlet from the outer chart
          BoundaryCondition::dirichlet([&](const Vec2& xy) { return outer_s.value(g.from_band(xy)); }),
          // north: shock, linearized RH flux
          BoundaryCondition::oblique(
              [&](const Vec2& xy) {
                const Vec2 xi = g.from_band(xy);
                const Vec2 nu = boundary_normal(f, xi.y);
                Vec2 dpsi_xi;
                {
                  const Vec2 gb = band_prev.grad(xy);
                  const double r = g.c2 - xy.x;
                  const double ang = g.theta_w + xy.y;
                  dpsi_xi = -gb.x * Vec2{std::cos(ang), std::sin(ang)} +
                            (gb.y / r) * Vec2{-std::sin(ang), std::cos(ang)};
                }
                const double rho_hat =
                    density_selfsim((g.phi2.grad(xi) + dpsi_xi).norm_sq(),
                                    g.phi2.value(xi) + band_prev.value(xy), g.gas);
                const double r = g.c2 - xy.x;
                const double ang = g.theta_w + xy.y;
                const Vec2 er{std::cos(ang), std::sin(ang)};
                const Vec2 et{-std::sin(ang), std::cos(ang)};
                return rho_hat * Vec2{-er.dot(nu), et.dot(nu) / r};
              },
              [&](const Vec2& xy) {
                const Vec2 xi = g.from_band(xy);
                const Vec2 nu = boundary_normal(f, xi.y);
                Vec2 dpsi_xi;
                {
                  const Vec2 gb = band_prev.grad(xy);
                  const double r = g.c2 - xy.x;
                  const double ang = g.theta_w + xy.y;
                  dpsi_xi = -gb.x * Vec2{std::cos(ang), std::sin(ang)} +
                            (gb.y / r) * Vec2{-std::sin(ang), std::cos(ang)};
                }
                const double rho_hat =
                    density_selfsim((g.phi2.grad(xi) + dpsi_xi).norm_sq(),
                                    g.phi2.value(xi) + band_prev.value(xy), g.gas);
                const double rho_1 = density_selfsim(g.phi1.grad(xi).norm_sq(),
                                                      g.phi1.value(xi), g.gas);
                return rho_1 * g.phi1.grad(xi).dot(nu) - rho_hat * g.phi2.grad(xi).dot(nu);
              }),
          // west: sonic arc, psi = 0
          BoundaryCondition::dirichlet([](const Vec2&) { return 0.0; }),
      };
      SolveOptions band_opts = config.inner;
      ConvergenceRecord brec;
      psi_b = solve_nondiv(band, band_model, band_bcs, psi_b, band_opts, &brec);

      // --- outer solve, Dirichlet on the matching (east) edge from the band
      const FieldSampler band_s(band, psi_b);
      const FieldSampler outer_prev(outer, psi_o);
      NonDivModel outer_model;
      outer_model.coeff = [&](const Vec2& xi, double pv, const Vec2& gp) {
        return outer_coeffs(g, xi, pv, gp, 0.02);
      };
      std::array<BoundaryCondition, 4> outer_bcs = {
          // south: wedge, slip; Dphi2.nu_w = 0 exactly, so psi_nu = 0
          BoundaryCondition::oblique([&](const Vec2&) { return g.nu_w; },
                                     [](const Vec2&) { return 0.0; }),
          // east: matching arc Dirichlet from the band
          BoundaryCondition::dirichlet([&](const Vec2& xi) { return band_s.value(g.to_band(xi)); }),
          // north: shock, linearized RH flux in xi coordinates
          BoundaryCondition::oblique(
              [&](const Vec2& xi) {
                const Vec2 nu = boundary_normal(f, xi.y);
                const double rho_hat =
                    density_selfsim((g.phi2.grad(xi) + outer_prev.grad(xi)).norm_sq(),
                                    g.phi2.value(xi) + outer_prev.value(xi), g.gas);
                return rho_hat * nu;
              },
              [&](const Vec2& xi) {
                const Vec2 nu = boundary_normal(f, xi.y);
                const double rho_hat =
                    density_selfsim((g.phi2.grad(xi) + outer_prev.grad(xi)).norm_sq(),
                                    g.phi2.value(xi) + outer_prev.value(xi), g.gas);
                const double rho_1 =
                    density_selfsim(g.phi1.grad(xi).norm_sq(), g.phi1.value(xi), g.gas);
                return rho_1 * g.phi1.grad(xi).dot(nu) - rho_hat * g.phi2.grad(xi).dot(nu);
              }),
          // west: symmetry line, Dphi.e2 = 0; phi2 contributes -v2_y there
          BoundaryCondition::oblique([](const Vec2&) { return Vec2{0.0, 1.0}; },
                                     [&](const Vec2&) { return -g.phi2.v.y; }),
      };
      ConvergenceRecord orec;
      psi_o = solve_nondiv(outer, outer_model, outer_bcs, psi_o, config.inner, &orec);
    }

    charts->outer = outer;
    charts->band = band;
    charts->psi_band = psi_b;
    charts->psi_outer = psi_o;
    charts->valid = true;
    *delta_ell = std::max(config.delta_ell_min, *delta_ell * config.delta_ell_decay);
    Field out = psi_o;
    out.quantity = "psi";
    return out;
  };

  problem.propose_boundary = [&, charts](const FreeBoundaryGraph& f, const Field&) {
    const FieldSampler outer_s(charts->outer, charts->psi_outer);
    const FieldSampler band_s(charts->band, charts->psi_band);
    const double band_edge_x = band_x_of_s(1.0, xb) * 0.9;
    FreeBoundaryGraph next = f;
    for (size_t k = 0; k < f.T.size(); ++k) {
      const Vec2 p = f.knot_point(int(k));
      const Vec2 xy = g.to_band(p);
      const double psi =
          (xy.x >= 0.0 && xy.x < band_edge_x) ? band_s.value(xy) : outer_s.value(p);
      const double mismatch = (g.phi1.value(p) - g.phi2.value(p)) - psi;  // w = phi1 - phi
      next.f[k] = f.f[k] - mismatch / jump_slope;
    }
    next.f.back() = g.frame.S_of(g.P1);  // pinned at P1
    return next;
  };

  problem.interior_residual = [&, charts](const FreeBoundaryGraph& f, const Field&) {
    // Flux RH residual along the shock as the convergence diagnostic.
    const FieldSampler outer_s(charts->outer, charts->psi_outer);
    double worst = 0.0;
    for (size_t k = 0; k + 1 < f.T.size(); ++k) {
      const Vec2 p = f.knot_point(int(k));
      const Vec2 xy = g.to_band(p);
      if (xy.x >= 0.0 && xy.x < xo) continue;  // covered by the band chart
      const Vec2 nu = boundary_normal(f, f.T[k]);
      const Vec2 dphi = g.phi2.grad(p) + outer_s.grad(p);
      const double phi = g.phi2.value(p) + outer_s.value(p);
      const double rho = density_selfsim(std::max(0.0, dphi.norm_sq()), phi, g.gas);
      const double rho1 = density_selfsim(g.phi1.grad(p).norm_sq(), g.phi1.value(p), g.gas);
      worst = std::max(worst, std::fabs(rho * dphi.dot(nu) - rho1 * g.phi1.grad(p).dot(nu)));
    }
    return worst;
  };

  IterationState init;
  init.boundary = init_graph;
  sol.state = drive_fixed_point(problem, config.iteration, std::move(init));
  if (!sol.state.converged)
    throw std::runtime_error("reflection_solve: free-boundary iteration did not converge");

  sol.outer = charts->outer;
  sol.band = charts->band;
  sol.psi_outer = charts->psi_outer;
  sol.psi_band = charts->psi_band;
  sol.cutoff_active =
      sol.max_psi_x_over_x() > 4.0 / (3.0 * (config.gas.gamma + 1.0)) + 1e-3;
  return sol;
}

std::vector<ReflectionSolution> reflection_schedule(const ReflectionConfig& base,
                                                    const std::vector<double>& angles) {
  std::vector<ReflectionSolution> out;
  for (double th : angles) {
    ReflectionConfig cfg = base;
    cfg.theta_w = th;
    out.push_back(reflection_solve(cfg));
  }
  return out;
}

}  // namespace tsfbp
