#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsfbp/duct.hpp"

using namespace tsfbp;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Smooth perturbation shape: zero wall-normal derivative at x1 = 0, 1 and
/// vanishing at the outflow so the exit data stays clean.
AnalyticPhase cosine_bump() {
  // The 0.2 scale keeps the shock response inside the linear regime at
  // sigma = 0.02 (the displacement constant is about 1.3).
  return [](const Vec2& x) {
    const double h = 0.2 * (1.0 - x.y) * (1.0 - x.y);
    const double dh = -0.4 * (1.0 - x.y);
    return PhaseSample{std::cos(kPi * x.x) * h,
                       {-kPi * std::sin(kPi * x.x) * h, std::cos(kPi * x.x) * dh}};
  };
}

DuctConfig base_config(double sigma, int n) {
  DuctConfig cfg;
  cfg.gas = GasLaw{2.0, 1.0};
  cfg.q_minus = 1.0;
  cfg.sigma = sigma;
  cfg.perturbation = cosine_bump();
  cfg.n1 = n;
  cfg.n2 = n;
  cfg.iteration.tol_boundary = 1e-8;
  cfg.iteration.tol_field = 1e-6;
  cfg.iteration.max_outer = 60;
  cfg.inner.tol = 1e-9;
  cfg.inner.max_iter = 80;
  return cfg;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

TEST_CASE("duct background: closed form and RH exactness") {
  GasLaw g2{2.0, 1.0};
  const DuctBackground bg = duct_background(1.0, g2);
  CHECK(bg.q_plus == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-12));
  // Entropy: density rises across the flat shock.
  CHECK(density_steady(bg.q_plus * bg.q_plus, g2) > density_steady(1.0, g2));
  // Mass flux continuity across {x2 = 0} (normal = e2).
  const double flux_up = density_steady(1.0, g2) * 1.0;
  const double flux_dn = density_steady(bg.q_plus * bg.q_plus, g2) * bg.q_plus;
  CHECK(std::fabs(flux_up - flux_dn) < 1e-12);
  // phi0 continuous at the shock.
  CHECK(bg.phi0({0.3, 0.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(duct_background(0.2, g2), std::domain_error);
}

TEST_CASE("sigma = 0 reproduces the exact background") {
  DuctConfig cfg = base_config(0.0, 33);
  const DuctSolution sol = duct_solve(cfg);
  CHECK(sol.state.converged);
  CHECK(sol.outer_iterations == 1);
  CHECK(max_abs(sol.state.boundary.f) < 1e-10);
  double err = 0.0;
  for (int k = 0; k < sol.domain.size(); ++k)
    err = std::max(err, std::fabs(sol.state.field.v[k] - sol.background.q_plus * sol.domain.nodes[k].y));
  CHECK(err < 1e-10);
  CHECK_FALSE(sol.truncation_active());
}

TEST_CASE("perturbed duct: convergence, linear response, wall orthogonality") {
  DuctConfig cfg = base_config(0.02, 65);
  const DuctSolution sol = duct_solve(cfg);
  CHECK(sol.state.converged);

  // Shock displacement responds linearly: halving sigma halves max|f|.
  DuctConfig half = base_config(0.01, 65);
  const DuctSolution sol_half = duct_solve(half);
  const double ratio = max_abs(sol.state.boundary.f) / max_abs(sol_half.state.boundary.f);
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);

  // max|f| <= C sigma with a stable constant.
  CHECK(max_abs(sol.state.boundary.f) < 10.0 * cfg.sigma);

  // Endpoint slopes vanish at the walls (orthogonality to the boundary).
  const auto& g = sol.state.boundary;
  CHECK(std::fabs(g.deriv(g.T.front())) < 5e-2 * max_abs(g.f) / 0.02 * 0.02 + 1e-8);
  CHECK(std::fabs(g.deriv(g.T.back())) < 5e-2 * max_abs(g.f) / 0.02 * 0.02 + 1e-8);

  // u = phi^- - phi positive on the subsonic side, zero on the shock.
  const Field u = sol.u_field();
  for (int j = 1; j < sol.domain.n2; ++j)
    for (int i = 0; i < sol.domain.n1; ++i) CHECK(u.v[sol.domain.idx(i, j)] > -1e-6);
  // phi <= phi^- everywhere in the subsonic region.
  for (int k = 0; k < sol.domain.size(); ++k)
    CHECK(sol.state.field.v[k] <= sol.phi_minus(sol.domain.nodes[k]).value + 1e-6);

  // Converged field remains strictly inside the untruncated region.
  CHECK_FALSE(sol.truncation_active());

  // RH flux residual along the shock at the discretization level.
  CHECK(max_abs(sol.rh_residuals()) < 5e-3);
}

TEST_CASE("RH residual decreases with refinement at order >= 1.5") {
  std::vector<double> res;
  for (int n : {17, 33, 65}) {
    const DuctSolution sol = duct_solve(base_config(0.02, n));
    REQUIRE(sol.state.converged);
    res.push_back(max_abs(sol.rh_residuals()));
  }
  CHECK(observed_order(res[0], res[1]) > 1.5);
  CHECK(observed_order(res[1], res[2]) > 1.5);
}
