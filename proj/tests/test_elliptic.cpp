#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tsfbp/elliptic.hpp"

using namespace tsfbp;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Mms {
  double operator()(const Vec2& p) const { return std::sin(kPi * p.x) * std::cos(kPi * p.y); }
  Vec2 grad(const Vec2& p) const {
    return {kPi * std::cos(kPi * p.x) * std::cos(kPi * p.y),
            -kPi * std::sin(kPi * p.x) * std::sin(kPi * p.y)};
  }
  Mat2 hess(const Vec2& p) const {
    const double u = (*this)(p);
    const double uxy = -kPi * kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y);
    return {-kPi * kPi * u, uxy, uxy, -kPi * kPi * u};
  }
};

MappedDomain warped(int n) {
  auto map = [](double s, double t) {
    return Vec2{s + 0.10 * std::sin(kPi * s) * std::sin(kPi * t),
                t - 0.08 * std::sin(kPi * s) * std::sin(kPi * t)};
  };
  return MappedDomain::from_map(n, n, map,
                               {EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall});
}

double max_error(const MappedDomain& d, const Field& u, const Mms& mms) {
  double e = 0.0;
  for (int k = 0; k < d.size(); ++k) e = std::max(e, std::fabs(u.v[k] - mms(d.nodes[k])));
  return e;
}

}  // namespace

TEST_CASE("linear Dirichlet data reproduced exactly by the divergence path") {
  auto idmap = [](double s, double t) { return Vec2{s, t}; };
  const MappedDomain dom = MappedDomain::from_map(
      33, 33, idmap, {EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall});
  DivFormModel model;
  model.coeff = [](const Vec2&, double, const Vec2&) { return Mat2{1.0, 0.0, 0.0, 1.0}; };
  auto lin = [](const Vec2& p) { return 0.3 * p.x - 0.7 * p.y + 0.1; };
  std::array<BoundaryCondition, 4> bcs = {
      BoundaryCondition::dirichlet(lin), BoundaryCondition::dirichlet(lin),
      BoundaryCondition::dirichlet(lin), BoundaryCondition::dirichlet(lin)};
  SolveOptions opts;
  opts.tol = 1e-12;
  ConvergenceRecord rec;
  const Field u = solve_divform(dom, model, bcs, Field("u", dom.size()), opts, &rec);
  CHECK(rec.converged);
  for (int k = 0; k < dom.size(); ++k) CHECK(std::fabs(u.v[k] - lin(dom.nodes[k])) < 1e-11);
}

TEST_CASE("discrete maximum principle smoke test") {
  auto idmap = [](double s, double t) { return Vec2{s, t}; };
  const MappedDomain dom = MappedDomain::from_map(
      41, 41, idmap, {EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall});
  DivFormModel model;
  model.coeff = [](const Vec2&, double, const Vec2&) { return Mat2{1.0, 0.0, 0.0, 1.0}; };
  auto data = [](const Vec2& p) { return 0.5 + 0.5 * std::sin(7.0 * p.x + 3.0 * p.y); };
  std::array<BoundaryCondition, 4> bcs = {
      BoundaryCondition::dirichlet(data), BoundaryCondition::dirichlet(data),
      BoundaryCondition::dirichlet(data), BoundaryCondition::dirichlet(data)};
  SolveOptions opts;
  const Field u = solve_divform(dom, model, bcs, Field("u", dom.size()), opts);
  for (double v : u.v) {
    CHECK(v >= -1e-10);
    CHECK(v <= 1.0 + 1e-10);
  }
}

TEST_CASE("divergence-form MMS on a warped grid with a conormal edge") {
  // Smooth quasilinear flux A(Du) = (1 + 1/(1+|Du|^2)) Du.
  auto r_of = [](double s) { return 1.0 + 1.0 / (1.0 + s); };
  auto dr_of = [](double s) { return -1.0 / ((1.0 + s) * (1.0 + s)); };
  Mms mms;

  auto flux = [&](const Vec2& p) {
    const Vec2 g = mms.grad(p);
    return r_of(g.norm_sq()) * g;
  };
  auto rhs = [&](const Vec2& p) {
    const Vec2 g = mms.grad(p);
    const Mat2 H = mms.hess(p);
    const Vec2 grad_s = 2.0 * Vec2{H.a * g.x + H.b * g.y, H.c * g.x + H.d * g.y};
    const double s = g.norm_sq();
    return dr_of(s) * grad_s.dot(g) + r_of(s) * (H.a + H.d);
  };

  std::vector<double> errors;
  for (int n : {17, 33, 65}) {
    const MappedDomain dom = warped(n);
    DivFormModel model;
    model.coeff = [&](const Vec2&, double, const Vec2& gp) {
      const double r = r_of(gp.norm_sq());
      return Mat2{r, 0.0, 0.0, r};
    };
    model.rhs = rhs;
    auto dir = [&](const Vec2& p) { return mms(p); };
    std::array<BoundaryCondition, 4> bcs = {
        BoundaryCondition::conormal([&](const Vec2& p, const Vec2& nu) { return flux(p).dot(nu); }),
        BoundaryCondition::dirichlet(dir), BoundaryCondition::dirichlet(dir),
        BoundaryCondition::dirichlet(dir)};
    SolveOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 200;
    ConvergenceRecord rec;
    const Field u = solve_divform(dom, model, bcs, Field("u", dom.size()), opts, &rec);
    CHECK(rec.converged);
    errors.push_back(max_error(dom, u, mms));
  }
  const double o1 = observed_order(errors[0], errors[1]);
  const double o2 = observed_order(errors[1], errors[2]);
  CHECK(o1 > 1.8);
  CHECK(o1 < 2.4);
  CHECK(o2 > 1.8);
  CHECK(o2 < 2.4);
}

TEST_CASE("nondivergence MMS with an oblique edge") {
  Mms mms;
  auto a11 = [](const Vec2& p) { return 2.0 + 0.3 * std::sin(p.x + p.y); };
  auto a12 = [](const Vec2& p) { return 0.2 * std::cos(p.x); };
  auto a22 = [](const Vec2& p) { return 2.0 + 0.3 * std::cos(p.y); };

  std::vector<double> errors;
  for (int n : {17, 33, 65}) {
    const MappedDomain dom = warped(n);
    NonDivModel model;
    model.coeff = [&](const Vec2& p, double, const Vec2&) {
      NonDivModel::Coeffs c;
      c.a11 = a11(p);
      c.a12 = a12(p);
      c.a22 = a22(p);
      c.b1 = 0.5;
      c.b2 = -0.3;
      c.c0 = -1.0;
      const Mat2 H = mms.hess(p);
      const Vec2 g = mms.grad(p);
      c.f = c.a11 * H.a + 2.0 * c.a12 * H.b + c.a22 * H.d + c.b1 * g.x + c.b2 * g.y +
            c.c0 * mms(p);
      return c;
    };
    auto dir = [&](const Vec2& p) { return mms(p); };
    // East edge oblique: b = outward-ish direction tilted along the edge.
    auto bdir = [](const Vec2&) { return Vec2{1.0, 0.3}; };
    auto bdata = [&](const Vec2& p) { return mms.grad(p).dot(Vec2{1.0, 0.3}); };
    std::array<BoundaryCondition, 4> bcs = {
        BoundaryCondition::dirichlet(dir), BoundaryCondition::oblique(bdir, bdata),
        BoundaryCondition::dirichlet(dir), BoundaryCondition::dirichlet(dir)};
    SolveOptions opts;
    opts.tol = 1e-9;
    ConvergenceRecord rec;
    const Field u = solve_nondiv(dom, model, bcs, Field("u", dom.size()), opts, &rec);
    CHECK(rec.converged);
    errors.push_back(max_error(dom, u, mms));
  }
  CHECK(observed_order(errors[0], errors[1]) > 1.8);
  CHECK(observed_order(errors[1], errors[2]) > 1.8);
}

TEST_CASE("shiffman truncation structure") {
  SUBCASE("closed-form tangent at gamma = 2") {
    GasLaw g2{2.0, 1.0};
    const TruncatedGasLaw t = build_truncation(0.5, g2);
    const double ps = std::sqrt(2.0 / 3.0);
    CHECK(t.epsilon == doctest::Approx(0.5 * (ps - 0.5)).epsilon(1e-14));
    // gamma=2: Phi_1(p) = (1 - p^2/2) p, Phi_1'(p) = 1 - 1.5 p^2.
    CHECK(t.c0 == doctest::Approx(1.0 - 1.5 * t.p_star * t.p_star).epsilon(1e-12));
    CHECK(t.c1 == doctest::Approx((1.0 - 0.5 * t.p_star * t.p_star) * t.p_star - t.c0 * t.p_star)
                      .epsilon(1e-12));
  }
  SUBCASE("agrees with the exact law below the cut and stays elliptic above") {
    GasLaw gas{1.4, 1.0};
    const TruncatedGasLaw t = build_truncation(0.4, gas);
    for (double q = 0.01; q < t.p_star; q += 0.01)
      CHECK(t.rho(q * q) == doctest::Approx(density_steady(q * q, gas)).epsilon(1e-13));
    double lo = 1e300, hi = 0.0;
    for (double q : {0.01, 0.1, 0.5, 0.8, 1.0, 2.0, 5.0}) {
      const double slope = t.flux_slope(q);
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
      CHECK(slope > 0.0);
    }
    CHECK(lo >= t.c0 - 1e-12);
    CHECK(hi < 10.0);
  }
  SUBCASE("C1 matching at the cut") {
    GasLaw gas{1.4, 1.0};
    const TruncatedGasLaw t = build_truncation(0.55, gas);
    const double s = t.p_star * t.p_star;
    CHECK(t.rho(s * (1 - 1e-9)) == doctest::Approx(t.rho(s * (1 + 1e-9))).epsilon(1e-7));
    CHECK(t.drho(s * (1 - 1e-7)) == doctest::Approx(t.drho(s * (1 + 1e-7))).epsilon(1e-4));
  }
  CHECK_THROWS_AS(build_truncation(1.5, GasLaw{1.4, 1.0}), std::domain_error);
}

TEST_CASE("sonic-band coefficients") {
  GasLaw gas{1.4, 1.0};
  const double c2 = 1.3;
  SonicCutoff cut;
  cut.eps_band = 0.1 * c2;

  SUBCASE("zero-state reduction of the error terms") {
    for (double x : {0.01, 0.05, 0.1}) {
      const SonicCoeffs c = sonic_coefficients_exact({0.0, 0.0}, 0.0, x, c2, gas);
      CHECK(c.O[0] == doctest::Approx(-x * x / c2).epsilon(1e-13));
      CHECK(c.O[1] == doctest::Approx(0.0));
      CHECK(c.O[2] ==
            doctest::Approx(x * (2 * c2 - x) / (c2 * (c2 - x) * (c2 - x))).epsilon(1e-13));
      CHECK(c.O[3] == doctest::Approx(x / (c2 - x)).epsilon(1e-13));
      CHECK(c.O[4] == doctest::Approx(0.0));
      CHECK(c.a11 == doctest::Approx(2 * x - x * x / c2).epsilon(1e-13));
    }
  }

  SUBCASE("quadratic comparison function is a supersolution") {
    const double delta = 0.1;
    for (double x = 1e-3; x < 0.08 * c2; x += 1e-3) {
      const double px = (1.0 + delta) * x / (gas.gamma + 1.0);
      const double psi = 0.5 * (1.0 + delta) * x * x / (gas.gamma + 1.0);
      const SonicCoeffs c = sonic_coefficients({px, 0.0}, psi, x, c2, gas, cut);
      const double pxx = (1.0 + delta) / (gas.gamma + 1.0);
      const double op = c.a11 * pxx + c.b1 * px;
      CHECK(op < 0.0);
    }
  }

  SUBCASE("degenerate ellipticity sandwich on random admitted samples") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> ux(1e-4, 0.1 * c2);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    double lam_min = 1e300, lam_max = 0.0;
    for (int k = 0; k < 4000; ++k) {
      const double x = ux(rng);
      const double px = u01(rng) * 2.0 * x;  // beyond the cutoff range on purpose
      const double py = u01(rng) * 3.0 * x;
      const double ps = u01(rng) * 3.0 * x * x;
      const SonicCoeffs c = sonic_coefficients({px, py}, ps, x, c2, gas, cut);
      // Scaled quadratic form: [[a11/x, a12/(2 sqrt x)], [., a22]].
      const double m11 = c.a11 / x, m12 = 0.5 * c.a12 / std::sqrt(x), m22 = c.a22;
      const double tr = m11 + m22, det = m11 * m22 - m12 * m12;
      const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
      const double lo = 0.5 * tr - disc, hi = 0.5 * tr + disc;
      lam_min = std::min(lam_min, lo);
      lam_max = std::max(lam_max, hi);
    }
    CHECK(lam_min > 0.0);     // uniform lower ellipticity bound exists...
    CHECK(lam_max < 100.0);   // ...and an upper one; both are measured, not assumed
  }

  SUBCASE("O-term growth bounds on admitted inputs") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> ux(1e-4, 0.1 * c2);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    double N1 = 0.0, Nk = 0.0;
    for (int k = 0; k < 4000; ++k) {
      const double x = ux(rng);
      const SonicCoeffs c = sonic_coefficients({u01(rng) * x, u01(rng) * x}, u01(rng) * x * x, x,
                                               c2, gas, cut);
      N1 = std::max(N1, std::fabs(c.O[0]) / (x * x));
      for (int i = 1; i < 5; ++i) Nk = std::max(Nk, std::fabs(c.O[i]) / x);
    }
    CHECK(N1 < 50.0);
    CHECK(Nk < 50.0);
  }

  CHECK_THROWS_AS(sonic_coefficients({0, 0}, 0.0, -0.1, c2, gas, cut), std::domain_error);
}

TEST_CASE("ellipticity margin of constant states") {
  GasLaw gas{1.4, 1.0};
  GasLaw g = gas;
  g.bernoulli = 1.2;
  const Vec2 v{0.3, 0.1};
  // Constant state phi = -|xi|^2/2 + v.xi inside a box straddling its sonic circle.
  auto map = [](double s, double t) { return Vec2{-1.5 + 3.0 * s, 0.1 + 1.4 * t}; };
  const MappedDomain dom = MappedDomain::from_map(
      33, 33, map, {EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall});
  Field phi("phi", dom.size());
  for (int k = 0; k < dom.size(); ++k)
    phi.v[k] = -0.5 * dom.nodes[k].norm_sq() + v.dot(dom.nodes[k]);
  const EllipticityReport rep = ellipticity_margin(phi, dom, g);
  const double csq = g.bernoulli - (g.gamma - 1.0) * 0.5 * v.norm_sq();
  for (int k = 0; k < dom.size(); ++k) {
    const double expect = csq - (v - dom.nodes[k]).norm_sq();
    CHECK(rep.margin[k] == doctest::Approx(expect).epsilon(5e-4));
    if ((v - dom.nodes[k]).norm() < 0.8 * std::sqrt(csq)) CHECK(rep.margin[k] > 0.0);
    if ((v - dom.nodes[k]).norm() > 1.2 * std::sqrt(csq)) CHECK(rep.margin[k] < 0.0);
  }
}
