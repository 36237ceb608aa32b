#include "tsfbp/duct.hpp"

#include <cmath>

namespace tsfbp {

DuctBackground duct_background(double q_minus, const GasLaw& gas) {
  const double ps = sonic_point(1.0, gas);
  const double pmax = std::sqrt(2.0 / (gas.gamma - 1.0));
  if (!(q_minus > ps) || !(q_minus < pmax))
    throw std::domain_error(
        "duct_background: q_minus must be supersonic, in (p_sonic, sqrt(2/(gamma-1)))");
  DuctBackground bg;
  bg.q_minus = q_minus;
  bg.q_plus = conjugate_state(q_minus, gas);
  return bg;
}

AnalyticPhase duct_phi_minus(const DuctConfig& config, const DuctBackground& bg) {
  const double qm = bg.q_minus;
  const double sigma = config.sigma;
  const AnalyticPhase pert = config.perturbation;
  return [qm, sigma, pert](const Vec2& x) {
    PhaseSample s{qm * x.y, {0.0, qm}};
    if (sigma != 0.0 && pert) {
      const PhaseSample p = pert(x);
      s.value += sigma * p.value;
      s.grad = s.grad + sigma * p.grad;
    }
    return s;
  };
}

MappedDomain duct_domain(const FreeBoundaryGraph& f, int n1, int n2) {
  auto lin = [&f](double s) {
    const int n = int(f.T.size());
    int k = 0; while (k + 2 < n && f.T[k+1] < s) ++k;
    const double a = (s - f.T[k]) / (f.T[k+1] - f.T[k]);
    return (1-a)*f.f[k] + a*f.f[k+1];
  };
  auto map = [&f, lin](double s, double t) {
    const double fb = lin(s);
    return Vec2{s, fb + t * (1.0 - fb)};
  };
  return MappedDomain::from_map(
      n1, n2, map, {EdgeTag::Free, EdgeTag::Wall, EdgeTag::Outflow, EdgeTag::Wall});
}

namespace {

Frame duct_frame() { return Frame{{0.0, 1.0}, {1.0, 0.0}}; }  // S = x2, T = x1

FreeBoundaryGraph flat_boundary(int n1) {
  FreeBoundaryGraph g;
  g.frame = duct_frame();
  g.end0 = g.end1 = EndCondition::ZeroSlope;  // D_{x'} f = 0 on the walls
  g.T.resize(n1);
  g.f.assign(n1, 0.0);
  for (int i = 0; i < n1; ++i) g.T[i] = double(i) / (n1 - 1);
  return g;
}

Field solve_phi(const MappedDomain& dom, const TruncatedGasLaw& trunc, const AnalyticPhase& phim,
                const DuctBackground& bg, const GasLaw& gas, const Field& init,
                const SolveOptions& inner, ConvergenceRecord* rec) {
  DivFormModel model;
  model.coeff = [&trunc](const Vec2&, double, const Vec2& grad_prev) {
    const double r = trunc.rho(grad_prev.norm_sq());
    return Mat2{r, 0.0, 0.0, r};
  };

  auto zero_flux = BoundaryCondition::conormal([](const Vec2&, const Vec2&) { return 0.0; });
  std::array<BoundaryCondition, 4> bcs = {
      // south = shock: untruncated upstream mass flux through the face
      BoundaryCondition::conormal([&phim, &gas](const Vec2& x, const Vec2& nu) {
        const PhaseSample s = phim(x);
        return density_steady(s.grad.norm_sq(), gas) * s.grad.dot(nu);
      }),
      zero_flux,                                                                // east wall
      BoundaryCondition::dirichlet([&bg](const Vec2&) { return bg.q_plus; }),   // north outflow
      zero_flux,                                                                // west wall
  };
  return solve_divform(dom, model, bcs, init, inner, rec);
}

}  // namespace

DuctSolution duct_solve(const DuctConfig& config) {
  DuctSolution sol;
  sol.config = config;
  sol.background = duct_background(config.q_minus, config.gas);
  sol.truncation = build_truncation(sol.background.q_plus, config.gas);
  sol.phi_minus = duct_phi_minus(config, sol.background);

  const int n1 = config.n1, n2 = config.n2;
  const DuctBackground bg = sol.background;
  const GasLaw gas = config.gas;
  const TruncatedGasLaw trunc = sol.truncation;
  const AnalyticPhase phim = sol.phi_minus;
  if (bg.q_minus - bg.q_plus < 2.0 * config.iteration.nondeg_floor)
    throw std::domain_error("duct_solve: free-boundary condition degenerate, q- too close to q+");

  // Interior solve on the domain of the current boundary, then propose the
  // new boundary from the level set of w = phi^- - phi.
  FixedPointProblem problem;
  SolveOptions inner = config.inner;
  problem.solve_interior = [=](const FreeBoundaryGraph& f, const Field& prev) {
    const MappedDomain dom = duct_domain(f, n1, n2);
    Field init = prev;
    if (int(init.v.size()) != dom.size()) {
      init = Field("phi", dom.size());
      for (int k = 0; k < dom.size(); ++k) init.v[k] = bg.q_plus * dom.nodes[k].y;
    }
    ConvergenceRecord rec;
    Field phi = solve_phi(dom, trunc, phim, bg, gas, init, inner, &rec);
    if (!rec.converged)
      throw std::runtime_error("duct_solve: interior Picard iteration did not converge");
    phi.quantity = "phi";
    return phi;
  };
  problem.propose_boundary = [=](const FreeBoundaryGraph& f, const Field& phi) {
    // Newton step on the value mismatch w = phi^- - phi at the boundary nodes,
    // with the background nondegeneracy slope as the Jacobian.
    const MappedDomain dom = duct_domain(f, n1, n2);
    FreeBoundaryGraph next = f;
    for (int i = 0; i < n1; ++i) {
      const Vec2 p = dom.node(i, 0);
      const double mismatch = phim(p).value - phi.v[dom.idx(i, 0)];
      next.f[i] = f.f[i] - mismatch / (bg.q_minus - bg.q_plus);
    }
    next.end0 = next.end1 = EndCondition::ZeroSlope;
    return next;
  };
  problem.interior_residual = [=](const FreeBoundaryGraph& f, const Field& phi) {
    // Value mismatch |phi - phi^-| along the current shock.
    const MappedDomain dom = duct_domain(f, n1, n2);
    const FieldSampler sampler(dom, phi);
    double worst = 0.0;
    for (size_t k = 0; k < f.T.size(); ++k) {
      const Vec2 p = f.knot_point(int(k));
      worst = std::max(worst, std::fabs(sampler.value(p) - phim(p).value));
    }
    return worst;
  };

  IterationState init;
  init.boundary = flat_boundary(n1);
  sol.state = drive_fixed_point(problem, config.iteration, std::move(init));
  if (!sol.state.converged) {
    std::string trace;
    for (const OuterRecord& r : sol.state.history)
      if (r.iteration % 5 == 0 || r.iteration + 3 > int(sol.state.history.size()))
        trace += " [" + std::to_string(r.iteration) + "] d=" + std::to_string(r.boundary_delta) +
                 " th=" + std::to_string(r.damping);
    throw std::runtime_error("duct_solve: outer free-boundary iteration did not converge after " +
                             std::to_string(config.iteration.max_outer) + " iterations;" + trace);
  }
  sol.outer_iterations = int(sol.state.history.size());
  sol.domain = duct_domain(sol.state.boundary, n1, n2);
  return sol;
}

std::vector<double> DuctSolution::rh_residuals() const {
  std::vector<double> res(state.boundary.T.size(), 0.0);
  const std::vector<Vec2> grads = gradient(domain, state.field);
  for (int i = 0; i < domain.n1; ++i) {
    const double t = state.boundary.T[i];
    const Vec2 nu = boundary_normal(state.boundary, t);
    const Vec2 gplus = grads[domain.idx(i, 0)];
    const PhaseSample minus = phi_minus(domain.node(i, 0));
    const double flux_plus = density_steady(gplus.norm_sq(), config.gas) * gplus.dot(nu);
    const double flux_minus = density_steady(minus.grad.norm_sq(), config.gas) * minus.grad.dot(nu);
    res[i] = std::fabs(flux_plus - flux_minus);
  }
  return res;
}

Field DuctSolution::u_field() const {
  Field u("u", domain.size());
  for (int k = 0; k < domain.size(); ++k)
    u.v[k] = phi_minus(domain.nodes[k]).value - state.field.v[k];
  return u;
}

bool DuctSolution::truncation_active() const {
  const std::vector<Vec2> grads = gradient(domain, state.field);
  const double lim = truncation.p_star;
  for (const Vec2& g : grads)
    if (g.norm() >= lim) return true;
  return false;
}

}  // namespace tsfbp
