#include "tsfbp/fbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsfbp {

namespace {

/// Fritsch-Carlson monotone cubic slopes for knots (T, f).
std::vector<double> fc_slopes(const std::vector<double>& T, const std::vector<double>& f,
                              EndCondition e0, EndCondition e1) {
  const int n = int(T.size());
  std::vector<double> m(n, 0.0);
  if (n == 1) return m;
  std::vector<double> d(n - 1);
  for (int k = 0; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k]) / (T[k + 1] - T[k]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (int k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0)
      m[k] = 0.0;
    else {
      const double w1 = 2.0 * (T[k + 1] - T[k]) + (T[k] - T[k - 1]);
      const double w2 = (T[k + 1] - T[k]) + 2.0 * (T[k] - T[k - 1]);
      m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }
  if (e0 == EndCondition::ZeroSlope) m[0] = 0.0;
  if (e1 == EndCondition::ZeroSlope) m[n - 1] = 0.0;
  return m;
}

int find_interval(const std::vector<double>& T, double t) {
  const int n = int(T.size());
  if (t <= T.front()) return 0;
  if (t >= T[n - 2]) return n - 2;
  int lo = 0, hi = n - 2;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (T[mid] <= t)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

}  // namespace

std::vector<double> FreeBoundaryGraph::slopes() const { return fc_slopes(T, f, end0, end1); }

double FreeBoundaryGraph::eval(double t) const {
  if (T.size() < 2) return f.empty() ? 0.0 : f.front();
  const std::vector<double> m = slopes();
  const int k = find_interval(T, t);
  const double h = T[k + 1] - T[k];
  const double s = (t - T[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * f[k] + h * h10 * m[k] + h01 * f[k + 1] + h * h11 * m[k + 1];
}

double FreeBoundaryGraph::deriv(double t) const {
  if (T.size() < 2) return 0.0;
  const std::vector<double> m = slopes();
  const int k = find_interval(T, t);
  const double h = T[k + 1] - T[k];
  const double s = (t - T[k]) / h;
  const double d00 = 6 * s * (s - 1) / h, d10 = (1 - s) * (1 - 3 * s);
  const double d01 = -6 * s * (s - 1) / h, d11 = s * (3 * s - 2);
  return d00 * f[k] + d10 * m[k] + d01 * f[k + 1] + d11 * m[k + 1];
}

double FreeBoundaryGraph::lipschitz() const {
  double lip = 0.0;
  for (size_t k = 0; k + 1 < T.size(); ++k)
    lip = std::max(lip, std::fabs((f[k + 1] - f[k]) / (T[k + 1] - T[k])));
  return lip;
}

Vec2 boundary_normal(const FreeBoundaryGraph& g, double t) {
  const double fp = g.deriv(t);
  const double scale = 1.0 / std::sqrt(1.0 + fp * fp);
  // nu = (-f', 1)/sqrt(1+f'^2) in (T, S) components: along eperp and e.
  return scale * (g.frame.e - fp * g.frame.eperp);
}

Vec2 boundary_tangent(const FreeBoundaryGraph& g, double t) {
  const double fp = g.deriv(t);
  const double scale = 1.0 / std::sqrt(1.0 + fp * fp);
  return scale * (g.frame.eperp + fp * g.frame.e);
}

FreeBoundaryGraph extract_boundary(const LevelSampler& w, const Frame& frame,
                                   const std::vector<double>& knots,
                                   const std::vector<double>& s_guess, double floor,
                                   double s_halfwidth) {
  if (knots.size() != s_guess.size())
    throw std::invalid_argument("extract_boundary: knots and guesses must align");
  FreeBoundaryGraph g;
  g.frame = frame;
  g.T = knots;
  g.f.resize(knots.size());
  double worst_slope = std::numeric_limits<double>::infinity();
  int worst_knot = -1;
  for (size_t k = 0; k < knots.size(); ++k) {
    const double t = knots[k];
    auto sample = [&](double s) { return w(frame.to_phys(s, t)); };
    double lo = s_guess[k] - s_halfwidth, hi = s_guess[k] + s_halfwidth;
    LevelSample a = sample(lo), b = sample(hi);
    // w decreases along +S (the elliptic side has w > 0 below the root).
    int expand = 0;
    while (a.value * b.value > 0.0 && expand < 40) {
      if (std::fabs(a.value) < std::fabs(b.value))
        lo -= s_halfwidth;
      else
        hi += s_halfwidth;
      a = sample(lo);
      b = sample(hi);
      ++expand;
    }
    if (a.value * b.value > 0.0)
      throw std::runtime_error("extract_boundary: no sign change near knot " + std::to_string(k));
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const LevelSample m = sample(mid);
      if ((m.value > 0.0) == (a.value > 0.0)) {
        lo = mid;
        a = m;
      } else {
        hi = mid;
      }
    }
    double s = 0.5 * (lo + hi);
    LevelSample at = sample(s);
    if (std::fabs(at.dS) < worst_slope) {
      worst_slope = std::fabs(at.dS);
      worst_knot = int(k);
    }
    if (std::fabs(at.dS) > floor) s -= at.value / at.dS;  // Newton polish
    g.f[k] = s;
  }
  if (worst_slope < floor)
    throw std::runtime_error("extract_boundary: nondegeneracy violated at knot " +
                             std::to_string(worst_knot) + " (|dS w| = " +
                             std::to_string(worst_slope) + " < floor " + std::to_string(floor) + ")");
  return g;
}

IterationState drive_fixed_point(const FixedPointProblem& problem, const IterationConfig& config,
                                 IterationState init) {
  IterationState state = std::move(init);
  state.converged = false;
  double damping = config.theta_relax;
  double prev_delta = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= config.max_outer; ++it) {
    Field solved = problem.solve_interior(state.boundary, state.field);
    FreeBoundaryGraph proposal = problem.propose_boundary(state.boundary, solved);
    if (proposal.T.size() != state.boundary.T.size())
      throw std::runtime_error("drive_fixed_point: proposal changed the knot layout");

    const size_t nk = proposal.f.size();
    std::vector<double> incr(nk);
    double delta = 0.0;
    for (size_t k = 0; k < nk; ++k) {
      incr[k] = proposal.f[k] - state.boundary.f[k];
      delta = std::max(delta, std::fabs(incr[k]));
    }

    if (config.adapt_damping && delta > prev_delta * 1.2 && damping > 0.05) damping *= 0.5;
    prev_delta = delta;

    if (config.filter_increment && nk >= 3) {
      // [1/6, 2/3, 1/6]: strictly positive transfer function, so a stationary
      // boundary still forces a vanishing mismatch, while grid-scale update
      // modes are damped threefold.
      std::vector<double> sm(nk);
      sm[0] = (5.0 * incr[0] + incr[1]) / 6.0;
      sm[nk - 1] = (5.0 * incr[nk - 1] + incr[nk - 2]) / 6.0;
      for (size_t k = 1; k + 1 < nk; ++k)
        sm[k] = (incr[k - 1] + 4.0 * incr[k] + incr[k + 1]) / 6.0;
      incr = std::move(sm);
    }

    for (size_t k = 0; k < nk; ++k) proposal.f[k] = state.boundary.f[k] + damping * incr[k];
    state.boundary = proposal;
    state.field = std::move(solved);

    const double fres =
        problem.interior_residual ? problem.interior_residual(state.boundary, state.field) : 0.0;
    state.history.push_back({it, delta, fres, damping});
    if (problem.on_iteration) problem.on_iteration(it, state);

    if (delta < config.tol_boundary && fres < config.tol_field) {
      state.converged = true;
      break;
    }
  }
  return state;
}

ContinuationResult continuation(
    const std::function<FixedPointProblem(double)>& family,
    const std::function<IterationState(double, const IterationState*)>& initial_state,
    const std::vector<double>& schedule, const IterationConfig& config, double min_step) {
  ContinuationResult result;
  if (schedule.empty()) return result;
  const IterationState* warm = nullptr;

  double current = schedule.front();
  {
    IterationState st = drive_fixed_point(family(current), config, initial_state(current, nullptr));
    if (!st.converged) return result;
    result.parameters.push_back(current);
    result.states.push_back(std::move(st));
    result.last_good = current;
    warm = &result.states.back();
  }

  for (size_t k = 1; k < schedule.size(); ++k) {
    double target = schedule[k];
    while (true) {
      IterationState st = drive_fixed_point(family(target), config, initial_state(target, warm));
      if (st.converged) {
        result.parameters.push_back(target);
        result.states.push_back(std::move(st));
        result.last_good = target;
        warm = &result.states.back();
        if (std::fabs(target - schedule[k]) < 1e-15) break;
        target = schedule[k];  // resume toward the scheduled value
        continue;
      }
      const double step = target - result.last_good;
      if (std::fabs(step) * 0.5 < min_step) return result;  // partial result
      target = result.last_good + 0.5 * step;
    }
  }
  result.complete = true;
  return result;
}

}  // namespace tsfbp
