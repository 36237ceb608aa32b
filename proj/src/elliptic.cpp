#include "tsfbp/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace tsfbp {

double TruncatedGasLaw::rho(double q_sq) const {
  const double q = std::sqrt(std::max(0.0, q_sq));
  if (q < p_star) return density_steady(q_sq, base);
  return c0 + c1 / q;
}

double TruncatedGasLaw::drho(double q_sq) const {
  const double q = std::sqrt(std::max(1e-300, q_sq));
  if (q < p_star) {
    const double gm1 = base.gamma - 1.0;
    const double b = 1.0 - 0.5 * gm1 * q_sq;
    return -0.5 * std::pow(b, (2.0 - base.gamma) / gm1);
  }
  return -0.5 * c1 * std::pow(q_sq, -1.5);
}

double TruncatedGasLaw::flux_slope(double q) const {
  const double s = q * q;
  return rho(s) + 2.0 * s * drho(s);
}

TruncatedGasLaw build_truncation(double q_plus, const GasLaw& gas) {
  gas.validate();
  const double ps = sonic_point(1.0, gas);
  if (!(q_plus > 0.0) || !(q_plus < ps))
    throw std::domain_error("build_truncation: q_plus must lie in (0, p_sonic(1))");
  TruncatedGasLaw t;
  t.base = gas;
  t.q_plus = q_plus;
  t.epsilon = 0.5 * (ps - q_plus);
  t.p_star = ps - t.epsilon;
  t.c0 = mass_flux_deriv(t.p_star, 1.0, gas);
  t.c1 = mass_flux(t.p_star, 1.0, gas) - t.c0 * t.p_star;
  return t;
}

double SonicCutoff::eta(double s, const GasLaw& gas) const {
  const double a = 4.0 / (3.0 * (gas.gamma + 1.0));
  const double b = 5.0 / (3.0 * (gas.gamma + 1.0));
  if (s >= -a && s <= a) return s;
  if (s > a) return b - (b - a) * std::exp(-(s - a) / (b - a));
  return -(b - (b - a) * std::exp(-(-s - a) / (b - a)));
}

namespace {

SonicCoeffs assemble_sonic(const Vec2& dpsi, double psi, double x, double c2, const GasLaw& gas,
                           double leading_px) {
  const double g = gas.gamma;
  const double px = dpsi.x, py = dpsi.y;
  const double r = c2 - x;
  SonicCoeffs c;
  c.O[0] = -x * x / c2 + (g + 1.0) / (2.0 * c2) * (2.0 * x - px) * px -
           (g - 1.0) / c2 * (psi + py * py / (2.0 * r * r));
  c.O[1] = -2.0 * (px + r) * py / (c2 * r * r);
  c.O[2] = (x * (2.0 * c2 - x) - (g - 1.0) * (psi + r * px + 0.5 * px * px) -
            (g + 1.0) * py * py / (2.0 * r * r)) /
           (c2 * r * r);
  c.O[3] = (x - (g - 1.0) / c2 *
                    (psi + r * px + 0.5 * px * px + (g + 1.0) * py * py / (2.0 * (g - 1.0) * r * r))) /
           r;
  c.O[4] = -2.0 * (px + r) * py / (c2 * r * r * r);
  c.a11 = 2.0 * x - (g + 1.0) * leading_px + c.O[0];
  c.a12 = c.O[1];
  c.a22 = 1.0 / c2 + c.O[2];
  c.b1 = -(1.0 + c.O[3]);
  c.b2 = c.O[4];
  return c;
}

}  // namespace

SonicCoeffs sonic_coefficients_exact(const Vec2& dpsi, double psi, double x, double c2,
                                     const GasLaw& gas) {
  if (!(x > 0.0)) throw std::domain_error("sonic_coefficients: need x > 0");
  return assemble_sonic(dpsi, psi, x, c2, gas, dpsi.x);
}

SonicCoeffs sonic_coefficients(const Vec2& dpsi_hat, double psi_hat, double x, double c2,
                               const GasLaw& gas, const SonicCutoff& cutoff) {
  if (!(x > 0.0)) throw std::domain_error("sonic_coefficients: need x > 0");
  // Clamp the frozen iterate so the O-term bounds |O1| <= N x^2, |Ok| <= N x and
  // the degenerate ellipticity sandwich hold for any input.
  const double g1 = gas.gamma + 1.0;
  const double vcap = 2.0 / g1 * x * x;
  const double ycap = 0.5 * x;
  const double px_cut = x * cutoff.eta(dpsi_hat.x / x, gas);
  const Vec2 dcut{px_cut, std::clamp(dpsi_hat.y, -ycap, ycap)};
  const double pcut = std::clamp(psi_hat, -vcap, vcap);
  return assemble_sonic(dcut, pcut, x, c2, gas, px_cut);
}

// ---------------------------------------------------------------------------
// Finite-difference assembly on the mapped grid.
// ---------------------------------------------------------------------------

namespace {

using Trip = Eigen::Triplet<double>;

struct StencilRow {
  std::vector<Trip>* trips;
  int row;
  double* rhs;
  void add(int col, double w) { trips->emplace_back(row, col, w); }
};

/// Weights of a second-order first-derivative stencil along one index line.
/// Returns up to 3 (offset, weight) pairs; offsets are grid indices.
int d1_weights(int k, int n, double h, int off[3], double w[3]) {
  if (k == 0) {
    off[0] = 0; off[1] = 1; off[2] = 2;
    w[0] = -1.5 / h; w[1] = 2.0 / h; w[2] = -0.5 / h;
    return 3;
  }
  if (k == n - 1) {
    off[0] = n - 1; off[1] = n - 2; off[2] = n - 3;
    w[0] = 1.5 / h; w[1] = -2.0 / h; w[2] = 0.5 / h;
    return 3;
  }
  off[0] = k - 1; off[1] = k + 1;
  w[0] = -0.5 / h; w[1] = 0.5 / h;
  return 2;
}

struct DivAssembler {
  const MappedDomain& d;
  const std::array<BoundaryCondition, 4>& bcs;
  std::vector<Mat2> G;       // J * Jinv * K * Jinv^T per node
  std::vector<double> rhsF;  // J * F per node

  DivAssembler(const MappedDomain& dom, const DivFormModel& model,
               const std::array<BoundaryCondition, 4>& b, const Field& prev)
      : d(dom), bcs(b), G(dom.size()), rhsF(dom.size(), 0.0) {
    const std::vector<Vec2> gp = gradient(d, prev);
    for (int k = 0; k < d.size(); ++k) {
      const Mat2 K = model.coeff(d.nodes[k], prev.v[k], gp[k]);
      const Mat2 JI = d.inv[k];
      // G = J * JI * K * JI^T
      Mat2 m = JI * K * JI.transpose();
      m.a *= d.jac[k]; m.b *= d.jac[k]; m.c *= d.jac[k]; m.d *= d.jac[k];
      G[k] = m;
      rhsF[k] = model.rhs ? d.jac[k] * model.rhs(d.nodes[k]) : 0.0;
    }
  }

  /// Tangential derivative stencil (direction `dir`: 0 = s, 1 = t) at node (i,j),
  /// emitted into the row with multiplier `mult`.
  void add_deriv(StencilRow& r, int i, int j, int dir, double mult) const {
    int off[3]; double w[3];
    if (dir == 0) {
      const int m = d1_weights(i, d.n1, d.hs, off, w);
      for (int q = 0; q < m; ++q) r.add(d.idx(off[q], j), mult * w[q]);
    } else {
      const int m = d1_weights(j, d.n2, d.ht, off, w);
      for (int q = 0; q < m; ++q) r.add(d.idx(i, off[q]), mult * w[q]);
    }
  }

  /// Emit the s-face flux F^s at (i+1/2, j) with multiplier `mult`.
  void flux_s(StencilRow& r, int i, int j, double mult) const {
    const double g11 = 0.5 * (G[d.idx(i, j)].a + G[d.idx(i + 1, j)].a);
    const double g12 = 0.5 * (G[d.idx(i, j)].b + G[d.idx(i + 1, j)].b);
    r.add(d.idx(i + 1, j), mult * g11 / d.hs);
    r.add(d.idx(i, j), -mult * g11 / d.hs);
    add_deriv(r, i, j, 1, 0.5 * mult * g12);
    add_deriv(r, i + 1, j, 1, 0.5 * mult * g12);
  }

  /// Emit the t-face flux F^t at (i, j+1/2) with multiplier `mult`.
  void flux_t(StencilRow& r, int i, int j, double mult) const {
    const double g21 = 0.5 * (G[d.idx(i, j)].c + G[d.idx(i, j + 1)].c);
    const double g22 = 0.5 * (G[d.idx(i, j)].d + G[d.idx(i, j + 1)].d);
    r.add(d.idx(i, j + 1), mult * g22 / d.ht);
    r.add(d.idx(i, j), -mult * g22 / d.ht);
    add_deriv(r, i, j, 0, 0.5 * mult * g21);
    add_deriv(r, i, j + 1, 0, 0.5 * mult * g21);
  }

  /// Physical boundary flux scale: length of the edge tangent per unit parameter.
  double edge_scale(Side side, int i, int j) const {
    const Mat2& F = d.fwd[d.idx(i, j)];
    if (side == Side::South || side == Side::North) return std::hypot(F.a, F.c);  // |x_s|
    return std::hypot(F.b, F.d);                                                  // |x_t|
  }

  /// Outward unit normal of the given edge at node (i, j).
  Vec2 outward_normal(Side side, int i, int j) const {
    const Mat2& JI = d.inv[d.idx(i, j)];
    Vec2 n;
    switch (side) {
      case Side::South: n = {-JI.c, -JI.d}; break;  // -grad t
      case Side::North: n = {JI.c, JI.d}; break;
      case Side::West: n = {-JI.a, -JI.b}; break;   // -grad s
      case Side::East: n = {JI.a, JI.b}; break;
    }
    return n.normalized();
  }

  double conormal_data(Side side, int i, int j) const {
    const Vec2& x = d.nodes[d.idx(i, j)];
    return bcs[int(side)].conormal_g(x, outward_normal(side, i, j));
  }
};

void assemble_divform(const MappedDomain& d, const DivFormModel& model,
                      const std::array<BoundaryCondition, 4>& bcs, const Field& prev,
                      Eigen::SparseMatrix<double>& M, Eigen::VectorXd& b) {
  DivAssembler A(d, model, bcs, prev);
  std::vector<Trip> trips;
  trips.reserve(size_t(d.size()) * 12);
  b = Eigen::VectorXd::Zero(d.size());

  auto bc_of = [&](Side s) -> const BoundaryCondition& { return bcs[int(s)]; };

  for (int j = 0; j < d.n2; ++j) {
    for (int i = 0; i < d.n1; ++i) {
      const int row = d.idx(i, j);
      StencilRow r{&trips, row, nullptr};
      const bool s_lo = (j == 0), s_hi = (j == d.n2 - 1);
      const bool w_lo = (i == 0), w_hi = (i == d.n1 - 1);

      // Decide the row type: Dirichlet wins at shared corners, then oblique.
      const BoundaryCondition* dirich = nullptr;
      const BoundaryCondition* obli = nullptr;
      Side obli_side = Side::South;
      int n_conormal = 0;
      auto consider = [&](bool on, Side side) {
        if (!on) return;
        const BoundaryCondition& bc = bc_of(side);
        if (bc.kind == BoundaryCondition::Kind::Dirichlet && !dirich) dirich = &bc;
        if (bc.kind == BoundaryCondition::Kind::Oblique && !obli) {
          obli = &bc;
          obli_side = side;
        }
        if (bc.kind == BoundaryCondition::Kind::Conormal) ++n_conormal;
      };
      consider(s_lo, Side::South);
      consider(s_hi, Side::North);
      consider(w_lo, Side::West);
      consider(w_hi, Side::East);

      if (dirich) {
        trips.emplace_back(row, row, 1.0);
        b[row] = dirich->g(d.nodes[row]);
        continue;
      }
      if (obli) {
        const Vec2 bb = obli->oblique_b(d.nodes[row]);
        const Mat2& JI = d.inv[row];
        const double bs = JI.a * bb.x + JI.c * bb.y;
        const double bt = JI.b * bb.x + JI.d * bb.y;
        A.add_deriv(r, i, j, 0, bs);
        A.add_deriv(r, i, j, 1, bt);
        b[row] = obli->g(d.nodes[row]);
        (void)obli_side;
        continue;
      }

      // Conservative balance; half/quarter cells along conormal edges. The
      // prescribed boundary flux A.nu_out always enters the balance with a
      // positive sign once orientation (J > 0) is fixed.
      const double inv_scale = 1.0 / d.jac[row];  // rows in pointwise-divergence units
      const double fs = (w_lo || w_hi) ? 2.0 : 1.0;
      const double ft = (s_lo || s_hi) ? 2.0 : 1.0;
      double bc_flux = 0.0;

      // s-direction fluxes
      if (!w_hi)
        A.flux_s(r, i, j, inv_scale * fs / d.hs);
      else
        bc_flux += inv_scale * fs / d.hs *
                   (A.conormal_data(Side::East, i, j) * A.edge_scale(Side::East, i, j));
      if (!w_lo)
        A.flux_s(r, i - 1, j, -inv_scale * fs / d.hs);
      else
        bc_flux += inv_scale * fs / d.hs *
                   (A.conormal_data(Side::West, i, j) * A.edge_scale(Side::West, i, j));
      // t-direction fluxes
      if (!s_hi)
        A.flux_t(r, i, j, inv_scale * ft / d.ht);
      else
        bc_flux += inv_scale * ft / d.ht *
                   (A.conormal_data(Side::North, i, j) * A.edge_scale(Side::North, i, j));
      if (!s_lo)
        A.flux_t(r, i, j - 1, -inv_scale * ft / d.ht);
      else
        bc_flux += inv_scale * ft / d.ht *
                   (A.conormal_data(Side::South, i, j) * A.edge_scale(Side::South, i, j));

      b[row] = inv_scale * A.rhsF[row] - bc_flux;
    }
  }

  M.resize(d.size(), d.size());
  M.setFromTriplets(trips.begin(), trips.end());
}

void assemble_nondiv(const MappedDomain& d, const NonDivModel& model,
                     const std::array<BoundaryCondition, 4>& bcs, const Field& prev,
                     Eigen::SparseMatrix<double>& M, Eigen::VectorXd& b) {
  // Inverse-map first derivatives and their physical derivatives.
  const int n = d.size();
  std::vector<double> sx(n), sy(n), tx(n), ty(n);
  for (int k = 0; k < n; ++k) {
    sx[k] = d.inv[k].a;
    sy[k] = d.inv[k].b;
    tx[k] = d.inv[k].c;
    ty[k] = d.inv[k].d;
  }
  auto phys_deriv = [&](const std::vector<double>& q, std::vector<double>& qx,
                        std::vector<double>& qy) {
    std::vector<double> qs, qt;
    diff_st(d, q, qs, qt);
    qx.resize(n);
    qy.resize(n);
    for (int k = 0; k < n; ++k) {
      qx[k] = sx[k] * qs[k] + tx[k] * qt[k];
      qy[k] = sy[k] * qs[k] + ty[k] * qt[k];
    }
  };
  std::vector<double> sxx, sxy, syx, syy, txx, txy, tyx, tyy;
  phys_deriv(sx, sxx, sxy);
  phys_deriv(sy, syx, syy);
  phys_deriv(tx, txx, txy);
  phys_deriv(ty, tyx, tyy);

  const std::vector<Vec2> gp = gradient(d, prev);

  std::vector<Trip> trips;
  trips.reserve(size_t(n) * 10);
  b = Eigen::VectorXd::Zero(n);

  auto bc_of = [&](Side s) -> const BoundaryCondition& { return bcs[int(s)]; };

  for (int j = 0; j < d.n2; ++j) {
    for (int i = 0; i < d.n1; ++i) {
      const int row = d.idx(i, j);
      StencilRow r{&trips, row, nullptr};
      const bool s_lo = (j == 0), s_hi = (j == d.n2 - 1);
      const bool w_lo = (i == 0), w_hi = (i == d.n1 - 1);

      if (s_lo || s_hi || w_lo || w_hi) {
        const BoundaryCondition* dirich = nullptr;
        const BoundaryCondition* obli = nullptr;
        auto consider = [&](bool on, Side side) {
          if (!on) return;
          const BoundaryCondition& bc = bc_of(side);
          if (bc.kind == BoundaryCondition::Kind::Dirichlet && !dirich) dirich = &bc;
          if (bc.kind == BoundaryCondition::Kind::Oblique && !obli) obli = &bc;
          if (bc.kind == BoundaryCondition::Kind::Conormal)
            throw std::invalid_argument("solve_nondiv: conormal conditions unsupported here");
        };
        consider(s_lo, Side::South);
        consider(s_hi, Side::North);
        consider(w_lo, Side::West);
        consider(w_hi, Side::East);
        if (dirich) {
          trips.emplace_back(row, row, 1.0);
          b[row] = dirich->g(d.nodes[row]);
        } else if (obli) {
          const Vec2 bb = obli->oblique_b(d.nodes[row]);
          const double bs = sx[row] * bb.x + sy[row] * bb.y;
          const double bt = tx[row] * bb.x + ty[row] * bb.y;
          int off[3];
          double w[3];
          int m = d1_weights(i, d.n1, d.hs, off, w);
          for (int q = 0; q < m; ++q) r.add(d.idx(off[q], j), bs * w[q]);
          m = d1_weights(j, d.n2, d.ht, off, w);
          for (int q = 0; q < m; ++q) r.add(d.idx(i, off[q]), bt * w[q]);
          b[row] = obli->g(d.nodes[row]);
        } else {
          throw std::invalid_argument("solve_nondiv: every edge needs Dirichlet or oblique data");
        }
        continue;
      }

      const NonDivModel::Coeffs cf = model.coeff(d.nodes[row], prev.v[row], gp[row]);
      const double Ass = cf.a11 * sx[row] * sx[row] + 2.0 * cf.a12 * sx[row] * sy[row] +
                         cf.a22 * sy[row] * sy[row];
      const double Ast = 2.0 * (cf.a11 * sx[row] * tx[row] +
                                cf.a12 * (sx[row] * ty[row] + sy[row] * tx[row]) +
                                cf.a22 * sy[row] * ty[row]);
      const double Att = cf.a11 * tx[row] * tx[row] + 2.0 * cf.a12 * tx[row] * ty[row] +
                         cf.a22 * ty[row] * ty[row];
      const double Bs = cf.a11 * sxx[row] + 2.0 * cf.a12 * sxy[row] + cf.a22 * syy[row] +
                        cf.b1 * sx[row] + cf.b2 * sy[row];
      const double Bt = cf.a11 * txx[row] + 2.0 * cf.a12 * txy[row] + cf.a22 * tyy[row] +
                        cf.b1 * tx[row] + cf.b2 * ty[row];

      const double hs2 = d.hs * d.hs, ht2 = d.ht * d.ht;
      r.add(d.idx(i - 1, j), Ass / hs2 - Bs / (2.0 * d.hs));
      r.add(d.idx(i + 1, j), Ass / hs2 + Bs / (2.0 * d.hs));
      r.add(d.idx(i, j - 1), Att / ht2 - Bt / (2.0 * d.ht));
      r.add(d.idx(i, j + 1), Att / ht2 + Bt / (2.0 * d.ht));
      r.add(row, -2.0 * Ass / hs2 - 2.0 * Att / ht2 + cf.c0);
      const double cw = Ast / (4.0 * d.hs * d.ht);
      r.add(d.idx(i + 1, j + 1), cw);
      r.add(d.idx(i - 1, j - 1), cw);
      r.add(d.idx(i + 1, j - 1), -cw);
      r.add(d.idx(i - 1, j + 1), -cw);
      b[row] = cf.f;
    }
  }

  M.resize(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
}

template <class Assemble>
Field picard_loop(const MappedDomain& d, const Assemble& assemble, const Field& init,
                  const SolveOptions& opts, ConvergenceRecord* record) {
  Field u = init;
  if (int(u.v.size()) != d.size()) u.v.assign(d.size(), 0.0);
  ConvergenceRecord rec;
  Eigen::SparseMatrix<double> M;
  Eigen::VectorXd b;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  for (int it = 0; it <= opts.max_iter; ++it) {
    assemble(u, M, b);
    Eigen::Map<const Eigen::VectorXd> uv(u.v.data(), u.v.size());
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    const double res = (M * uv - b).cwiseAbs().maxCoeff() / scale;
    rec.residuals.push_back(res);
    if (res < opts.tol) {
      rec.converged = true;
      break;
    }
    if (it == opts.max_iter) break;
    if (!analyzed) {
      lu.analyzePattern(M);
      analyzed = true;
    }
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_quasilinear: sparse factorization failed");
    const Eigen::VectorXd unew = lu.solve(b);
    double delta = 0.0;
    for (int k = 0; k < d.size(); ++k) {
      const double nv = u.v[k] + opts.damping * (unew[k] - u.v[k]);
      delta = std::max(delta, std::fabs(nv - u.v[k]));
      u.v[k] = nv;
    }
    if (delta < opts.tol * 1e-2) {  // iterate stalled at the roundoff floor
      assemble(u, M, b);
      Eigen::Map<const Eigen::VectorXd> uv2(u.v.data(), u.v.size());
      rec.residuals.push_back((M * uv2 - b).cwiseAbs().maxCoeff() / scale);
      rec.converged = true;
      break;
    }
  }
  if (record) *record = rec;
  if (!rec.converged && !record)
    throw std::runtime_error("solve_quasilinear: no convergence after " +
                             std::to_string(opts.max_iter) + " iterations, residual " +
                             std::to_string(rec.residuals.back()));
  return u;
}

}  // namespace

Field solve_divform(const MappedDomain& dom, const DivFormModel& model,
                    const std::array<BoundaryCondition, 4>& bcs, const Field& init,
                    const SolveOptions& opts, ConvergenceRecord* record) {
  auto assemble = [&](const Field& prev, Eigen::SparseMatrix<double>& M, Eigen::VectorXd& b) {
    assemble_divform(dom, model, bcs, prev, M, b);
  };
  return picard_loop(dom, assemble, init, opts, record);
}

Field solve_nondiv(const MappedDomain& dom, const NonDivModel& model,
                   const std::array<BoundaryCondition, 4>& bcs, const Field& init,
                   const SolveOptions& opts, ConvergenceRecord* record) {
  auto assemble = [&](const Field& prev, Eigen::SparseMatrix<double>& M, Eigen::VectorXd& b) {
    assemble_nondiv(dom, model, bcs, prev, M, b);
  };
  return picard_loop(dom, assemble, init, opts, record);
}

EllipticityReport ellipticity_margin(const Field& phi, const MappedDomain& dom, const GasLaw& gas) {
  EllipticityReport rep;
  rep.margin.resize(dom.size());
  const std::vector<Vec2> g = gradient(dom, phi);
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dom.n2; ++j) {
    for (int i = 0; i < dom.n1; ++i) {
      const int k = dom.idx(i, j);
      const double qsq = g[k].norm_sq();
      const double csq = gas.bernoulli - (gas.gamma - 1.0) * (0.5 * qsq + phi.v[k]);
      if (csq < 0.0) throw std::domain_error("ellipticity_margin: cavitation at a node");
      rep.margin[k] = csq - qsq;
      if (rep.margin[k] < rep.min_margin) {
        rep.min_margin = rep.margin[k];
        rep.min_i = i;
        rep.min_j = j;
      }
    }
  }
  return rep;
}

}  // namespace tsfbp
