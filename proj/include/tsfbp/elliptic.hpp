#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tsfbp/grid.hpp"
#include "tsfbp/thermo.hpp"

namespace tsfbp {

/// Shiffmanized gas law: mass flux replaced by its tangent line beyond
/// p_sonic - epsilon, so the potential operator is uniformly elliptic.
struct TruncatedGasLaw {
  GasLaw base;
  double q_plus = 0.0;
  double epsilon = 0.0;
  double p_star = 0.0;  // p_sonic - epsilon
  double c0 = 0.0, c1 = 0.0;  // tangent line coefficients of tilde Phi_1

  double rho(double q_sq) const;        // tilde rho(q^2)
  double drho(double q_sq) const;       // d tilde rho / d(q^2)
  double flux_slope(double q) const;    // tilde Phi_1'(q) = rho + 2 q^2 rho'
};

TruncatedGasLaw build_truncation(double q_plus, const GasLaw& gas);

/// Cutoff profile eta of the sonic-band iteration equation:
/// eta(s) = s on |s| <= 4/(3(gamma+1)), |eta| <= 5/(3(gamma+1)), eta' >= 0.
struct SonicCutoff {
  double mu = 2.0 / 3.0;
  double eps_band = 0.0;      // width of the (x,y) band
  double floor_scale = 0.5;   // ellipticity floor = floor_scale * h on the leading coefficient
  double eta(double s, const GasLaw& gas) const;
};

struct SonicCoeffs {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;  // a11 psi_xx + a12 psi_xy + a22 psi_yy
  double b1 = 0.0, b2 = 0.0;               // + b1 psi_x + b2 psi_y = 0
  std::array<double, 5> O{};               // the error terms O_1..O_5
};

/// Frozen-iterate coefficients of the sonic-band equation at chart point
/// (x, y), with the elliptic cutoff applied. `c2` is the sonic speed of the
/// reference state whose circle the band hugs.
SonicCoeffs sonic_coefficients(const Vec2& dpsi_hat, double psi_hat, double x, double c2,
                               const GasLaw& gas, const SonicCutoff& cutoff);
/// Same without cutoff: the exact rewritten-equation coefficients.
SonicCoeffs sonic_coefficients_exact(const Vec2& dpsi, double psi, double x, double c2,
                                     const GasLaw& gas);

struct BoundaryCondition {
  enum class Kind { Dirichlet, Conormal, Oblique } kind = Kind::Dirichlet;
  std::function<double(const Vec2&)> g;  // Dirichlet / oblique data
  /// Conormal data A(Du,x).nu_out = G(x, nu_out); the assembler passes the
  /// outward unit normal of the edge.
  std::function<double(const Vec2&, const Vec2&)> conormal_g;
  std::function<Vec2(const Vec2&)> oblique_b;  // oblique direction, b.nu >= floor
  static BoundaryCondition dirichlet(std::function<double(const Vec2&)> g) {
    BoundaryCondition b;
    b.kind = Kind::Dirichlet;
    b.g = std::move(g);
    return b;
  }
  static BoundaryCondition conormal(std::function<double(const Vec2&, const Vec2&)> g) {
    BoundaryCondition b;
    b.kind = Kind::Conormal;
    b.conormal_g = std::move(g);
    return b;
  }
  static BoundaryCondition oblique(std::function<Vec2(const Vec2&)> dir,
                                   std::function<double(const Vec2&)> g) {
    BoundaryCondition b;
    b.kind = Kind::Oblique;
    b.oblique_b = std::move(dir);
    b.g = std::move(g);
    return b;
  }
};

/// div A(Du, x) = F with Picard linearization A ~= K(x; prev) Du.
struct DivFormModel {
  std::function<Mat2(const Vec2& x, double u_prev, const Vec2& grad_prev)> coeff;
  std::function<double(const Vec2& x)> rhs;  // may be null (zero)
  /// Exact flux for residual evaluation; null means A = K(x; u, Du) Du.
  std::function<Vec2(const Vec2& x, double u, const Vec2& grad)> flux;
};

/// a11 u_xx + 2 a12 u_xy + a22 u_yy + b1 u_x + b2 u_y + c0 u = f, coefficients
/// frozen at the previous iterate.
struct NonDivModel {
  struct Coeffs {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0, c0 = 0.0, f = 0.0;
  };
  std::function<Coeffs(const Vec2& x, double u_prev, const Vec2& grad_prev)> coeff;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 60;        // Picard iterations
  double damping = 1.0;     // iterate relaxation
  double oblique_floor = 1e-8;
};

struct ConvergenceRecord {
  std::vector<double> residuals;
  bool converged = false;
};

Field solve_divform(const MappedDomain& dom, const DivFormModel& model,
                    const std::array<BoundaryCondition, 4>& bcs, const Field& init,
                    const SolveOptions& opts, ConvergenceRecord* record = nullptr);

Field solve_nondiv(const MappedDomain& dom, const NonDivModel& model,
                   const std::array<BoundaryCondition, 4>& bcs, const Field& init,
                   const SolveOptions& opts, ConvergenceRecord* record = nullptr);

struct EllipticityReport {
  std::vector<double> margin;  // c^2 - |Dphi|^2 per node
  double min_margin = 0.0;
  int min_i = 0, min_j = 0;
};

/// Pointwise ellipticity margin of a pseudo-potential field.
EllipticityReport ellipticity_margin(const Field& phi, const MappedDomain& dom, const GasLaw& gas);

}  // namespace tsfbp
