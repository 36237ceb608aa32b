#pragma once

#include <stdexcept>
#include <string>

namespace tsfbp {

/// Polytropic gas in the scaled conventions used throughout:
/// steady potential flow has rho(0)=1, self-similar forms carry the scaled
/// Bernoulli constant B0 = (gamma-1)B + 1.
struct GasLaw {
  double gamma = 1.4;
  double bernoulli = 1.0;  // B0, used only by self-similar forms

  void validate() const {
    if (!(gamma > 1.0)) throw std::domain_error("GasLaw: gamma must be > 1");
    if (!(bernoulli > 0.0)) throw std::domain_error("GasLaw: bernoulli (B0) must be > 0");
  }
  double cavitation_qsq() const { return 2.0 / (gamma - 1.0); }
};

enum class Regime { Subsonic, Sonic, Supersonic };

/// Regime tag plus the signed margin c^2 - q^2 it was judged from.
struct FlowRegime {
  Regime tag = Regime::Sonic;
  double margin = 0.0;
};

FlowRegime classify_regime(double csq_minus_qsq, double tol);
const char* regime_name(Regime r);

/// rho(q^2) = (1 - (gamma-1)/2 q^2)^{1/(gamma-1)}, q^2 in [0, 2/(gamma-1)].
double density_steady(double q_sq, const GasLaw& gas);

/// Mass-flux function Phi_K(p) = (K - (gamma-1)/2 p^2)^{1/(gamma-1)} * p.
double mass_flux(double p, double K, const GasLaw& gas);
/// Closed-form Phi_K'(p) = (K - (gamma-1)/2 p^2)^{(2-gamma)/(gamma-1)} (c^2 - p^2),
/// c^2 = K - (gamma-1)/2 p^2.
double mass_flux_deriv(double p, double K, const GasLaw& gas);

/// p^K_sonic = sqrt(2K/(gamma+1)).
double sonic_point(double K, const GasLaw& gas);

/// Unique subsonic speed with the same Phi_K level as a supersonic one.
/// Bisection on (0, p_sonic) followed by one Newton polish.
double conjugate_speed(double p_minus, double K, const GasLaw& gas);
/// K = 1 case of the above (the duct background pairing q- -> q+).
double conjugate_state(double q_minus, const GasLaw& gas);

/// Self-similar density rho = (B0 - (gamma-1)(grad_sq/2 + phi))^{1/(gamma-1)}.
double density_selfsim(double grad_sq, double phi, const GasLaw& gas);

/// c = sqrt(gamma p / rho) for the full Euler system.
double sonic_speed_full_euler(double p, double rho, const GasLaw& gas);
/// c^2 = rho^{gamma-1} = B0 - (gamma-1)(grad_sq/2 + phi), scaled self-similar form.
double sonic_speed_selfsim(double grad_sq, double phi, const GasLaw& gas);

/// Solve the Bernoulli law (1/2)q^2 + gamma p/((gamma-1) rho) = B for the
/// flow-aligned velocity component: u1 = sqrt(2(B - gamma p/((gamma-1)rho)))/sqrt(1+w^2).
double bernoulli_velocity(double w, double p, double rho, double B, const GasLaw& gas);

}  // namespace tsfbp
