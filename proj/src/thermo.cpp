#include "tsfbp/thermo.hpp"

#include <cmath>

namespace tsfbp {

FlowRegime classify_regime(double csq_minus_qsq, double tol) {
  FlowRegime r;
  r.margin = csq_minus_qsq;
  if (csq_minus_qsq > tol)
    r.tag = Regime::Subsonic;
  else if (csq_minus_qsq < -tol)
    r.tag = Regime::Supersonic;
  else
    r.tag = Regime::Sonic;
  return r;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Subsonic: return "subsonic";
    case Regime::Sonic: return "sonic";
    case Regime::Supersonic: return "supersonic";
  }
  return "?";
}

double density_steady(double q_sq, const GasLaw& gas) {
  gas.validate();
  const double gm1 = gas.gamma - 1.0;
  if (q_sq < 0.0 || q_sq > gas.cavitation_qsq() * (1.0 + 1e-14))
    throw std::domain_error("density_steady: q^2 outside [0, 2/(gamma-1)] (cavitation bound " +
                            std::to_string(gas.cavitation_qsq()) + ")");
  const double base = std::max(0.0, 1.0 - 0.5 * gm1 * q_sq);
  return std::pow(base, 1.0 / gm1);
}

double mass_flux(double p, double K, const GasLaw& gas) {
  gas.validate();
  if (!(K > 0.0)) throw std::domain_error("mass_flux: K must be > 0");
  const double gm1 = gas.gamma - 1.0;
  const double pmax = std::sqrt(2.0 * K / gm1);
  if (p < 0.0 || p > pmax * (1.0 + 1e-14))
    throw std::domain_error("mass_flux: p outside [0, sqrt(2K/(gamma-1))]");
  const double base = std::max(0.0, K - 0.5 * gm1 * p * p);
  return std::pow(base, 1.0 / gm1) * p;
}

double mass_flux_deriv(double p, double K, const GasLaw& gas) {
  gas.validate();
  const double gm1 = gas.gamma - 1.0;
  const double csq = K - 0.5 * gm1 * p * p;
  if (csq <= 0.0) throw std::domain_error("mass_flux_deriv: p at or beyond the vacuum speed");
  return std::pow(csq, (2.0 - gas.gamma) / gm1) * (csq - p * p);
}

double sonic_point(double K, const GasLaw& gas) {
  gas.validate();
  if (!(K > 0.0)) throw std::domain_error("sonic_point: K must be > 0");
  return std::sqrt(2.0 * K / (gas.gamma + 1.0));
}

double conjugate_speed(double p_minus, double K, const GasLaw& gas) {
  const double ps = sonic_point(K, gas);
  const double pmax = std::sqrt(2.0 * K / (gas.gamma - 1.0));
  if (!(p_minus > ps) || !(p_minus < pmax))
    throw std::domain_error("conjugate_speed: upstream speed must lie in (p_sonic, sqrt(2K/(gamma-1)))");
  const double level = mass_flux(p_minus, K, gas);
  // Phi_K is strictly increasing on (0, p_sonic); bisect, then one Newton step.
  double lo = 0.0, hi = ps;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass_flux(mid, K, gas) < level)
      lo = mid;
    else
      hi = mid;
  }
  double p = 0.5 * (lo + hi);
  const double d = mass_flux_deriv(p, K, gas);
  if (d > 0.0) p -= (mass_flux(p, K, gas) - level) / d;
  return p;
}

double conjugate_state(double q_minus, const GasLaw& gas) { return conjugate_speed(q_minus, 1.0, gas); }

double density_selfsim(double grad_sq, double phi, const GasLaw& gas) {
  gas.validate();
  const double gm1 = gas.gamma - 1.0;
  const double rad = gas.bernoulli - gm1 * (0.5 * grad_sq + phi);
  if (rad < 0.0)
    throw std::domain_error("density_selfsim: cavitation, radicand deficit " + std::to_string(-rad));
  return std::pow(rad, 1.0 / gm1);
}

double sonic_speed_full_euler(double p, double rho, const GasLaw& gas) {
  gas.validate();
  if (!(p > 0.0) || !(rho > 0.0))
    throw std::domain_error("sonic_speed_full_euler: need p > 0 and rho > 0");
  return std::sqrt(gas.gamma * p / rho);
}

double sonic_speed_selfsim(double grad_sq, double phi, const GasLaw& gas) {
  const double rho = density_selfsim(grad_sq, phi, gas);
  return std::pow(rho, 0.5 * (gas.gamma - 1.0));
}

double bernoulli_velocity(double w, double p, double rho, double B, const GasLaw& gas) {
  gas.validate();
  if (!std::isfinite(w)) throw std::domain_error("bernoulli_velocity: w must be finite");
  if (!(rho > 0.0)) throw std::domain_error("bernoulli_velocity: rho must be > 0");
  const double rad = B - gas.gamma * p / ((gas.gamma - 1.0) * rho);
  if (!(rad > 0.0))
    throw std::domain_error("bernoulli_velocity: state not on the Bernoulli surface (radicand <= 0)");
  return std::sqrt(2.0 * rad) / std::sqrt(1.0 + w * w);
}

}  // namespace tsfbp
