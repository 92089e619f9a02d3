#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "mpolar/errors.hpp"

// Half-line outflow problem for a 1-D compressible isentropic micropolar
// fluid. Density rho, velocity u, microrotation omega obey
//
//   rho_t + (rho u)_x                = 0
//   (rho u)_t + (rho u^2 + p)_x      = lambda u_xx,     p = K rho^gamma
//   (rho omega)_t + (rho u omega)_x  = nu omega_xx - mu omega
//
// on x > 0 with outflow boundary data u(0,t) = u_b < 0, omega(0,t) = omega_b
// and far field (rho_+, u_+, 0), u_+ < 0. This header holds the parameter
// set, admissibility checks, and the constants every other module consumes.

namespace mpolar {

struct ModelParams {
  double lambda = 1.0;   // velocity viscosity
  double mu = 1.0;       // microrotation damping
  double nu = 1.0;       // microrotation viscosity
  double K = 1.0;        // pressure coefficient
  double gamma = 1.4;    // adiabatic exponent, >= 1
  double rho_plus = 1.0; // far-field density
  double u_plus = -1.5 * std::sqrt(1.4); // far-field velocity, < 0
  double u_b = -1.35 * std::sqrt(1.4);   // boundary velocity, < 0
  double omega_b = 0.05; // boundary microrotation, != 0
};

inline void validate(const ModelParams& p) {
  auto reject = [](const char* field, double value, const char* why) {
    throw ValidationError(std::string("params.") + field + " = " + std::to_string(value) + ": " + why);
  };
  auto need_finite = [&](const char* field, double value) {
    if (!std::isfinite(value)) reject(field, value, "must be finite");
  };
  need_finite("lambda", p.lambda);
  need_finite("mu", p.mu);
  need_finite("nu", p.nu);
  need_finite("K", p.K);
  need_finite("gamma", p.gamma);
  need_finite("rho_plus", p.rho_plus);
  need_finite("u_plus", p.u_plus);
  need_finite("u_b", p.u_b);
  need_finite("omega_b", p.omega_b);
  if (!(p.lambda > 0.0)) reject("lambda", p.lambda, "must be > 0");
  if (!(p.mu > 0.0)) reject("mu", p.mu, "must be > 0");
  if (!(p.nu > 0.0)) reject("nu", p.nu, "must be > 0");
  if (!(p.K > 0.0)) reject("K", p.K, "must be > 0");
  if (!(p.gamma >= 1.0)) reject("gamma", p.gamma, "must be >= 1");
  if (!(p.rho_plus > 0.0)) reject("rho_plus", p.rho_plus, "must be > 0");
  if (!(p.u_plus < 0.0)) reject("u_plus", p.u_plus, "outflow requires u_plus < 0");
  if (!(p.u_b < 0.0)) reject("u_b", p.u_b, "outflow requires u_b < 0");
  if (p.omega_b == 0.0) reject("omega_b", p.omega_b, "must be nonzero");
}

// Far-field sound speed sqrt(p'(rho_+)).
inline double sound_speed_plus(const ModelParams& p) {
  return std::sqrt(p.K * p.gamma * std::pow(p.rho_plus, p.gamma - 1.0));
}

// Far-field Mach number, positive.
inline double mach_plus(const ModelParams& p) {
  return -p.u_plus / sound_speed_plus(p);
}

// The u_plus that makes the far field exactly sonic for given K, gamma,
// rho_plus (same expression as sound_speed_plus, so mach_plus comes out as
// an exact 1.0 in floating point).
inline double sonic_u_plus(double K, double gamma, double rho_plus) {
  return -std::sqrt(K * gamma * std::pow(rho_plus, gamma - 1.0));
}

struct CharRoots {
  double r1; // negative root
  double r2; // positive root
};

// Roots of nu r^2 - (rho_+ u_+) r - mu = 0, the spatial characteristic
// exponents of the stationary microrotation equation. Always one negative
// and one positive; computed cancellation-free (larger-magnitude root by
// formula, the other via the product -mu/nu).
inline CharRoots char_roots(const ModelParams& p) {
  const double q = p.rho_plus * p.u_plus;
  const double disc = std::sqrt(q * q + 4.0 * p.nu * p.mu);
  CharRoots cr{};
  if (q <= 0.0) {
    cr.r1 = (q - disc) / (2.0 * p.nu);
    cr.r2 = -p.mu / (p.nu * cr.r1);
  } else {
    cr.r2 = (q + disc) / (2.0 * p.nu);
    cr.r1 = -p.mu / (p.nu * cr.r2);
  }
  return cr;
}

// Positive root of theta (theta - 2) = 4 / (gamma + 1), the weight exponent
// separating the slow-decay regimes.
inline double theta_star(double gamma) {
  return 1.0 + std::sqrt(1.0 + 4.0 / (gamma + 1.0));
}

struct DerivedConstants {
  double c_plus = 0.0;       // far-field sound speed
  double mach = 0.0;         // far-field Mach number
  double r1 = 0.0;           // negative microrotation root
  double r2 = 0.0;           // positive microrotation root
  double delta_tilde = 0.0;  // boundary-data amplitude max(|omega_b|, |u_b - u_+|)
  double theta_star = 0.0;   // critical weight exponent
  double A = 0.0;            // transonic tail slope (gamma+1) rho_+ / (2 lambda)
  double B = 0.0;            // delta_tilde * A
  double sigma = 0.0;        // exponential envelope rate min(|r1|, xi0)
  bool sigma_provisional = true; // true until a measured xi0 is folded in
};

inline DerivedConstants derive_constants(const ModelParams& p) {
  validate(p);
  DerivedConstants d;
  d.c_plus = sound_speed_plus(p);
  d.mach = mach_plus(p);
  const CharRoots cr = char_roots(p);
  d.r1 = cr.r1;
  d.r2 = cr.r2;
  d.delta_tilde = std::max(std::abs(p.omega_b), std::abs(p.u_b - p.u_plus));
  d.theta_star = theta_star(p.gamma);
  d.A = (p.gamma + 1.0) * p.rho_plus / (2.0 * p.lambda);
  d.B = d.delta_tilde * d.A;
  d.sigma = -cr.r1; // provisional: velocity tail rate not yet known
  d.sigma_provisional = true;
  return d;
}

// Fold a measured velocity tail rate into sigma. Non-finite or nonpositive
// xi0 leaves the provisional value in place.
inline DerivedConstants finalize_sigma(DerivedConstants d, double xi0_measured) {
  if (std::isfinite(xi0_measured) && xi0_measured > 0.0) {
    d.sigma = std::min(-d.r1, xi0_measured);
    d.sigma_provisional = false;
  }
  return d;
}

} // namespace mpolar
