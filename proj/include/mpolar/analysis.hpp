#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpolar/model.hpp"
#include "mpolar/numerics.hpp"
#include "mpolar/state.hpp"
#include "mpolar/stationary.hpp"

// Diagnostics: weighted norms, the relative energy and its balance
// residual, weighted Poincare certificates, and decay-rate fits.

namespace mpolar {

// Spatial weight (1 + beta x)^alpha, optionally including the first
// derivative in the norm.
struct WeightSpec {
  double alpha = 0.0;
  double beta = 0.0;
  int order = 0; // 0: field only, 1: field plus first derivative
};

inline void validate(const WeightSpec& w) {
  if (!(std::isfinite(w.alpha) && w.alpha >= 0.0))
    throw ValidationError("weight.alpha: must be finite and >= 0");
  if (!(std::isfinite(w.beta) && w.beta >= 0.0))
    throw ValidationError("weight.beta: must be finite and >= 0");
  if (w.order != 0 && w.order != 1)
    throw ValidationError("weight.order: must be 0 or 1");
}

inline double weight_value(const WeightSpec& w, double x) {
  return std::pow(1.0 + w.beta * x, w.alpha);
}

// Weighted L2 (order 0) or weighted H1-style (order 1) norm of nodal values.
inline double weighted_norm(const std::vector<double>& f, const Grid& g, const WeightSpec& w) {
  validate(w);
  validate(g);
  if (f.size() != static_cast<std::size_t>(g.nodes()))
    throw ValidationError("weighted_norm: field size does not match the grid");
  std::vector<double> integrand(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    integrand[j] = weight_value(w, g.x(static_cast<int>(j))) * f[j] * f[j];
  double s = trapz(integrand, g.h());
  if (w.order == 1) {
    const std::vector<double> df = deriv1(f, g.h());
    for (std::size_t j = 0; j < f.size(); ++j)
      integrand[j] = weight_value(w, g.x(static_cast<int>(j))) * df[j] * df[j];
    s += trapz(integrand, g.h());
  }
  return std::sqrt(s);
}

// Pressure potential: integral of (p(s) - p(rho_ref)) / s^2 from rho_ref to
// rho. Nonnegative, zero only at rho = rho_ref. Closed form, with the
// isothermal limit taken explicitly.
inline double pressure_potential(double rho, double rho_ref, const ModelParams& p) {
  if (!(rho > 0.0) || !(rho_ref > 0.0))
    throw ValidationError("pressure_potential: densities must be > 0");
  const double logr = std::log(rho / rho_ref);
  double head;
  if (std::abs(p.gamma - 1.0) < 1e-14) {
    head = p.K * logr;
  } else {
    const double gm1 = p.gamma - 1.0;
    head = p.K * std::pow(rho_ref, gm1) * std::expm1(gm1 * logr) / gm1;
  }
  return head + p.K * std::pow(rho_ref, p.gamma) * (1.0 / rho - 1.0 / rho_ref);
}

// Relative energy of a state against the stationary profile:
// integral of W * (rho Phi + rho psi^2 / 2 + rho zeta^2 / 2).
inline double relative_energy(const State& s, const StationaryProfile& sp,
                              const ModelParams& p, const WeightSpec& w) {
  validate(w);
  const Grid& g = s.grid;
  const int n = g.n;
  if (sp.grid.n != n || s.rho.size() != static_cast<std::size_t>(n + 1))
    throw ValidationError("relative_energy: state and profile grids disagree");
  std::vector<double> integrand(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double psi = s.u[j] - sp.u[j];
    const double zeta = s.omega[j] - sp.omega[j];
    const double e = s.rho[j] * pressure_potential(s.rho[j], sp.rho[j], p) +
                     0.5 * s.rho[j] * (psi * psi + zeta * zeta);
    integrand[j] = weight_value(w, g.x(j)) * e;
  }
  return trapz(integrand, g.h());
}

struct EnergyBalanceSample {
  double t = 0.0;
  double residual = 0.0;
  // Components, signed as they enter the residual.
  double dEdt = 0.0;
  double dissipation = 0.0;
  double boundary = 0.0;
  double weight_transport = 0.0;
  double source = 0.0;
};

namespace detail {

// Energy flux, dissipation density, and source density of one snapshot.
struct EnergyPieces {
  double energy = 0.0;
  double dissipation = 0.0;
  double boundary = 0.0;
  double weight_transport = 0.0;
  double source = 0.0;
};

inline EnergyPieces energy_pieces(const State& s, const StationaryProfile& sp,
                                  const ModelParams& p, const WeightSpec& w) {
  const Grid& g = s.grid;
  const int n = g.n;
  const double h = g.h();
  std::vector<double> psi(n + 1), zeta(n + 1);
  for (int j = 0; j <= n; ++j) {
    psi[j] = s.u[j] - sp.u[j];
    zeta[j] = s.omega[j] - sp.omega[j];
  }
  const std::vector<double> dpsi = deriv1(psi, h);
  const std::vector<double> dzeta = deriv1(zeta, h);

  std::vector<double> ie(n + 1), id(n + 1), iflux(n + 1), iwt(n + 1), isrc(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double x = g.x(j);
    const double W = weight_value(w, x);
    const double Wx = (w.alpha == 0.0)
                          ? 0.0
                          : w.alpha * w.beta * std::pow(1.0 + w.beta * x, w.alpha - 1.0);
    const double rho = s.rho[j];
    const double phi = rho - sp.rho[j];
    const double pr = p.K * std::pow(rho, p.gamma);
    const double pr_t = p.K * std::pow(sp.rho[j], p.gamma);
    const double dp = pr - pr_t;
    const double dpdr_t = p.K * p.gamma * std::pow(sp.rho[j], p.gamma - 1.0);
    const double Phi = pressure_potential(rho, sp.rho[j], p);
    const double ru = rho * s.u[j];

    ie[j] = W * (rho * Phi + 0.5 * rho * (psi[j] * psi[j] + zeta[j] * zeta[j]));
    id[j] = W * (p.mu * zeta[j] * zeta[j] + p.lambda * dpsi[j] * dpsi[j] +
                 p.nu * dzeta[j] * dzeta[j]);
    const double flux = ru * Phi + 0.5 * ru * (psi[j] * psi[j] + zeta[j] * zeta[j]) +
                        dp * psi[j] - p.lambda * psi[j] * dpsi[j] - p.nu * zeta[j] * dzeta[j];
    iflux[j] = flux;
    iwt[j] = Wx * flux;
    const double src = -sp.u_x[j] * (sp.u[j] * phi * psi[j] + rho * psi[j] * psi[j] +
                                     dp - dpdr_t * phi) -
                       sp.omega_x[j] * (sp.u[j] * phi * zeta[j] + rho * psi[j] * zeta[j]) -
                       (dpdr_t * sp.rho_x[j] / sp.rho[j]) * phi * psi[j];
    isrc[j] = W * src;
  }
  EnergyPieces out;
  out.energy = trapz(ie, h);
  out.dissipation = trapz(id, h);
  out.boundary = weight_value(w, g.L) * iflux[n] - iflux[0];
  out.weight_transport = trapz(iwt, h);
  out.source = trapz(isrc, h);
  return out;
}

} // namespace detail

// Residual of the weighted energy balance across a snapshot sequence:
//   d/dt E_W + dissipation + boundary - weight_transport - source = 0
// in the continuum. Time derivative by centered differences, so the first
// and last snapshots are not reported. Needs at least 3 snapshots.
inline std::vector<EnergyBalanceSample> energy_balance_residual(
    const std::vector<State>& snaps, const StationaryProfile& sp, const ModelParams& p,
    const WeightSpec& w) {
  validate(w);
  if (snaps.size() < 3)
    throw InsufficientSnapshots("energy_balance_residual: need >= 3 snapshots, got " +
                                std::to_string(snaps.size()));
  std::vector<detail::EnergyPieces> pieces(snaps.size());
  for (std::size_t i = 0; i < snaps.size(); ++i)
    pieces[i] = detail::energy_pieces(snaps[i], sp, p, w);
  std::vector<EnergyBalanceSample> out;
  out.reserve(snaps.size() - 2);
  for (std::size_t i = 1; i + 1 < snaps.size(); ++i) {
    const double dt = snaps[i + 1].t - snaps[i - 1].t;
    if (!(dt > 0.0))
      throw ValidationError("energy_balance_residual: snapshot times must increase");
    EnergyBalanceSample sam;
    sam.t = snaps[i].t;
    sam.dEdt = (pieces[i + 1].energy - pieces[i - 1].energy) / dt;
    sam.dissipation = pieces[i].dissipation;
    sam.boundary = pieces[i].boundary;
    sam.weight_transport = pieces[i].weight_transport;
    sam.source = pieces[i].source;
    sam.residual = sam.dEdt + sam.dissipation + sam.boundary - sam.weight_transport - sam.source;
    out.push_back(sam);
  }
  return out;
}

struct PoincareCertificate {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Exponentially weighted Poincare bound on [0, L]:
//   int e^{-sigma x} h^2 <= 2 max(1/sigma, 1/sigma^2) (h(0)^2 + ||h_x||^2).
inline PoincareCertificate poincare_exponential(const std::vector<double>& h, double sigma,
                                                const Grid& g) {
  validate(g);
  if (!(sigma > 0.0)) throw ValidationError("poincare_exponential: sigma must be > 0");
  if (h.size() != static_cast<std::size_t>(g.nodes()))
    throw ValidationError("poincare_exponential: field size does not match the grid");
  std::vector<double> integrand(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double x = g.x(static_cast<int>(j));
    integrand[j] = std::exp(-sigma * x) * h[j] * h[j];
  }
  PoincareCertificate c;
  c.lhs = trapz(integrand, g.h());
  const std::vector<double> dh = deriv1(h, g.h());
  for (std::size_t j = 0; j < h.size(); ++j) integrand[j] = dh[j] * dh[j];
  const double grad2 = trapz(integrand, g.h());
  c.rhs = 2.0 * std::max(1.0 / sigma, 1.0 / (sigma * sigma)) * (h[0] * h[0] + grad2);
  c.holds = c.lhs <= c.rhs;
  return c;
}

// Algebraically weighted Poincare bound on [0, L], k > 1:
//   int delta^{k+1} (1 + delta x)^{-(k+1)} h^2
//     <= (2/k) delta^k h(0)^2 + (2/(k(k-1))) delta^{k-1} ||h_x||^2.
inline PoincareCertificate poincare_algebraic(const std::vector<double>& h, double delta,
                                              double k, const Grid& g) {
  validate(g);
  if (!(delta > 0.0)) throw ValidationError("poincare_algebraic: delta must be > 0");
  if (!(k > 1.0)) throw ValidationError("poincare_algebraic: k must be > 1");
  if (h.size() != static_cast<std::size_t>(g.nodes()))
    throw ValidationError("poincare_algebraic: field size does not match the grid");
  std::vector<double> integrand(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double x = g.x(static_cast<int>(j));
    integrand[j] = std::pow(delta, k + 1.0) * std::pow(1.0 + delta * x, -(k + 1.0)) * h[j] * h[j];
  }
  PoincareCertificate c;
  c.lhs = trapz(integrand, g.h());
  const std::vector<double> dh = deriv1(h, g.h());
  for (std::size_t j = 0; j < h.size(); ++j) integrand[j] = dh[j] * dh[j];
  const double grad2 = trapz(integrand, g.h());
  c.rhs = (2.0 / k) * std::pow(delta, k) * h[0] * h[0] +
          (2.0 / (k * (k - 1.0))) * std::pow(delta, k - 1.0) * grad2;
  c.holds = c.lhs <= c.rhs;
  return c;
}

struct DecayFit {
  double exponent = 0.0; // decay rate p in norm ~ (1 + t)^-p
  double rms = 0.0;      // residual of the log-log fit
  int count = 0;
  double t_lo = 0.0, t_hi = 0.0;
};

// Least-squares fit of log(norm) against log(1 + t) over [t_lo, t_hi].
inline DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& norms,
                          double t_lo, double t_hi) {
  if (times.size() != norms.size())
    throw ValidationError("fit_decay: times and norms differ in length");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(norms[i] > 0.0))
      throw NonpositiveNorm("fit_decay: norm " + std::to_string(norms[i]) + " at t = " +
                            std::to_string(times[i]));
    xs.push_back(std::log(1.0 + times[i]));
    ys.push_back(std::log(norms[i]));
  }
  if (xs.size() < 8)
    throw WindowTooSmall("fit_decay: window [" + std::to_string(t_lo) + ", " +
                         std::to_string(t_hi) + "] holds " + std::to_string(xs.size()) +
                         " samples, need >= 8");
  const LineFit lf = fit_line(xs, ys);
  DecayFit fit;
  fit.exponent = -lf.slope;
  fit.rms = lf.rms;
  fit.count = static_cast<int>(xs.size());
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  return fit;
}

// Largest pointwise deviation of the state from the stationary profile over
// all three fields.
inline double sup_norm_perturbation(const State& s, const StationaryProfile& sp) {
  if (s.rho.size() != sp.rho.size())
    throw ValidationError("sup_norm_perturbation: state and profile grids disagree");
  double m = 0.0;
  for (std::size_t j = 0; j < s.rho.size(); ++j) {
    m = std::max(m, std::abs(s.rho[j] - sp.rho[j]));
    m = std::max(m, std::abs(s.u[j] - sp.u[j]));
    m = std::max(m, std::abs(s.omega[j] - sp.omega[j]));
  }
  return m;
}

} // namespace mpolar
