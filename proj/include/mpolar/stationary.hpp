#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpolar/grid.hpp"
#include "mpolar/model.hpp"
#include "mpolar/numerics.hpp"

// Stationary solutions. With mass flux fixed by the far field, the profile
// is described by the velocity ratio chi = u~ / u_+ which obeys
//
//   lambda u_+ chi' = F(chi),   chi(0) = u_b / u_+,
//   F(chi) = K rho_+^gamma (chi^-gamma - 1) + rho_+ u_+^2 (chi - 1),
//
// and the microrotation decouples into omega~ = omega_b exp(r1 x) with r1
// the negative characteristic root. F is convex with F(1) = 0; a second
// root chi_c exists in (0, 1] exactly when the far field is not subsonic,
// and profiles exist exactly when chi(0) lies on the far side of chi_c.

namespace mpolar {

enum class Regime { Supersonic, Transonic, NonExistent };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Supersonic: return "supersonic";
    case Regime::Transonic: return "transonic";
    default: return "nonexistent";
  }
}

// Momentum balance of the stationary velocity ratio.
inline double flux_function(double chi, const ModelParams& p) {
  if (!(chi > 0.0))
    throw ValidationError("flux_function: chi must be > 0, got " + std::to_string(chi));
  const double pk = p.K * std::pow(p.rho_plus, p.gamma);
  return pk * (std::pow(chi, -p.gamma) - 1.0) + p.rho_plus * p.u_plus * p.u_plus * (chi - 1.0);
}

// dF/dchi.
inline double flux_function_d1(double chi, const ModelParams& p) {
  const double pk = p.K * std::pow(p.rho_plus, p.gamma);
  return -p.gamma * pk * std::pow(chi, -p.gamma - 1.0) + p.rho_plus * p.u_plus * p.u_plus;
}

// F(chi) / (chi - 1) with the removable singularity at chi = 1 filled by the
// Taylor value; strictly increasing through its root chi_c.
inline double deflated_flux(double chi, const ModelParams& p) {
  const double d = chi - 1.0;
  if (std::abs(d) < 1e-8) {
    const double pk = p.K * std::pow(p.rho_plus, p.gamma);
    const double f1 = p.rho_plus * p.u_plus * p.u_plus - p.gamma * pk;
    const double f2 = p.gamma * (p.gamma + 1.0) * pk;
    return f1 + 0.5 * f2 * d;
  }
  return flux_function(chi, p) / d;
}

// Linearized tail rate of the velocity profile about chi = 1:
// F'(1) / (lambda |u_+|), positive for a supersonic far field.
inline double xi0_predicted(const ModelParams& p) {
  return flux_function_d1(1.0, p) / (p.lambda * -p.u_plus);
}

// Mach tolerance below which the far field counts as exactly sonic.
inline constexpr double kMachTol = 1e-9;

// Second root of F. Requires mach >= 1 - tol; returns exactly 1 in the
// sonic band, otherwise locates the root in (0, 1) by bracketed bisection
// of the deflated flux.
inline double critical_chi(const ModelParams& p, double mach_tol = kMachTol) {
  const double M = mach_plus(p);
  if (M < 1.0 - mach_tol)
    throw NoSecondRoot("critical_chi: far-field Mach " + std::to_string(M) + " is subsonic");
  if (M <= 1.0 + mach_tol) return 1.0;
  const double chi_min = std::pow(M, -2.0 / (p.gamma + 1.0)); // argmin of F, in (0,1)
  double lo = 0.5 * chi_min;
  while (deflated_flux(lo, p) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e-300)
      throw NoSecondRoot("critical_chi: bracketing failed (degenerate parameters)");
  }
  return bisect([&](double c) { return deflated_flux(c, p); }, lo, chi_min);
}

struct ChiProblem {
  Regime regime = Regime::NonExistent;
  double chi0 = 0.0;  // u_b / u_+
  double chi_c = std::numeric_limits<double>::quiet_NaN();
  double mach = 0.0;
};

// Existence classification for the boundary data in p.
inline ChiProblem classify(const ModelParams& p, double mach_tol = kMachTol) {
  validate(p);
  ChiProblem pr;
  pr.mach = mach_plus(p);
  pr.chi0 = p.u_b / p.u_plus;
  if (pr.mach < 1.0 - mach_tol) {
    pr.regime = Regime::NonExistent;
    return pr;
  }
  pr.chi_c = critical_chi(p, mach_tol);
  if (pr.mach <= 1.0 + mach_tol) {
    // Sonic far field: chi decreases along the flow, so it can only reach 1
    // from above.
    pr.regime = (pr.chi0 >= 1.0) ? Regime::Transonic : Regime::NonExistent;
  } else {
    pr.regime = (pr.chi0 > pr.chi_c) ? Regime::Supersonic : Regime::NonExistent;
  }
  return pr;
}

struct StationaryProfile {
  Grid grid;
  Regime regime = Regime::NonExistent;
  double chi0 = 1.0;
  double mass_flux = 0.0;             // rho_+ u_+, constant in x
  std::vector<double> chi;            // velocity ratio at nodes
  std::vector<double> rho, u, omega;  // profile fields at nodes
  std::vector<double> rho_x, u_x, omega_x; // analytic first derivatives
};

struct SolveOptions {
  int substeps = 16;     // RK4 substeps per grid cell
  double ff_tol = -1.0;  // far-field tolerance at x = L; < 0 picks the default
};

namespace detail {

// Default far-field tolerance at x = L. Supersonic tails close
// exponentially, so demand e^-10 of the initial offset; transonic tails
// close like 1/x, so allow twice the predicted algebraic tail value.
inline double default_ff_tol(const ChiProblem& prob, const ModelParams& p, double L) {
  const double dchi0 = std::abs(prob.chi0 - 1.0);
  if (dchi0 < 1e-14) return 1e-12;
  if (prob.regime == Regime::Supersonic)
    return std::max(dchi0 * std::exp(-10.0), 1e-12);
  const DerivedConstants dc = derive_constants(p);
  const double shape = std::pow(p.u_plus / p.u_b, p.gamma + 2.0);
  const double denom = 1.0 + dc.delta_tilde * L * dc.A * shape / -p.u_plus;
  return 2.0 * dc.delta_tilde / denom;
}

} // namespace detail

// Integrate the profile ODE across the grid with RK4 substeps and check the
// discrete solution is monotone, bracketed by [chi0, 1], and has reached the
// far field at x = L.
inline StationaryProfile solve_chi_profile(const ChiProblem& prob, const ModelParams& p,
                                           const Grid& g, const SolveOptions& opt = {}) {
  validate(p);
  validate(g);
  if (prob.regime == Regime::NonExistent)
    throw NonExistentRegime("solve_chi_profile: no stationary solution for this data");
  if (opt.substeps < 1) throw ValidationError("solve options: substeps must be >= 1");

  StationaryProfile sp;
  sp.grid = g;
  sp.regime = prob.regime;
  sp.chi0 = prob.chi0;
  sp.mass_flux = p.rho_plus * p.u_plus;
  const int n = g.n;
  sp.chi.assign(n + 1, 0.0);

  const double lam_u = p.lambda * p.u_plus;
  auto slope = [&](double c) {
    if (!(c > 0.0))
      throw StepTooCoarse("solve_chi_profile: integration left the admissible band; refine the grid");
    return flux_function(c, p) / lam_u;
  };
  const double hs = g.h() / opt.substeps;
  double chi = prob.chi0;
  sp.chi[0] = chi;
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < opt.substeps; ++s) {
      const double k1 = slope(chi);
      const double k2 = slope(chi + 0.5 * hs * k1);
      const double k3 = slope(chi + 0.5 * hs * k2);
      const double k4 = slope(chi + hs * k3);
      chi += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sp.chi[j + 1] = chi;
  }

  const double lo = std::min(prob.chi0, 1.0);
  const double hi = std::max(prob.chi0, 1.0);
  const double dir = (prob.chi0 <= 1.0) ? 1.0 : -1.0; // chi moves toward 1
  const double btol = 1e-12 * std::max(1.0, hi);
  for (int j = 0; j <= n; ++j) {
    if (sp.chi[j] < lo - btol || sp.chi[j] > hi + btol)
      throw StepTooCoarse("solve_chi_profile: chi left [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] at x = " + std::to_string(g.x(j)));
    if (j > 0 && dir * (sp.chi[j] - sp.chi[j - 1]) < -btol)
      throw StepTooCoarse("solve_chi_profile: monotonicity lost at x = " + std::to_string(g.x(j)));
  }

  const double ff = (opt.ff_tol >= 0.0) ? opt.ff_tol : detail::default_ff_tol(prob, p, g.L);
  if (std::abs(sp.chi[n] - 1.0) > ff)
    throw DomainTooShort("solve_chi_profile: |chi(L) - 1| = " + std::to_string(std::abs(sp.chi[n] - 1.0)) +
                         " exceeds far-field tolerance " + std::to_string(ff));

  const CharRoots cr = char_roots(p);
  sp.rho.assign(n + 1, 0.0);
  sp.u.assign(n + 1, 0.0);
  sp.omega.assign(n + 1, 0.0);
  sp.rho_x.assign(n + 1, 0.0);
  sp.u_x.assign(n + 1, 0.0);
  sp.omega_x.assign(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    const double c = sp.chi[j];
    const double cx = flux_function(c, p) / lam_u;
    sp.u[j] = p.u_plus * c;
    sp.rho[j] = p.rho_plus / c;
    sp.omega[j] = p.omega_b * std::exp(cr.r1 * g.x(j));
    sp.u_x[j] = p.u_plus * cx;
    sp.rho_x[j] = -p.rho_plus * cx / (c * c);
    sp.omega_x[j] = cr.r1 * sp.omega[j];
  }
  return sp;
}

inline StationaryProfile solve_chi_profile(const ModelParams& p, const Grid& g,
                                           const SolveOptions& opt = {}) {
  return solve_chi_profile(classify(p), p, g, opt);
}

// Closed-form stationary microrotation.
inline double stationary_omega(double x, const ModelParams& p) {
  return p.omega_b * std::exp(char_roots(p).r1 * x);
}

// Max-norm residual of the profile ODE in slope form, |D chi - F/(lambda u_+)|,
// with a fourth-order centered difference over nodes that carry a full
// stencil.
inline double ode_residual_max(const StationaryProfile& sp, const ModelParams& p) {
  const int n = sp.grid.n;
  if (n < 4) throw ValidationError("ode_residual_max: grid too small for the stencil");
  const double lam_u = p.lambda * p.u_plus;
  double r = 0.0;
  for (int j = 2; j <= n - 2; ++j) {
    const double dchi = deriv1_c4(sp.chi, sp.grid.h(), static_cast<std::size_t>(j));
    r = std::max(r, std::abs(dchi - flux_function(sp.chi[j], p) / lam_u));
  }
  return r;
}

struct EnvelopeReport {
  Regime regime = Regime::NonExistent;
  double sigma_used = std::numeric_limits<double>::quiet_NaN();
  // Supersonic: measured velocity tail rate and its log-fit residual.
  double xi0_measured = std::numeric_limits<double>::quiet_NaN();
  double xi0_fit_rms = std::numeric_limits<double>::quiet_NaN();
  // Smallest constants closing the exponential envelopes (orders 0 and 1).
  double C_exp_k0 = std::numeric_limits<double>::quiet_NaN();
  double C_exp_k1 = std::numeric_limits<double>::quiet_NaN();
  // Transonic: smallest constants closing the algebraic envelopes.
  double C_alg_k0 = std::numeric_limits<double>::quiet_NaN();
  double C_alg_k1 = std::numeric_limits<double>::quiet_NaN();
  // Transonic tail-model discrimination: RMS residuals of fitting the tail
  // against the algebraic and against the exponential closure.
  double alg_fit_rms = std::numeric_limits<double>::quiet_NaN();
  double exp_fit_rms = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Smallest C with |f_j| <= C * scale * env_j (order 0) or
// |Df_j| <= C * scale * env_j + slack (order 1), slack = 10 h^2 max|D2 f|.
inline double envelope_constant(const std::vector<double>& f, const std::vector<double>& env,
                                double scale, double h, int order) {
  double c = 0.0;
  if (order == 0) {
    for (std::size_t j = 0; j < f.size(); ++j)
      c = std::max(c, std::abs(f[j]) / (scale * env[j]));
  } else {
    const std::vector<double> df = deriv1(f, h);
    const double slack = 10.0 * h * h * max_abs_second_diff(f, h);
    for (std::size_t j = 0; j < f.size(); ++j)
      c = std::max(c, std::max(0.0, std::abs(df[j]) - slack) / (scale * env[j]));
  }
  return c;
}

} // namespace detail

// Measure how the computed profile decays and produce the smallest envelope
// constants. Supersonic profiles get the exponential envelope at rate
// sigma = min(|r1|, measured xi0); transonic ones get the algebraic envelope
// in 1 / (1 + delta x) plus the exponential one for the microrotation, and
// both tail-model residuals for regime discrimination.
inline EnvelopeReport validate_decay(const StationaryProfile& sp, const ModelParams& p,
                                     double cap = 1e3) {
  if (sp.chi.empty()) throw ValidationError("validate_decay: empty profile");
  EnvelopeReport rep;
  rep.regime = sp.regime;
  const Grid& g = sp.grid;
  const int n = g.n;
  const double h = g.h();
  const DerivedConstants dc = derive_constants(p);
  const double dchi0 = std::abs(sp.chi0 - 1.0);

  // Physical deviations from the far field.
  std::vector<double> drho(n + 1), du(n + 1);
  for (int j = 0; j <= n; ++j) {
    drho[j] = sp.rho[j] - p.rho_plus;
    du[j] = sp.u[j] - p.u_plus;
  }

  if (sp.regime == Regime::Supersonic) {
    if (dchi0 < 1e-14) {
      // Constant profile: any envelope constant works; report the cheapest.
      rep.sigma_used = std::min(-dc.r1, xi0_predicted(p));
      rep.C_exp_k0 = 0.0;
      rep.C_exp_k1 = 0.0;
      return rep;
    }
    // Tail-half log fit of |chi - 1| gives the measured decay rate.
    std::vector<double> xs, ys;
    for (int j = 0; j <= n; ++j) {
      const double d = std::abs(sp.chi[j] - 1.0);
      if (g.x(j) >= 0.5 * g.L && d > 1e-280) {
        xs.push_back(g.x(j));
        ys.push_back(std::log(d));
      }
    }
    if (xs.size() < 8) throw WindowTooSmall("validate_decay: tail fit needs >= 8 usable samples");
    const LineFit lf = fit_line(xs, ys);
    rep.xi0_measured = -lf.slope;
    rep.xi0_fit_rms = lf.rms;
    rep.sigma_used = finalize_sigma(dc, rep.xi0_measured).sigma;

    std::vector<double> env(n + 1);
    for (int j = 0; j <= n; ++j) env[j] = std::exp(-rep.sigma_used * g.x(j));
    for (int order = 0; order <= 1; ++order) {
      double c = 0.0;
      c = std::max(c, detail::envelope_constant(drho, env, dc.delta_tilde, h, order));
      c = std::max(c, detail::envelope_constant(du, env, dc.delta_tilde, h, order));
      c = std::max(c, detail::envelope_constant(sp.omega, env, dc.delta_tilde, h, order));
      (order == 0 ? rep.C_exp_k0 : rep.C_exp_k1) = c;
    }
    if (rep.C_exp_k0 > cap || rep.C_exp_k1 > cap)
      throw EnvelopeViolated("validate_decay: supersonic envelope constant exceeds cap " +
                             std::to_string(cap));
    return rep;
  }

  // Transonic.
  rep.sigma_used = -dc.r1;
  if (dchi0 < 1e-14) {
    rep.C_alg_k0 = 0.0;
    rep.C_alg_k1 = 0.0;
    rep.C_exp_k0 = 0.0;
    rep.C_exp_k1 = 0.0;
    return rep;
  }
  std::vector<double> env_exp(n + 1), env_alg0(n + 1), env_alg1(n + 1), dchi(n + 1);
  for (int j = 0; j <= n; ++j) {
    env_exp[j] = std::exp(-rep.sigma_used * g.x(j));
    const double den = 1.0 + dc.delta_tilde * g.x(j);
    env_alg0[j] = 1.0 / den;
    env_alg1[j] = 1.0 / (den * den);
    dchi[j] = sp.chi[j] - 1.0;
  }
  // chi against its own amplitude, physical fields against delta_tilde.
  {
    std::vector<double> envc0(n + 1), envc1(n + 1);
    for (int j = 0; j <= n; ++j) {
      const double den = 1.0 + dchi0 * g.x(j);
      envc0[j] = 1.0 / den;
      envc1[j] = 1.0 / (den * den);
    }
    double c0 = detail::envelope_constant(dchi, envc0, dchi0, h, 0);
    double c1 = detail::envelope_constant(dchi, envc1, dchi0 * dchi0, h, 1);
    c0 = std::max(c0, detail::envelope_constant(drho, env_alg0, dc.delta_tilde, h, 0));
    c0 = std::max(c0, detail::envelope_constant(du, env_alg0, dc.delta_tilde, h, 0));
    c1 = std::max(c1, detail::envelope_constant(drho, env_alg1, dc.delta_tilde * dc.delta_tilde, h, 1));
    c1 = std::max(c1, detail::envelope_constant(du, env_alg1, dc.delta_tilde * dc.delta_tilde, h, 1));
    rep.C_alg_k0 = c0;
    rep.C_alg_k1 = c1;
  }
  rep.C_exp_k0 = detail::envelope_constant(sp.omega, env_exp, dc.delta_tilde, h, 0);
  rep.C_exp_k1 = detail::envelope_constant(sp.omega, env_exp, dc.delta_tilde, h, 1);
  if (rep.C_alg_k0 > cap || rep.C_alg_k1 > cap || rep.C_exp_k0 > cap || rep.C_exp_k1 > cap)
    throw EnvelopeViolated("validate_decay: transonic envelope constant exceeds cap " +
                           std::to_string(cap));

  // Tail-model discrimination on the far half: algebraic closure should fit
  // far better than an exponential one.
  std::vector<double> xs_lin, xs_log, ys;
  for (int j = 0; j <= n; ++j) {
    const double d = std::abs(dchi[j]);
    if (g.x(j) >= 0.5 * g.L && d > 1e-280) {
      xs_lin.push_back(g.x(j));
      xs_log.push_back(std::log(1.0 + dchi0 * g.x(j)));
      ys.push_back(std::log(d));
    }
  }
  if (xs_lin.size() < 8) throw WindowTooSmall("validate_decay: tail fit needs >= 8 usable samples");
  rep.exp_fit_rms = fit_line(xs_lin, ys).rms;
  rep.alg_fit_rms = fit_line(xs_log, ys).rms;
  return rep;
}

struct TransonicBoundsReport {
  // Smallest margin, over interior nodes, of the velocity-slope lower bound
  // (discrete slope plus slack minus the predicted floor); >= 0 passes.
  double ux_min_margin = 0.0;
  double ux_floor_at_0 = 0.0; // predicted floor at x = 0, for scale
  // Smallest constants closing the two-sided Mach excess bounds.
  double C_mach_lower = 0.0;
  double C_mach_upper = 0.0;
};

// Pointwise checks of the transonic profile structure: the velocity slope
// stays above an algebraic floor and the Mach excess M~ - 1 is pinched
// between two algebraic envelopes.
inline TransonicBoundsReport verify_transonic_bounds(const StationaryProfile& sp,
                                                     const ModelParams& p) {
  if (sp.regime != Regime::Transonic)
    throw ValidationError("verify_transonic_bounds: profile is not transonic");
  if (!(sp.chi0 > 1.0))
    throw ValidationError("verify_transonic_bounds: needs chi0 > 1 (nontrivial transonic data)");
  const Grid& g = sp.grid;
  const int n = g.n;
  const double h = g.h();
  const DerivedConstants dc = derive_constants(p);
  const double shape = std::pow(p.u_plus / p.u_b, p.gamma + 2.0);
  const double floor0 = dc.A * shape * dc.delta_tilde * dc.delta_tilde;

  const std::vector<double> du = deriv1(sp.u, h);
  const double slack = 10.0 * h * h * max_abs_second_diff(sp.u, h);

  TransonicBoundsReport rep;
  rep.ux_floor_at_0 = floor0;
  rep.ux_min_margin = std::numeric_limits<double>::infinity();
  rep.C_mach_lower = 0.0;
  rep.C_mach_upper = 0.0;
  for (int j = 1; j < n; ++j) {
    const double w = 1.0 + dc.B * g.x(j);
    const double floor_j = floor0 / (w * w);
    rep.ux_min_margin = std::min(rep.ux_min_margin, du[j] + slack - floor_j);

    const double mach_j = -sp.u[j] / std::sqrt(p.K * p.gamma * std::pow(sp.rho[j], p.gamma - 1.0));
    const double excess = mach_j - 1.0;
    const double lead = (p.gamma + 1.0) * dc.delta_tilde / (2.0 * -p.u_plus * w);
    rep.C_mach_lower = std::max(rep.C_mach_lower,
                                (lead - excess) * w * w / (dc.delta_tilde * dc.delta_tilde));
    rep.C_mach_upper = std::max(rep.C_mach_upper, excess * w / dc.delta_tilde);
  }
  rep.C_mach_lower = std::max(rep.C_mach_lower, 0.0);
  if (rep.ux_min_margin < 0.0)
    throw BoundViolated("verify_transonic_bounds: velocity slope fell below its floor (margin " +
                        std::to_string(rep.ux_min_margin) + ")");
  return rep;
}

} // namespace mpolar
