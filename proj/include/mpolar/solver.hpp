#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mpolar/analysis.hpp"
#include "mpolar/model.hpp"
#include "mpolar/state.hpp"
#include "mpolar/stationary.hpp"

// Time marching for the outflow system in conservative variables
// (rho, m, w) = (rho, rho u, rho omega): donor-cell upwind convection with
// node-averaged face velocities, centered pressure gradient, centered
// viscous terms on the primitives, and a two-stage Heun update with the
// boundary applied after every stage. Left boundary: u and omega pinned to
// the profile's boundary data, density by quadratic extrapolation. Right
// boundary: all fields pinned to the profile samples.

namespace mpolar {

struct PerturbationSpec {
  enum class Shape { Zero, Bump, Gaussian };
  Shape shape = Shape::Bump;
  double a_rho = 0.0;
  double a_u = 0.01;
  double a_omega = 0.0;
  double center = 3.0;
  double width = 1.5;
  // Largest value a u or omega perturbation may take at x = 0 before it
  // conflicts with the boundary data.
  double compat_tol = 1e-9;
};

inline void validate(const PerturbationSpec& ps) {
  if (!(std::isfinite(ps.width) && ps.width > 0.0))
    throw ValidationError("perturbation.width: must be finite and > 0");
  if (!std::isfinite(ps.center)) throw ValidationError("perturbation.center: must be finite");
  if (!std::isfinite(ps.a_rho) || !std::isfinite(ps.a_u) || !std::isfinite(ps.a_omega))
    throw ValidationError("perturbation amplitudes must be finite");
}

inline double shape_value(PerturbationSpec::Shape shape, double y) {
  switch (shape) {
    case PerturbationSpec::Shape::Zero:
      return 0.0;
    case PerturbationSpec::Shape::Bump: {
      if (std::abs(y) >= 1.0) return 0.0;
      const double t = 1.0 - y * y;
      return t * t * t * t;
    }
    default:
      return std::exp(-0.5 * y * y);
  }
}

struct InitialData {
  State state;
  // Weighted norms of the three seeded perturbation fields, after boundary
  // pinning.
  double wnorm_rho = 0.0;
  double wnorm_u = 0.0;
  double wnorm_omega = 0.0;
};

// Seed the stationary profile with a perturbation. u and omega seeds must
// vanish at x = 0 (within compat_tol); both ends are then pinned so the
// state meets the boundary data exactly.
inline InitialData build_initial(const StationaryProfile& sp, const PerturbationSpec& ps,
                                 const WeightSpec& w = {}) {
  validate(ps);
  validate(w);
  const Grid& g = sp.grid;
  const int n = g.n;
  InitialData out;
  State& s = out.state;
  s.t = 0.0;
  s.grid = g;
  s.rho = sp.rho;
  s.u = sp.u;
  s.omega = sp.omega;
  if (ps.shape != PerturbationSpec::Shape::Zero) {
    const double b0 = shape_value(ps.shape, (0.0 - ps.center) / ps.width);
    if (std::abs(ps.a_u * b0) > ps.compat_tol || std::abs(ps.a_omega * b0) > ps.compat_tol)
      throw CompatibilityViolated(
          "build_initial: u/omega perturbation does not vanish at x = 0 (value " +
          std::to_string(std::max(std::abs(ps.a_u * b0), std::abs(ps.a_omega * b0))) + ")");
    for (int j = 0; j <= n; ++j) {
      const double b = shape_value(ps.shape, (g.x(j) - ps.center) / ps.width);
      s.rho[j] += ps.a_rho * b;
      s.u[j] += ps.a_u * b;
      s.omega[j] += ps.a_omega * b;
    }
  }
  // Pin the boundary data; the left density stays free.
  s.u[0] = sp.u[0];
  s.omega[0] = sp.omega[0];
  s.rho[n] = sp.rho[n];
  s.u[n] = sp.u[n];
  s.omega[n] = sp.omega[n];
  for (int j = 0; j <= n; ++j)
    if (!(s.rho[j] > 0.0))
      throw PositivityLost("build_initial: density " + std::to_string(s.rho[j]) + " at x = " +
                           std::to_string(g.x(j)));
  std::vector<double> pert(n + 1);
  for (int j = 0; j <= n; ++j) pert[j] = s.rho[j] - sp.rho[j];
  out.wnorm_rho = weighted_norm(pert, g, w);
  for (int j = 0; j <= n; ++j) pert[j] = s.u[j] - sp.u[j];
  out.wnorm_u = weighted_norm(pert, g, w);
  for (int j = 0; j <= n; ++j) pert[j] = s.omega[j] - sp.omega[j];
  out.wnorm_omega = weighted_norm(pert, g, w);
  return out;
}

// Pin the boundary rows: left velocity and microrotation to the boundary
// data, left density by quadratic extrapolation from the interior, right
// end to the profile samples.
inline void apply_boundary(State& s, const StationaryProfile& sp) {
  const int n = s.grid.n;
  s.u[0] = sp.u[0];
  s.omega[0] = sp.omega[0];
  const double r0 = 3.0 * s.rho[1] - 3.0 * s.rho[2] + s.rho[3];
  if (!(r0 > 0.0))
    throw PositivityLost("apply_boundary: extrapolated boundary density " + std::to_string(r0));
  s.rho[0] = r0;
  s.rho[n] = sp.rho[n];
  s.u[n] = sp.u[n];
  s.omega[n] = sp.omega[n];
}

// Largest stable time step: CFL fraction of the tighter of the acoustic
// bound h / max(|u| + c) and the viscous bound h^2 min(rho) / (2 max(lambda, nu)).
inline double stable_dt(const State& s, const ModelParams& p, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw ValidationError("stable_dt: cfl must lie in (0, 1], got " + std::to_string(cfl));
  double amax = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  double probe = 0.0; // max/min pass NaN through silently; sum does not
  for (std::size_t j = 0; j < s.rho.size(); ++j) {
    const double c = std::sqrt(p.gamma * p.K * std::pow(s.rho[j], p.gamma - 1.0));
    amax = std::max(amax, std::abs(s.u[j]) + c);
    rmin = std::min(rmin, s.rho[j]);
    probe += s.rho[j] + s.u[j] + s.omega[j];
  }
  if (!std::isfinite(probe))
    throw NonFiniteField("stable_dt: non-finite state at t = " + std::to_string(s.t));
  const double h = s.grid.h();
  const double dt = cfl * std::min(h / amax, h * h * rmin / (2.0 * std::max(p.lambda, p.nu)));
  if (!std::isfinite(dt) || !(dt > 0.0))
    throw NonFiniteField("stable_dt: state produced a non-finite or nonpositive step");
  return dt;
}

struct SolverOptions {
  bool convection = true; // advective fluxes on
  bool pressure = true;   // pressure gradient on
  // Optional conservative source rows (manufactured-solution forcing):
  // called with the stage time; must write every node of the three arrays.
  std::function<void(double, const Grid&, std::vector<double>&, std::vector<double>&,
                     std::vector<double>&)>
      forcing;
};

struct RhsEval {
  std::vector<double> d_rho, d_m, d_w; // conservative tendencies; boundary rows zero
  double mass_flux_left = 0.0;         // numerical mass flux through face 1/2
  double mass_flux_right = 0.0;        // through face n-1/2
};

struct MassLedger {
  double initial = 0.0;       // interior mass when the ledger was reset
  double flux_integral = 0.0; // time-integrated net numerical inflow
};

inline double interior_mass(const State& s) {
  double m = 0.0;
  for (int j = 1; j < s.grid.n; ++j) m += s.rho[j];
  return m * s.grid.h();
}

inline double mass_drift(const State& s, const MassLedger& l) {
  return interior_mass(s) - l.initial - l.flux_integral;
}

// Owns the workspaces for repeated right-hand-side evaluations and steps.
class Stepper {
 public:
  Stepper(const StationaryProfile& prof, const ModelParams& p, SolverOptions opts = {})
      : prof_(&prof), p_(p), opts_(std::move(opts)) {
    validate(p_);
    const int n = prof.grid.n;
    fr_.assign(n, 0.0);
    fm_.assign(n, 0.0);
    fw_.assign(n, 0.0);
    press_.assign(n + 1, 0.0);
    frho_.assign(n + 1, 0.0);
    fmom_.assign(n + 1, 0.0);
    fmic_.assign(n + 1, 0.0);
    m0_.assign(n + 1, 0.0);
    w0_.assign(n + 1, 0.0);
    r0_.assign(n + 1, 0.0);
    s1_.grid = prof.grid;
    s1_.rho.assign(n + 1, 0.0);
    s1_.u.assign(n + 1, 0.0);
    s1_.omega.assign(n + 1, 0.0);
  }

  const MassLedger& ledger() const { return ledger_; }
  void reset_ledger(const State& s) {
    ledger_.initial = interior_mass(s);
    ledger_.flux_integral = 0.0;
  }

  void rhs(const State& s, RhsEval& out) {
    const Grid& g = s.grid;
    const int n = g.n;
    const double h = g.h();
    const double h2 = h * h;
    out.d_rho.assign(n + 1, 0.0);
    out.d_m.assign(n + 1, 0.0);
    out.d_w.assign(n + 1, 0.0);
    if (opts_.pressure)
      for (int j = 0; j <= n; ++j) press_[j] = p_.K * std::pow(s.rho[j], p_.gamma);
    if (opts_.convection) {
      for (int jf = 0; jf < n; ++jf) {
        const double uf = 0.5 * (s.u[jf] + s.u[jf + 1]);
        const int d = (uf < 0.0) ? jf + 1 : jf;
        const double f = s.rho[d] * s.u[d];
        fr_[jf] = f;
        fm_[jf] = f * s.u[d];
        fw_[jf] = f * s.omega[d];
      }
      out.mass_flux_left = fr_[0];
      out.mass_flux_right = fr_[n - 1];
    } else {
      out.mass_flux_left = 0.0;
      out.mass_flux_right = 0.0;
    }
    const bool has_forcing = static_cast<bool>(opts_.forcing);
    if (has_forcing) opts_.forcing(s.t, g, frho_, fmom_, fmic_);
    double probe = 0.0;
    for (int j = 1; j < n; ++j) {
      double dr = 0.0, dm = 0.0, dw = 0.0;
      if (opts_.convection) {
        dr -= (fr_[j] - fr_[j - 1]) / h;
        dm -= (fm_[j] - fm_[j - 1]) / h;
        dw -= (fw_[j] - fw_[j - 1]) / h;
      }
      if (opts_.pressure) dm -= (press_[j + 1] - press_[j - 1]) / (2.0 * h);
      dm += p_.lambda * (s.u[j + 1] - 2.0 * s.u[j] + s.u[j - 1]) / h2;
      dw += p_.nu * (s.omega[j + 1] - 2.0 * s.omega[j] + s.omega[j - 1]) / h2 -
            p_.mu * s.omega[j];
      if (has_forcing) {
        dr += frho_[j];
        dm += fmom_[j];
        dw += fmic_[j];
      }
      out.d_rho[j] = dr;
      out.d_m[j] = dm;
      out.d_w[j] = dw;
      probe += dr + dm + dw;
    }
    if (!std::isfinite(probe))
      throw NonFiniteField("rhs: non-finite tendency at t = " + std::to_string(s.t));
  }

  // Heun step in place; accumulates the mass ledger with the same stage
  // weights as the update so interior mass telescopes exactly.
  void step(State& s, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw ValidationError("step: dt must be positive and finite");
    const int n = s.grid.n;
    for (int j = 0; j <= n; ++j) {
      r0_[j] = s.rho[j];
      m0_[j] = s.rho[j] * s.u[j];
      w0_[j] = s.rho[j] * s.omega[j];
    }
    rhs(s, k1_);
    s1_.t = s.t + dt;
    s1_.rho[0] = s.rho[0];
    s1_.u[0] = s.u[0];
    s1_.omega[0] = s.omega[0];
    s1_.rho[n] = s.rho[n];
    s1_.u[n] = s.u[n];
    s1_.omega[n] = s.omega[n];
    for (int j = 1; j < n; ++j) {
      const double rho1 = r0_[j] + dt * k1_.d_rho[j];
      if (!(rho1 > 0.0))
        throw PositivityLost("step: density " + std::to_string(rho1) + " at x = " +
                             std::to_string(s.grid.x(j)) + ", t = " + std::to_string(s1_.t));
      s1_.rho[j] = rho1;
      s1_.u[j] = (m0_[j] + dt * k1_.d_m[j]) / rho1;
      s1_.omega[j] = (w0_[j] + dt * k1_.d_w[j]) / rho1;
    }
    apply_boundary(s1_, *prof_);
    rhs(s1_, k2_);
    for (int j = 1; j < n; ++j) {
      const double rho2 = r0_[j] + 0.5 * dt * (k1_.d_rho[j] + k2_.d_rho[j]);
      if (!(rho2 > 0.0))
        throw PositivityLost("step: density " + std::to_string(rho2) + " at x = " +
                             std::to_string(s.grid.x(j)) + ", t = " + std::to_string(s.t + dt));
      s.rho[j] = rho2;
      s.u[j] = (m0_[j] + 0.5 * dt * (k1_.d_m[j] + k2_.d_m[j])) / rho2;
      s.omega[j] = (w0_[j] + 0.5 * dt * (k1_.d_w[j] + k2_.d_w[j])) / rho2;
    }
    s.t += dt;
    apply_boundary(s, *prof_);
    ledger_.flux_integral += 0.5 * dt *
                             ((k1_.mass_flux_left - k1_.mass_flux_right) +
                              (k2_.mass_flux_left - k2_.mass_flux_right));
  }

 private:
  const StationaryProfile* prof_;
  ModelParams p_;
  SolverOptions opts_;
  MassLedger ledger_{};
  std::vector<double> fr_, fm_, fw_, press_, frho_, fmom_, fmic_, m0_, w0_, r0_;
  State s1_;
  RhsEval k1_, k2_;
};

// One-off wrappers (tests, diagnostics); long runs should hold a Stepper.
inline RhsEval rhs(const State& s, const StationaryProfile& prof, const ModelParams& p,
                   const SolverOptions& opts = {}) {
  Stepper st(prof, p, opts);
  RhsEval out;
  st.rhs(s, out);
  return out;
}

inline void step(State& s, double dt, const StationaryProfile& prof, const ModelParams& p,
                 const SolverOptions& opts = {}) {
  Stepper st(prof, p, opts);
  st.step(s, dt);
}

struct RunOptions {
  double cfl = 0.4;
  SolverOptions solver{};
  std::vector<double> observe_at{}; // ascending observation times
  std::function<void(const State&)> observer{};
  long long max_steps = 2000000000LL;
};

struct RunResult {
  long long steps = 0;
  int observations = 0;
  double mass_drift = 0.0;
};

// March the state to t_end, landing exactly on each observation time and on
// t_end. Observation times at or before the state time fire immediately;
// times beyond t_end never fire.
inline RunResult run(State& s, double t_end, const StationaryProfile& prof,
                     const ModelParams& p, const RunOptions& opt = {}) {
  if (!(t_end >= s.t)) throw ValidationError("run: t_end precedes the state time");
  Stepper st(prof, p, opt.solver);
  st.reset_ledger(s);
  RunResult res;
  std::vector<double> obs = opt.observe_at;
  std::sort(obs.begin(), obs.end());
  std::size_t oi = 0;
  auto fire_due = [&]() {
    while (oi < obs.size() && obs[oi] <= s.t + 1e-9 * std::max(1.0, std::abs(obs[oi]))) {
      if (opt.observer) opt.observer(s);
      ++res.observations;
      ++oi;
    }
  };
  fire_due();
  const double teps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (s.t < t_end - teps) {
    if (res.steps >= opt.max_steps) throw Error("run: exceeded max_steps");
    double dt = stable_dt(s, p, opt.cfl);
    double target = t_end;
    if (oi < obs.size()) target = std::min(target, obs[oi]);
    if (target - s.t <= dt) dt = target - s.t;
    st.step(s, dt);
    ++res.steps;
    fire_due();
  }
  res.mass_drift = mass_drift(s, st.ledger());
  return res;
}

} // namespace mpolar
