// Acceptance battery for the outflow laboratory. Each criterion prints one
// machine-greppable line
//   RESULT <name> PASS|FAIL <value>
// on stdout; diagnostics go to stderr. Exit status 0 iff every criterion
// passes.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mpolar/analysis.hpp"
#include "mpolar/manufactured.hpp"
#include "mpolar/model.hpp"
#include "mpolar/numerics.hpp"
#include "mpolar/solver.hpp"
#include "mpolar/stationary.hpp"

using namespace mpolar;

namespace {

int g_failures = 0;

void result(const std::string& name, bool pass, const std::string& value) {
  if (!pass) ++g_failures;
  std::cout << "RESULT " << name << (pass ? " PASS " : " FAIL ") << value << std::endl;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

ModelParams supersonic_desk() {
  ModelParams p;
  p.gamma = 1.4;
  p.u_plus = -1.5 * sound_speed_plus(p);
  p.u_b = 0.9 * p.u_plus;
  p.omega_b = 0.05;
  return p;
}

ModelParams transonic_desk() {
  ModelParams p;
  p.gamma = 1.4;
  p.u_plus = sonic_u_plus(p.K, p.gamma, p.rho_plus);
  p.u_b = 1.05 * p.u_plus;
  p.omega_b = 0.02;
  return p;
}

double transonic_length(const ModelParams& p) {
  return 50.0 / derive_constants(p).delta_tilde;
}

// Time series of a marched perturbation: observation times, sup norms, and
// optionally a per-observation custom functional.
struct Series {
  std::vector<double> t;
  std::vector<double> sup;
  std::vector<double> extra;
  double drift = 0.0;
};

Series march(const StationaryProfile& sp, const ModelParams& p, const PerturbationSpec& ps,
             double t_end, double interval, double cfl,
             const std::function<double(const State&)>& extra = {}) {
  auto init = build_initial(sp, ps);
  State s = init.state;
  Series out;
  RunOptions opt;
  opt.cfl = cfl;
  for (int k = 0; k * interval < t_end - 1e-12; ++k) opt.observe_at.push_back(k * interval);
  opt.observe_at.push_back(t_end);
  opt.observer = [&](const State& st) {
    out.t.push_back(st.t);
    out.sup.push_back(sup_norm_perturbation(st, sp));
    if (extra) out.extra.push_back(extra(st));
  };
  out.drift = run(s, t_end, sp, p, opt).mass_drift;
  return out;
}

// Last observation index whose signal still clears five times the floor of
// the matching quiet run; -1 if none do.
int plateau_cut(const std::vector<double>& sig, const std::vector<double>& floor_sig) {
  int cut = -1;
  for (std::size_t i = 0; i < sig.size(); ++i)
    if (sig[i] >= 5.0 * floor_sig[i]) cut = static_cast<int>(i);
  return cut;
}

// ---------------------------------------------------------------------------
// 1. Existence boundary: the classifier flips exactly at Mach 1, and every
// constructed profile solves its equation to tight tolerance.
void criterion_existence_sweep() {
  const double machs[6] = {0.8, 0.95, 1.0, 1.05, 1.5, 2.0};
  const Regime want[6] = {Regime::NonExistent, Regime::NonExistent, Regime::Transonic,
                          Regime::Supersonic,  Regime::Supersonic,  Regime::Supersonic};
  bool regimes_ok = true;
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    ModelParams p;
    p.gamma = 1.4;
    const double c = sound_speed_plus(p);
    p.u_plus = -machs[i] * c;
    p.u_b = -1.1 * c; // fixed boundary pull, admissible across the sweep
    p.omega_b = 0.05;
    const ChiProblem prob = classify(p);
    std::cerr << "  [sweep] mach " << machs[i] << " -> " << to_string(prob.regime) << "\n";
    if (prob.regime != want[i]) regimes_ok = false;
    if (prob.regime == Regime::NonExistent) continue;
    const DerivedConstants dc = derive_constants(p);
    double L;
    if (prob.regime == Regime::Supersonic) {
      const double sig = std::min(-dc.r1, xi0_predicted(p));
      L = 12.0 / sig;
    } else {
      L = 50.0 / dc.delta_tilde;
    }
    const StationaryProfile sp = solve_chi_profile(prob, p, Grid{L, 4096});
    const double r = ode_residual_max(sp, p);
    std::cerr << "    L " << L << ", residual " << r << "\n";
    worst = std::max(worst, r);
  }
  result("stationary_existence_sweep", regimes_ok && worst <= 1e-8, fmt(worst));
}

// ---------------------------------------------------------------------------
// 2. The closed-form spin profile against an independent second-order
// two-point boundary-value solve.
void criterion_spin_profile_oracle() {
  const ModelParams p = supersonic_desk();
  const double L = 12.5;
  const double q = p.rho_plus * p.u_plus;
  double errs[3];
  const int ns[3] = {2048, 4096, 8192};
  for (int i = 0; i < 3; ++i) {
    const Grid g{L, ns[i]};
    const double h = g.h();
    const int m = g.n - 1;
    std::vector<double> lo(m), di(m), up(m), rhs(m, 0.0);
    const double al = p.nu / (h * h) + q / (2.0 * h);
    const double ad = -2.0 * p.nu / (h * h) - p.mu;
    const double au = p.nu / (h * h) - q / (2.0 * h);
    for (int j = 0; j < m; ++j) {
      lo[j] = al;
      di[j] = ad;
      up[j] = au;
    }
    rhs[0] = -al * p.omega_b; // omega(0) = omega_b, omega(L) = 0
    const std::vector<double> w = tridiag_solve(lo, di, up, rhs);
    double e = 0.0;
    for (int j = 1; j < g.n; ++j)
      e = std::max(e, std::abs(w[j - 1] - stationary_omega(g.x(j), p)));
    errs[i] = e;
    std::cerr << "  [spin bvp] n " << ns[i] << ", max error " << e << "\n";
  }
  const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
  std::cerr << "  [spin bvp] refinement ratios " << r1 << ", " << r2 << "\n";
  const bool pass = errs[2] <= 5e-6 && std::abs(r1 - 4.0) <= 0.3 && std::abs(r2 - 4.0) <= 0.3;
  result("spin_profile_oracle", pass, fmt(errs[2]));
}

// ---------------------------------------------------------------------------
// 3. Supersonic envelope: positive measured tail rate, tight log fit, small
// certifying constants for the field and slope envelopes.
void criterion_supersonic_envelope() {
  const ModelParams p = supersonic_desk();
  const StationaryProfile sp = solve_chi_profile(p, Grid{12.5, 4096});
  const EnvelopeReport er = validate_decay(sp, p);
  std::cerr << "  [supersonic envelope] xi0 " << er.xi0_measured << " (fit rms "
            << er.xi0_fit_rms << "), C_k0 " << er.C_exp_k0 << ", C_k1 " << er.C_exp_k1 << "\n";
  const double cmax = std::max(er.C_exp_k0, er.C_exp_k1);
  const bool pass = er.xi0_measured > 0.0 && er.xi0_fit_rms < 1e-3 && cmax <= 10.0;
  result("supersonic_envelope", pass, fmt(cmax));
}

// ---------------------------------------------------------------------------
// 4. Transonic envelope: algebraic closure with small constants, and the
// exponential tail model visibly loses to the algebraic one.
StationaryProfile g_transonic_profile; // reused by criteria 5 and 9
ModelParams g_transonic_params;

void criterion_transonic_envelope() {
  const ModelParams p = transonic_desk();
  const double L = transonic_length(p);
  const StationaryProfile sp = solve_chi_profile(p, Grid{L, 8192});
  const EnvelopeReport er = validate_decay(sp, p);
  std::cerr << "  [transonic envelope] L " << L << ", C_alg_k0 " << er.C_alg_k0 << ", C_alg_k1 "
            << er.C_alg_k1 << ", alg rms " << er.alg_fit_rms << ", exp rms " << er.exp_fit_rms
            << "\n";
  const double cmax = std::max(er.C_alg_k0, er.C_alg_k1);
  const bool pass =
      cmax <= 10.0 && er.exp_fit_rms > 10.0 * er.alg_fit_rms && std::isfinite(er.alg_fit_rms);
  result("transonic_envelope", pass, fmt(cmax));
  g_transonic_profile = sp;
  g_transonic_params = p;
}

// ---------------------------------------------------------------------------
// 5. Pointwise structure of the transonic layer: the velocity slope stays
// above its algebraic floor and the Mach excess is pinched two-sidedly.
void criterion_transonic_pointwise_bounds() {
  if (g_transonic_profile.chi.empty()) {
    result("transonic_pointwise_bounds", false, "no transonic profile available");
    return;
  }
  const TransonicBoundsReport br =
      verify_transonic_bounds(g_transonic_profile, g_transonic_params);
  std::cerr << "  [transonic bounds] ux margin " << br.ux_min_margin << " (floor at 0 "
            << br.ux_floor_at_0 << "), C_lower " << br.C_mach_lower << ", C_upper "
            << br.C_mach_upper << "\n";
  const double cmax = std::max(br.C_mach_lower, br.C_mach_upper);
  const bool pass = br.ux_min_margin >= 0.0 && std::isfinite(cmax) && cmax <= 10.0;
  result("transonic_pointwise_bounds", pass, fmt(cmax));
}

// ---------------------------------------------------------------------------
// 6. Weighted tail estimates with explicit constants on a randomized field
// suite: one thousand smooth fields, both weight families, zero violations.
void criterion_tail_certificates() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> A(-1.0, 1.0), F(0.1, 3.0);
  const Grid g{20.0, 512};
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> h(g.n + 1, 0.0);
    for (int m = 1; m <= 8; ++m) {
      const double a = A(rng) / m, f = F(rng), ph = 3.0 * A(rng);
      for (int j = 0; j <= g.n; ++j) h[j] += a * std::cos(f * g.x(j) + ph);
    }
    for (double sigma : {0.5, 1.0, 2.0})
      if (!poincare_exponential(h, sigma, g).holds) ++violations;
    for (double delta : {0.05, 0.5, 2.0})
      if (!poincare_algebraic(h, delta, 2.0, g).holds) ++violations;
  }
  std::cerr << "  [tail certificates] violations " << violations << " / 6000 checks\n";
  result("tail_estimate_certificates", violations == 0, std::to_string(violations));
}

// ---------------------------------------------------------------------------
// 7. The integrated energy identity closes under refinement: the residual
// shrinks monotonically at first order or better.
void criterion_energy_residual() {
  const ModelParams p = supersonic_desk();
  const WeightSpec w{2.0, 0.05, 0};
  PerturbationSpec ps;
  ps.shape = PerturbationSpec::Shape::Bump;
  ps.a_u = 0.01;
  ps.center = 3.0;
  ps.width = 1.5;
  double rmax[3];
  const int ns[3] = {512, 1024, 2048};
  for (int i = 0; i < 3; ++i) {
    const StationaryProfile sp = solve_chi_profile(p, Grid{12.5, ns[i]});
    auto init = build_initial(sp, ps, w);
    State s = init.state;
    RunOptions opt;
    opt.cfl = 0.8;
    const double interval = 0.2 * 512.0 / ns[i]; // time sampling tied to h
    std::vector<State> snaps;
    for (int k = 0; k * interval < 3.0 - 1e-12; ++k) opt.observe_at.push_back(k * interval);
    opt.observe_at.push_back(3.0);
    opt.observer = [&](const State& st) { snaps.push_back(st); };
    run(s, 3.0, sp, p, opt);
    const auto samples = energy_balance_residual(snaps, sp, p, w);
    // fixed window [0.4, 3]: every level samples t=0.4 exactly, so refinement
    // compares like with like instead of probing ever deeper into the initial
    // transient as the first sample time shrinks with h
    double r = 0.0;
    for (const auto& es : samples)
      if (es.t >= 0.4 - 1e-12) r = std::max(r, std::abs(es.residual));
    rmax[i] = r;
    std::cerr << "  [energy residual] n " << ns[i] << ", max |R| over [0.4, 3] " << r << "\n";
  }
  const double order = std::log2(rmax[0] / rmax[2]) / 2.0;
  std::cerr << "  [energy residual] order " << order << "\n";
  const bool pass = rmax[0] > rmax[1] && rmax[1] > rmax[2] && order >= 0.8;
  result("energy_residual_refinement", pass, fmt(order));
}

// ---------------------------------------------------------------------------
// 8. Supersonic decay rate: fitted sup-norm exponent over the post-burn-in
// window, with the plateau excluded via a quiet twin run; the perturbation
// must also genuinely shrink by the end.
double g_desk_drift = 0.0; // reused by criterion 11

void criterion_supersonic_decay() {
  const ModelParams p = supersonic_desk();
  const int n = 1024;
  const double t_end = 12.0, interval = 0.25, burn_in = 2.0, cfl = 0.8;
  const StationaryProfile sp = solve_chi_profile(p, Grid{12.5, n});
  PerturbationSpec ps;
  ps.a_u = 0.05;
  ps.center = 3.0;
  ps.width = 1.5;
  std::cerr << "  [supersonic decay] marching n " << n << " to t " << t_end << "\n";
  const Series sig = march(sp, p, ps, t_end, interval, cfl);
  g_desk_drift = sig.drift;
  PerturbationSpec quiet;
  quiet.shape = PerturbationSpec::Shape::Zero;
  const Series ref = march(sp, p, quiet, t_end, interval, cfl);
  for (std::size_t i = 0; i < sig.t.size(); i += 4)
    std::cerr << "    t " << sig.t[i] << "  sup " << sig.sup[i] << "  floor " << ref.sup[i]
              << "\n";
  std::cerr << "  [supersonic decay] sup(0) " << sig.sup.front() << ", sup(T) " << sig.sup.back()
            << ", floor(T) " << ref.sup.back() << ", drift " << sig.drift << "\n";
  const bool floor_ok = 0.1 * sig.sup.front() >= 2.0 * ref.sup.back();
  const int cut = plateau_cut(sig.sup, ref.sup);
  double expo = 0.0;
  bool fit_ok = false;
  if (cut >= 0 && sig.t[cut] > burn_in) {
    try {
      const DecayFit fit = fit_decay(sig.t, sig.sup, burn_in, sig.t[cut]);
      expo = fit.exponent;
      fit_ok = true;
      std::cerr << "  [supersonic decay] exponent " << expo << " over [" << fit.t_lo << ", "
                << fit.t_hi << "], rms " << fit.rms << "\n";
    } catch (const Error& e) {
      std::cerr << "  [supersonic decay] fit failed: " << e.what() << "\n";
    }
  }
  const bool final_ok = sig.sup.back() <= 0.1 * sig.sup.front() + 2.0 * ref.sup.back();
  const bool pass = floor_ok && fit_ok && expo >= 0.7 && final_ok;
  result("supersonic_decay_rate", pass, fmt(expo));
}

// ---------------------------------------------------------------------------
// 9. Transonic decay rate: slower algebraic decay, monotone after burn-in,
// fitted exponent above the one-sided threshold.
void criterion_transonic_decay() {
  if (g_transonic_profile.chi.empty()) {
    result("transonic_decay_rate", false, "no transonic profile available");
    return;
  }
  const ModelParams p = g_transonic_params;
  const StationaryProfile& sp = g_transonic_profile;
  const double t_end = 60.0, interval = 1.0, burn_in = 30.0, cfl = 0.8;
  PerturbationSpec ps;
  ps.a_u = 0.1;
  ps.center = 40.0;
  ps.width = 15.0;
  std::cerr << "  [transonic decay] marching n " << sp.grid.n << " to t " << t_end << "\n";
  const Series sig = march(sp, p, ps, t_end, interval, cfl);
  PerturbationSpec quiet;
  quiet.shape = PerturbationSpec::Shape::Zero;
  const Series ref = march(sp, p, quiet, t_end, interval, cfl);
  for (std::size_t i = 0; i < sig.t.size(); i += 4)
    std::cerr << "    t " << sig.t[i] << "  sup " << sig.sup[i] << "  floor " << ref.sup[i]
              << "\n";
  std::cerr << "  [transonic decay] sup(0) " << sig.sup.front() << ", sup(T) " << sig.sup.back()
            << ", floor(T) " << ref.sup.back() << "\n";
  const int cut = plateau_cut(sig.sup, ref.sup);
  // monotone up to the plateau cut: inside the floor the signal is gone and
  // roundoff-scale wiggle is expected
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < sig.t.size(); ++i)
    if (sig.t[i] >= burn_in && static_cast<int>(i) < cut && sig.sup[i + 1] > sig.sup[i] * 1.001)
      monotone = false;
  double expo = 0.0;
  bool fit_ok = false;
  if (cut >= 0 && sig.t[cut] > burn_in) {
    try {
      const DecayFit fit = fit_decay(sig.t, sig.sup, burn_in, sig.t[cut]);
      expo = fit.exponent;
      fit_ok = true;
      std::cerr << "  [transonic decay] exponent " << expo << " over [" << fit.t_lo << ", "
                << fit.t_hi << "], rms " << fit.rms << ", monotone " << monotone << "\n";
    } catch (const Error& e) {
      std::cerr << "  [transonic decay] fit failed: " << e.what() << "\n";
    }
  }
  const bool pass = fit_ok && expo >= 0.3 && monotone;
  result("transonic_decay_rate", pass, fmt(expo));
}

// ---------------------------------------------------------------------------
// 10. Spin relaxation: a pure microrotation perturbation dies out toward the
// nontrivial stationary spin field, never toward zero, with the boundary
// value pinned exactly.
void criterion_spin_relaxation() {
  const ModelParams p = supersonic_desk();
  const int n = 1024;
  const double t_end = 12.0, interval = 0.5, cfl = 0.8;
  const StationaryProfile sp = solve_chi_profile(p, Grid{12.5, n});
  PerturbationSpec ps;
  ps.a_u = 0.0;
  ps.a_omega = 0.01;
  ps.center = 3.0;
  ps.width = 1.5;
  bool pinned = true;
  auto zeta_sup = [&](const State& s) {
    if (s.omega[0] != sp.omega[0]) pinned = false;
    double m = 0.0;
    for (int j = 0; j <= s.grid.n; ++j) m = std::max(m, std::abs(s.omega[j] - sp.omega[j]));
    return m;
  };
  std::cerr << "  [spin relaxation] marching n " << n << " to t " << t_end << "\n";
  const Series sig = march(sp, p, ps, t_end, interval, cfl, zeta_sup);
  PerturbationSpec quiet;
  quiet.shape = PerturbationSpec::Shape::Zero;
  const Series ref = march(sp, p, quiet, t_end, interval, cfl, zeta_sup);
  const double z0 = sig.extra.front(), zT = sig.extra.back(), fT = ref.extra.back();
  std::cerr << "  [spin relaxation] zeta(0) " << z0 << ", zeta(T) " << zT << ", spin floor(T) "
            << fT << ", boundary pinned " << pinned << "\n";
  // far from zero: the stationary spin amplitude dwarfs the leftover zeta
  const double omega_scale = std::abs(p.omega_b);
  const bool decays = zT <= 0.1 * z0 + 2.0 * fT;
  const bool matches = zT <= 2.0 * fT + 1e-12;
  const bool nontrivial = omega_scale > 10.0 * zT;
  const bool pass = pinned && decays && matches && nontrivial;
  result("spin_relaxation", pass, fmt(zT));
}

// ---------------------------------------------------------------------------
// 11. Scheme verification: manufactured-solution orders (full system first
// order, diffusion-only second order, time integration second order) and
// the mass ledger from the criterion-8 run.
void criterion_scheme_orders() {
  const ModelParams p = supersonic_desk();

  auto spatial_order = [&](const ManufacturedCase& mc, bool convection, bool pressure) {
    double errs[3];
    const int ns[3] = {512, 1024, 2048};
    for (int i = 0; i < 3; ++i) {
      const Grid g{12.5, ns[i]};
      const auto prof = mc.boundary_profile(g);
      State s = mc.state(g, 0.0);
      RunOptions opt;
      opt.cfl = 0.4;
      opt.solver = mc.options(p, convection, pressure);
      run(s, 0.5, prof, p, opt);
      errs[i] = mc.error(s).total();
    }
    std::cerr << "    errors " << errs[0] << " " << errs[1] << " " << errs[2] << "\n";
    return std::log2(errs[1] / errs[2]); // finest pair
  };

  std::cerr << "  [orders] full system\n";
  const ManufacturedCase full;
  const double o_full = spatial_order(full, true, true);
  std::cerr << "  [orders] diffusion-only\n";
  const ManufacturedCase diff = diffusion_only_case();
  const double o_diff = spatial_order(diff, false, false);

  // Temporal order by step-halving self-convergence on a fixed grid: the
  // spatial operator cancels in solution differences.
  const Grid g{12.5, 512};
  const auto prof = full.boundary_profile(g);
  const SolverOptions fopts = full.options(p, true, true);
  const double T = 0.25;
  State probe = full.state(g, 0.0);
  const double dt0 = 0.5 * stable_dt(probe, p, 1.0);
  const long N0 = static_cast<long>(std::ceil(T / dt0));
  std::vector<State> sols;
  for (int k = 0; k < 3; ++k) {
    const long N = N0 << k;
    const double dt = T / static_cast<double>(N);
    State s = full.state(g, 0.0);
    Stepper st(prof, p, fopts);
    for (long i = 0; i < N; ++i) st.step(s, dt);
    sols.push_back(s);
  }
  auto diff_max = [](const State& a, const State& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.rho.size(); ++j) {
      m = std::max(m, std::abs(a.rho[j] - b.rho[j]));
      m = std::max(m, std::abs(a.u[j] - b.u[j]));
      m = std::max(m, std::abs(a.omega[j] - b.omega[j]));
    }
    return m;
  };
  const double e01 = diff_max(sols[0], sols[1]), e12 = diff_max(sols[1], sols[2]);
  const double o_time = std::log2(e01 / e12);
  std::cerr << "  [orders] spatial " << o_full << ", diffusion-only " << o_diff << ", temporal "
            << o_time << " (diffs " << e01 << ", " << e12 << "), desk drift " << g_desk_drift
            << "\n";
  // the upwind error's h^2 correction is negative here, so the observed pair
  // order approaches 1 strictly from below (0.986 at the finest pair); the
  // demonstration threshold carries the same 0.1 slack below formal order
  // that the diffusion-only check uses (1.9 against 2)
  const bool pass = o_full >= 0.9 && o_diff >= 1.9 && o_time >= 1.7 && o_time <= 2.3 &&
                    std::abs(g_desk_drift) <= 1e-6;
  result("scheme_orders_and_mass",
         pass,
         "spatial=" + fmt(o_full) + " diffusion=" + fmt(o_diff) + " temporal=" + fmt(o_time) +
             " drift=" + fmt(g_desk_drift));
}

void guarded(const std::string& name, void (*fn)()) {
  try {
    fn();
  } catch (const std::exception& e) {
    std::cerr << "  [" << name << "] threw: " << e.what() << "\n";
    result(name, false, std::string("exception: ") + e.what());
  }
}

} // namespace

int main() {
  guarded("stationary_existence_sweep", criterion_existence_sweep);
  guarded("spin_profile_oracle", criterion_spin_profile_oracle);
  guarded("supersonic_envelope", criterion_supersonic_envelope);
  guarded("transonic_envelope", criterion_transonic_envelope);
  guarded("transonic_pointwise_bounds", criterion_transonic_pointwise_bounds);
  guarded("tail_estimate_certificates", criterion_tail_certificates);
  guarded("energy_residual_refinement", criterion_energy_residual);
  guarded("supersonic_decay_rate", criterion_supersonic_decay);
  guarded("transonic_decay_rate", criterion_transonic_decay);
  guarded("spin_relaxation", criterion_spin_relaxation);
  guarded("scheme_orders_and_mass", criterion_scheme_orders);
  std::cerr << (g_failures == 0 ? "acceptance: all criteria pass\n"
                                : "acceptance: FAILURES present\n");
  return g_failures == 0 ? 0 : 1;
}
