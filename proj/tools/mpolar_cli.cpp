// Command-line front end: stationary | simulate | rates | check.
// Exit codes: 0 success (including a clean nonexistent-regime report),
// 1 runtime failure, 2 usage error, 3 invalid configuration or data.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "mpolar/analysis.hpp"
#include "mpolar/config.hpp"
#include "mpolar/experiment.hpp"
#include "mpolar/model.hpp"
#include "mpolar/stationary.hpp"

namespace {

using namespace mpolar;

void print_report(const ExperimentReport& rep, std::ostream& os) {
  os << "regime: " << to_string(rep.regime) << "\n";
  for (const auto& n : rep.notes) os << n << "\n";
  for (const auto& c : rep.checks)
    os << "RESULT " << c.name << (c.pass ? " PASS " : " FAIL ") << c.value << "\n";
}

bool report_result(std::ostream& os, const std::string& name, bool pass, double value) {
  os << "RESULT " << name << (pass ? " PASS " : " FAIL ") << format_float(value) << "\n";
  return pass;
}

// Randomized self-checks of the algebraic kernels. Deterministic per seed.
bool run_check_suite(unsigned long long seed, std::ostream& os) {
  std::mt19937_64 rng(seed);
  bool all = true;

  {
    // Characteristic roots solve their quadratic and split around zero.
    std::uniform_real_distribution<double> U(0.1, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      ModelParams p;
      p.nu = U(rng);
      p.mu = U(rng);
      p.rho_plus = U(rng);
      p.u_plus = -U(rng);
      p.u_b = 0.9 * p.u_plus;
      const CharRoots cr = char_roots(p);
      const double q = p.rho_plus * p.u_plus;
      const double scale = std::abs(q) / p.nu + p.mu / p.nu;
      worst = std::max(worst, std::abs(cr.r1 * cr.r2 + p.mu / p.nu) / scale);
      worst = std::max(worst, std::abs(cr.r1 + cr.r2 - q / p.nu) / scale);
      if (!(cr.r1 < 0.0 && cr.r2 > 0.0)) worst = 1.0;
    }
    all &= report_result(os, "char_roots_quadratic", worst <= 1e-12, worst);
  }
  {
    // The sonic threshold root stays inside (0, 1) and annihilates the flux
    // function in the supersonic regime.
    std::uniform_real_distribution<double> G(1.0, 3.0), M(1.05, 3.0), U(0.2, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      ModelParams p;
      p.gamma = G(rng);
      p.K = U(rng);
      p.rho_plus = U(rng);
      p.u_plus = -M(rng) * sound_speed_plus(p);
      p.u_b = 0.9 * p.u_plus;
      const double cc = critical_chi(p);
      const double scale = p.K * std::pow(p.rho_plus, p.gamma) +
                           p.rho_plus * p.u_plus * p.u_plus;
      worst = std::max(worst, std::abs(flux_function(cc, p)) / scale);
      if (!(cc > 0.0 && cc < 1.0)) worst = 1.0;
    }
    all &= report_result(os, "critical_chi_root", worst <= 1e-12, worst);
  }
  {
    // Weighted norm of a constant against the closed-form integral.
    std::uniform_real_distribution<double> B(0.01, 2.0), L(1.0, 30.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      WeightSpec w;
      w.alpha = 2.0;
      w.beta = B(rng);
      Grid g{L(rng), 4096};
      std::vector<double> f(g.n + 1, 1.0);
      const double got = weighted_norm(f, g, w);
      const double bl = 1.0 + w.beta * g.L;
      const double want = std::sqrt((bl * bl * bl - 1.0) / (3.0 * w.beta));
      worst = std::max(worst, std::abs(got - want) / want);
    }
    // quadrature truncation on the quadratic weight, O(h^2), not roundoff
    all &= report_result(os, "weighted_norm_closed_form", worst <= 1e-6, worst);
  }
  {
    // Weighted tail estimates hold on random smooth fields.
    std::uniform_real_distribution<double> A(-1.0, 1.0), F(0.1, 3.0);
    int violations = 0;
    for (int i = 0; i < 200; ++i) {
      Grid g{20.0, 512};
      std::vector<double> h(g.n + 1, 0.0);
      for (int m = 1; m <= 6; ++m) {
        const double a = A(rng) / m, f = F(rng), ph = A(rng);
        for (int j = 0; j <= g.n; ++j) h[j] += a * std::cos(f * g.x(j) + ph);
      }
      for (double sigma : {0.5, 1.0, 2.0})
        if (!poincare_exponential(h, sigma, g).holds) ++violations;
      for (double delta : {0.05, 0.5, 2.0})
        if (!poincare_algebraic(h, delta, 2.0, g).holds) ++violations;
    }
    all &= report_result(os, "tail_estimates", violations == 0, violations);
  }
  {
    // The pressure potential is nonnegative and vanishes only on the diagonal.
    std::uniform_real_distribution<double> R(0.05, 5.0), G(1.0, 2.5);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      ModelParams p;
      p.gamma = G(rng);
      p.K = R(rng);
      const double a = R(rng), b = R(rng);
      const double phi = pressure_potential(a, b, p);
      if (phi < 0.0) worst = std::max(worst, -phi);
      if (std::abs(a - b) > 1e-3 && phi <= 0.0) worst = 1.0;
      const double diag = pressure_potential(b, b, p);
      worst = std::max(worst, std::abs(diag));
    }
    all &= report_result(os, "pressure_potential_sign", worst <= 1e-14, worst);
  }
  os << (all ? "check suite: all good\n" : "check suite: FAILURES\n");
  return all;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for a one-dimensional compressible micropolar outflow"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned long long seed = 20260825ULL;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment configuration file");
    if (need_config) opt->required();
    sub->add_option("--out", out_dir, "override the configured output directory");
    sub->add_option("--seed", seed, "seed for the randomized suites");
  };

  CLI::App* cmd_stationary =
      app.add_subcommand("stationary", "construct and verify the stationary profile");
  add_common(cmd_stationary, true);
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "full pipeline: profile, time marching, decay rates");
  add_common(cmd_simulate, true);
  CLI::App* cmd_rates =
      app.add_subcommand("rates", "re-fit decay rates from an existing run directory");
  add_common(cmd_rates, true);
  CLI::App* cmd_check = app.add_subcommand("check", "run the randomized invariant suite");
  add_common(cmd_check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    mpolar::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config '" << config_path << "'\n";
        return 3;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = mpolar::parse_config(ss.str());
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    if (cmd_check->parsed()) return run_check_suite(seed, std::cout) ? 0 : 1;
    if (cmd_stationary->parsed()) {
      print_report(mpolar::run_experiment(cfg, mpolar::ExperimentMode::Stationary), std::cout);
      return 0;
    }
    if (cmd_simulate->parsed()) {
      print_report(mpolar::run_experiment(cfg, mpolar::ExperimentMode::Simulate), std::cout);
      return 0;
    }
    if (cmd_rates->parsed()) {
      print_report(mpolar::recompute_rates(cfg), std::cout);
      return 0;
    }
  } catch (const mpolar::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const mpolar::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const mpolar::CompatibilityViolated& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const mpolar::DomainTooShort& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const mpolar::StepTooCoarse& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return 3;
  } catch (const mpolar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
