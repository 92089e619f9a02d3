#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mpolar/analysis.hpp"
#include "mpolar/csv.hpp"
#include "mpolar/errors.hpp"
#include "mpolar/grid.hpp"
#include "mpolar/model.hpp"
#include "mpolar/solver.hpp"
#include "mpolar/stationary.hpp"

// Flat key = value experiment configuration. One pair per line, '#' starts a
// comment, keys are dotted paths. Unknown keys are hard errors; missing keys
// fall back to the defaults below (see the README table).

namespace mpolar {

struct RunSpec {
  double t_end = 40.0;
  double cfl = 0.4;
  double snapshot_interval = 1.0;
  double burn_in = 2.0;
};

inline void validate(const RunSpec& r) {
  if (!(std::isfinite(r.t_end) && r.t_end >= 0.0))
    throw ValidationError("run.t_end: must be finite and >= 0");
  if (!(r.cfl > 0.0 && r.cfl <= 1.0)) throw ValidationError("run.cfl: must lie in (0, 1]");
  if (!(std::isfinite(r.snapshot_interval) && r.snapshot_interval > 0.0))
    throw ValidationError("run.snapshot_interval: must be finite and > 0");
  if (!(std::isfinite(r.burn_in) && r.burn_in >= 0.0))
    throw ValidationError("run.burn_in: must be finite and >= 0");
  if (r.t_end > 0.0 && !(r.t_end > r.burn_in))
    throw ValidationError("run.t_end: must exceed run.burn_in");
}

// Regime expectation; a mismatch after classification is a validation error.
enum class RegimeHint { Any, Supersonic, Transonic, NonExistent };

struct ExperimentConfig {
  ModelParams params;
  RegimeHint expect = RegimeHint::Any;
  Grid grid{12.5, 1024};
  RunSpec run;
  PerturbationSpec perturbation;
  WeightSpec weight{2.0, 0.05, 0};
  std::string output_dir = "out";
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.params);
  validate(cfg.grid);
  validate(cfg.run);
  validate(cfg.perturbation);
  validate(cfg.weight);
  if (cfg.output_dir.empty()) throw ValidationError("output_dir: must not be empty");
}

namespace detail {

inline std::string shape_name(PerturbationSpec::Shape s) {
  switch (s) {
    case PerturbationSpec::Shape::Zero: return "zero";
    case PerturbationSpec::Shape::Bump: return "bump";
    default: return "gaussian";
  }
}

inline PerturbationSpec::Shape shape_from(const std::string& s, int line_no) {
  if (s == "zero") return PerturbationSpec::Shape::Zero;
  if (s == "bump") return PerturbationSpec::Shape::Bump;
  if (s == "gaussian") return PerturbationSpec::Shape::Gaussian;
  throw ParseError("line " + std::to_string(line_no) + ": unknown shape '" + s +
                   "' (want zero|bump|gaussian)");
}

inline std::string hint_name(RegimeHint h) {
  switch (h) {
    case RegimeHint::Any: return "any";
    case RegimeHint::Supersonic: return "supersonic";
    case RegimeHint::Transonic: return "transonic";
    default: return "nonexistent";
  }
}

inline RegimeHint hint_from(const std::string& s, int line_no) {
  if (s == "any") return RegimeHint::Any;
  if (s == "supersonic") return RegimeHint::Supersonic;
  if (s == "transonic") return RegimeHint::Transonic;
  if (s == "nonexistent") return RegimeHint::NonExistent;
  throw ParseError("line " + std::to_string(line_no) + ": unknown regime hint '" + s +
                   "' (want any|supersonic|transonic|nonexistent)");
}

inline double number(const std::string& v, int line_no) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + v + "'");
  return x;
}

inline int integer(const std::string& v, int line_no) {
  const double x = number(v, line_no);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ParseError("line " + std::to_string(line_no) + ": expected an integer, got '" + v + "'");
  return i;
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool saw_mach = false, saw_uplus = false, saw_chi0 = false, saw_ub = false;
  double mach = 0.0, chi0 = 0.0;
  std::map<std::string, int> seen; // key -> first line
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = detail::strip(line);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::strip(s.substr(0, eq));
    const std::string val = detail::strip(s.substr(eq + 1));
    if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
    if (val.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    auto ins = seen.emplace(key, line_no);
    if (!ins.second)
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                       "' (first set on line " + std::to_string(ins.first->second) + ")");
    auto num = [&] { return detail::number(val, line_no); };
    if (key == "params.gamma") cfg.params.gamma = num();
    else if (key == "params.K") cfg.params.K = num();
    else if (key == "params.lambda") cfg.params.lambda = num();
    else if (key == "params.mu") cfg.params.mu = num();
    else if (key == "params.nu") cfg.params.nu = num();
    else if (key == "params.rho_plus") cfg.params.rho_plus = num();
    else if (key == "params.u_plus") { cfg.params.u_plus = num(); saw_uplus = true; }
    else if (key == "params.mach") { mach = num(); saw_mach = true; }
    else if (key == "params.u_b") { cfg.params.u_b = num(); saw_ub = true; }
    else if (key == "params.chi0") { chi0 = num(); saw_chi0 = true; }
    else if (key == "params.omega_b") cfg.params.omega_b = num();
    else if (key == "expect.regime") cfg.expect = detail::hint_from(val, line_no);
    else if (key == "grid.L") cfg.grid.L = num();
    else if (key == "grid.n") cfg.grid.n = detail::integer(val, line_no);
    else if (key == "run.t_end") cfg.run.t_end = num();
    else if (key == "run.cfl") cfg.run.cfl = num();
    else if (key == "run.snapshot_interval") cfg.run.snapshot_interval = num();
    else if (key == "run.burn_in") cfg.run.burn_in = num();
    else if (key == "perturbation.shape") cfg.perturbation.shape = detail::shape_from(val, line_no);
    else if (key == "perturbation.a_rho") cfg.perturbation.a_rho = num();
    else if (key == "perturbation.a_u") cfg.perturbation.a_u = num();
    else if (key == "perturbation.a_omega") cfg.perturbation.a_omega = num();
    else if (key == "perturbation.center") cfg.perturbation.center = num();
    else if (key == "perturbation.width") cfg.perturbation.width = num();
    else if (key == "weight.alpha") cfg.weight.alpha = num();
    else if (key == "weight.beta") cfg.weight.beta = num();
    else if (key == "weight.order") cfg.weight.order = detail::integer(val, line_no);
    else if (key == "output_dir") cfg.output_dir = val;
    else
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  if (saw_mach && saw_uplus)
    throw ValidationError("params.mach and params.u_plus are mutually exclusive");
  if (saw_chi0 && saw_ub)
    throw ValidationError("params.chi0 and params.u_b are mutually exclusive");
  const bool saw_eos = seen.count("params.gamma") || seen.count("params.K") ||
                       seen.count("params.rho_plus");
  if (saw_mach) {
    if (!(std::isfinite(mach) && mach > 0.0))
      throw ValidationError("params.mach = " + std::to_string(mach) + ": must be finite and > 0");
    cfg.params.u_plus = -mach * sound_speed_plus(cfg.params);
  } else if (!saw_uplus && saw_eos) {
    // Defaults are tied to the reference state, not to a literal speed:
    // keep the far field at Mach 1.5 under a changed equation of state.
    cfg.params.u_plus = -1.5 * sound_speed_plus(cfg.params);
  }
  if (saw_chi0) {
    if (!(std::isfinite(chi0) && chi0 > 0.0))
      throw ValidationError("params.chi0 = " + std::to_string(chi0) + ": must be finite and > 0");
    cfg.params.u_b = chi0 * cfg.params.u_plus;
  } else if (!saw_ub && (saw_mach || saw_uplus || saw_eos)) {
    // Keep the default boundary pull when only the far field moved.
    cfg.params.u_b = 0.9 * cfg.params.u_plus;
  }
  validate(cfg);
  return cfg;
}

// Canonical form: every key explicit, floats with 17 significant digits.
// Derived inputs (mach, chi0) are resolved into u_plus and u_b.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "params.gamma = " << format_float(cfg.params.gamma) << "\n"
      << "params.K = " << format_float(cfg.params.K) << "\n"
      << "params.lambda = " << format_float(cfg.params.lambda) << "\n"
      << "params.mu = " << format_float(cfg.params.mu) << "\n"
      << "params.nu = " << format_float(cfg.params.nu) << "\n"
      << "params.rho_plus = " << format_float(cfg.params.rho_plus) << "\n"
      << "params.u_plus = " << format_float(cfg.params.u_plus) << "\n"
      << "params.u_b = " << format_float(cfg.params.u_b) << "\n"
      << "params.omega_b = " << format_float(cfg.params.omega_b) << "\n"
      << "expect.regime = " << detail::hint_name(cfg.expect) << "\n"
      << "grid.L = " << format_float(cfg.grid.L) << "\n"
      << "grid.n = " << cfg.grid.n << "\n"
      << "run.t_end = " << format_float(cfg.run.t_end) << "\n"
      << "run.cfl = " << format_float(cfg.run.cfl) << "\n"
      << "run.snapshot_interval = " << format_float(cfg.run.snapshot_interval) << "\n"
      << "run.burn_in = " << format_float(cfg.run.burn_in) << "\n"
      << "perturbation.shape = " << detail::shape_name(cfg.perturbation.shape) << "\n"
      << "perturbation.a_rho = " << format_float(cfg.perturbation.a_rho) << "\n"
      << "perturbation.a_u = " << format_float(cfg.perturbation.a_u) << "\n"
      << "perturbation.a_omega = " << format_float(cfg.perturbation.a_omega) << "\n"
      << "perturbation.center = " << format_float(cfg.perturbation.center) << "\n"
      << "perturbation.width = " << format_float(cfg.perturbation.width) << "\n"
      << "weight.alpha = " << format_float(cfg.weight.alpha) << "\n"
      << "weight.beta = " << format_float(cfg.weight.beta) << "\n"
      << "weight.order = " << cfg.weight.order << "\n"
      << "output_dir = " << cfg.output_dir << "\n";
  return out.str();
}

} // namespace mpolar
