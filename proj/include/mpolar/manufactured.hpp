#pragma once

#include <cmath>
#include <vector>

#include "mpolar/model.hpp"
#include "mpolar/solver.hpp"
#include "mpolar/state.hpp"
#include "mpolar/stationary.hpp"

// Manufactured solutions for convergence studies. Fields are a constant
// background plus compactly supported polynomial bumps with cosine time
// factors; the bumps vanish near both ends so the boundary pinning is exact
// for the manufactured state.

namespace mpolar {

// (1 - y^2)^4 on |y| < 1, zero outside; C^3 at the edge.
struct PolyBump {
  double center = 5.0;
  double width = 1.5;

  double value(double x) const {
    const double y = (x - center) / width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double t = 1.0 - y * y;
    return t * t * t * t;
  }
  double d1(double x) const {
    const double y = (x - center) / width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double t = 1.0 - y * y;
    return -8.0 * y * t * t * t / width;
  }
  double d2(double x) const {
    const double y = (x - center) / width;
    if (std::abs(y) >= 1.0) return 0.0;
    const double t = 1.0 - y * y;
    return (48.0 * y * y * t * t - 8.0 * t * t * t) / (width * width);
  }
};

struct ManufacturedCase {
  double rho0 = 1.0;
  double u0 = -1.5;
  double omega0 = 0.05;
  double a_rho = 0.1;
  double a_u = 0.1;
  double a_omega = 0.05;
  PolyBump b_rho{4.0, 1.5};
  PolyBump b_u{5.0, 1.5};
  PolyBump b_omega{6.0, 1.5};
  double frq_rho = 1.0, frq_u = 1.3, frq_omega = 0.7;
  double ph_rho = 0.0, ph_u = 0.5, ph_omega = 1.0;

  double rho(double x, double t) const {
    return rho0 + a_rho * b_rho.value(x) * std::cos(frq_rho * t + ph_rho);
  }
  double rho_t(double x, double t) const {
    return -a_rho * frq_rho * b_rho.value(x) * std::sin(frq_rho * t + ph_rho);
  }
  double rho_x(double x, double t) const {
    return a_rho * b_rho.d1(x) * std::cos(frq_rho * t + ph_rho);
  }
  double u(double x, double t) const {
    return u0 + a_u * b_u.value(x) * std::cos(frq_u * t + ph_u);
  }
  double u_t(double x, double t) const {
    return -a_u * frq_u * b_u.value(x) * std::sin(frq_u * t + ph_u);
  }
  double u_x(double x, double t) const {
    return a_u * b_u.d1(x) * std::cos(frq_u * t + ph_u);
  }
  double u_xx(double x, double t) const {
    return a_u * b_u.d2(x) * std::cos(frq_u * t + ph_u);
  }
  double omega(double x, double t) const {
    return omega0 + a_omega * b_omega.value(x) * std::cos(frq_omega * t + ph_omega);
  }
  double omega_t(double x, double t) const {
    return -a_omega * frq_omega * b_omega.value(x) * std::sin(frq_omega * t + ph_omega);
  }
  double omega_x(double x, double t) const {
    return a_omega * b_omega.d1(x) * std::cos(frq_omega * t + ph_omega);
  }
  double omega_xx(double x, double t) const {
    return a_omega * b_omega.d2(x) * std::cos(frq_omega * t + ph_omega);
  }

  State state(const Grid& g, double t) const {
    State s;
    s.t = t;
    s.grid = g;
    s.rho.resize(g.n + 1);
    s.u.resize(g.n + 1);
    s.omega.resize(g.n + 1);
    for (int j = 0; j <= g.n; ++j) {
      const double x = g.x(j);
      s.rho[j] = rho(x, t);
      s.u[j] = u(x, t);
      s.omega[j] = omega(x, t);
    }
    return s;
  }

  // Constant-background profile carrying the boundary data the marcher pins.
  StationaryProfile boundary_profile(const Grid& g) const {
    StationaryProfile sp;
    sp.grid = g;
    sp.regime = Regime::Supersonic;
    sp.chi0 = 1.0;
    sp.mass_flux = rho0 * u0;
    sp.chi.assign(g.n + 1, 1.0);
    sp.rho.assign(g.n + 1, rho0);
    sp.u.assign(g.n + 1, u0);
    sp.omega.assign(g.n + 1, omega0);
    sp.rho_x.assign(g.n + 1, 0.0);
    sp.u_x.assign(g.n + 1, 0.0);
    sp.omega_x.assign(g.n + 1, 0.0);
    return sp;
  }

  // Conservative source rows that make the manufactured fields an exact
  // solution of whichever terms are enabled. Captures `this`; keep the case
  // alive while the options are in use.
  SolverOptions options(const ModelParams& p, bool convection, bool pressure) const {
    SolverOptions o;
    o.convection = convection;
    o.pressure = pressure;
    o.forcing = [this, p, convection, pressure](double t, const Grid& g,
                                                std::vector<double>& f_rho,
                                                std::vector<double>& f_m,
                                                std::vector<double>& f_w) {
      f_rho.resize(g.n + 1);
      f_m.resize(g.n + 1);
      f_w.resize(g.n + 1);
      for (int j = 0; j <= g.n; ++j) {
        const double x = g.x(j);
        const double r = rho(x, t), rt = rho_t(x, t), rx = rho_x(x, t);
        const double v = u(x, t), vt = u_t(x, t), vx = u_x(x, t), vxx = u_xx(x, t);
        const double w = omega(x, t), wt = omega_t(x, t), wx = omega_x(x, t),
                     wxx = omega_xx(x, t);
        double fr = rt;
        double fm = rt * v + r * vt - p.lambda * vxx;
        double fw = rt * w + r * wt + p.mu * w - p.nu * wxx;
        if (convection) {
          fr += rx * v + r * vx;
          fm += rx * v * v + 2.0 * r * v * vx;
          fw += (rx * v + r * vx) * w + r * v * wx;
        }
        if (pressure) fm += p.K * p.gamma * std::pow(r, p.gamma - 1.0) * rx;
        f_rho[j] = fr;
        f_m[j] = fm;
        f_w[j] = fw;
      }
    };
    return o;
  }

  // Max-norm errors of a computed state against the manufactured fields.
  struct ErrorNorms {
    double rho = 0.0, u = 0.0, omega = 0.0;
    double total() const { return std::max(rho, std::max(u, omega)); }
  };
  ErrorNorms error(const State& s) const {
    ErrorNorms e;
    for (int j = 0; j <= s.grid.n; ++j) {
      const double x = s.grid.x(j);
      e.rho = std::max(e.rho, std::abs(s.rho[j] - rho(x, s.t)));
      e.u = std::max(e.u, std::abs(s.u[j] - u(x, s.t)));
      e.omega = std::max(e.omega, std::abs(s.omega[j] - omega(x, s.t)));
    }
    return e;
  }
};

// Variant with a frozen density so the momentum and microrotation rows
// reduce to forced heat equations; used for near-second-order spatial checks.
inline ManufacturedCase diffusion_only_case() {
  ManufacturedCase mc;
  mc.a_rho = 0.0;
  return mc;
}

} // namespace mpolar
