#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mpolar/errors.hpp"

// Small shared numerical kernels: quadrature, difference stencils, least
// squares lines, bracketed bisection, tridiagonal solve. All operate on
// uniform grids.

namespace mpolar {

// Composite trapezoid rule for nodal values on a uniform grid of spacing h.
inline double trapz(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
  return s * h;
}

// First derivative, second order: central in the interior, one-sided at the
// two boundary nodes.
inline std::vector<double> deriv1(const std::vector<double>& f, double h) {
  const std::size_t m = f.size();
  std::vector<double> d(m, 0.0);
  if (m < 3) return d;
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < m; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  d[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
  return d;
}

// Largest |f_{j-1} - 2 f_j + f_{j+1}| / h^2 over interior nodes; used to set
// discretization slack for pointwise bound checks.
inline double max_abs_second_diff(const std::vector<double>& f, double h) {
  double m = 0.0;
  for (std::size_t j = 1; j + 1 < f.size(); ++j)
    m = std::max(m, std::abs(f[j - 1] - 2.0 * f[j] + f[j + 1]) / (h * h));
  return m;
}

// Fourth-order centered first derivative at node j (needs j-2 .. j+2).
inline double deriv1_c4(const std::vector<double>& f, double h, std::size_t j) {
  return (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0; // root-mean-square residual
};

// Ordinary least squares line y ~ intercept + slope * x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw WindowTooSmall("fit_line: need at least 2 samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw WindowTooSmall("fit_line: degenerate abscissae");
  LineFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss += e * e;
  }
  r.rms = std::sqrt(ss / m);
  return r;
}

// Bracketed bisection for a sign change of f on [a, b]. Assumes f(a) and
// f(b) have opposite signs; refines until the bracket width reaches a few
// ulps of the root scale.
inline double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0)) throw ValidationError("bisect: no sign change on bracket");
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; }
    else { b = m; fb = fm; }
    if (b - a <= 1e-15 * (std::abs(a) + std::abs(b))) break;
  }
  return 0.5 * (a + b);
}

// Thomas algorithm for a tridiagonal system (lower, diag, upper, rhs).
// Overwrites nothing; returns the solution.
inline std::vector<double> tridiag_solve(std::vector<double> lo, std::vector<double> di,
                                         std::vector<double> up, std::vector<double> rhs) {
  const std::size_t m = di.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(m);
  x[m - 1] = rhs[m - 1] / di[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
  return x;
}

} // namespace mpolar
