#pragma once

#include <cmath>
#include <string>

#include "mpolar/errors.hpp"

namespace mpolar {

// Uniform grid on [0, L] with n cells, nodes x_j = j h, j = 0..n.
struct Grid {
  double L = 1.0;
  int n = 16;

  double h() const { return L / n; }
  double x(int j) const { return j * h(); }
  int nodes() const { return n + 1; }
};

inline void validate(const Grid& g) {
  if (!(std::isfinite(g.L) && g.L > 0.0))
    throw ValidationError("grid.L: must be finite and > 0, got " + std::to_string(g.L));
  if (g.n < 16)
    throw ValidationError("grid.n: must be >= 16, got " + std::to_string(g.n));
}

} // namespace mpolar
