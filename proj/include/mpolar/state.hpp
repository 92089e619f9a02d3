#pragma once

#include <vector>

#include "mpolar/grid.hpp"

namespace mpolar {

// Nodal fields at one instant.
struct State {
  double t = 0.0;
  Grid grid;
  std::vector<double> rho, u, omega;
};

} // namespace mpolar
