#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kvf/geometry.hpp"

namespace kvf {

// Interior lattice: axis a contributes grid[a] points at
// lo + (k+1)(hi-lo)/(grid[a]+1), k = 0..grid[a]-1, so no point touches the
// boundary. Axes vary slowest-first (row-major odometer).
std::vector<Eigen::VectorXd> grid_points(const ManifoldDefinition& def);

// count uniform draws from the box shrunk by 2.5 fd_steps per side, keeping
// every point clear of the derivative stencils. Identical sequence for a
// fixed seed on every platform.
std::vector<Eigen::VectorXd> random_points(const ManifoldDefinition& def, int count,
                                           std::uint64_t seed);

}  // namespace kvf
