#include "kvf/sampling.hpp"

#include <random>

namespace kvf {

std::vector<Eigen::VectorXd> grid_points(const ManifoldDefinition& def) {
  const int n = def.dimension;
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(def.grid[a]);

  std::vector<Eigen::VectorXd> points;
  points.reserve(total);
  std::vector<int> idx(n, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Eigen::VectorXd x(n);
    for (int a = 0; a < n; ++a) {
      const double span = def.domain.hi(a) - def.domain.lo(a);
      x(a) = def.domain.lo(a) + (idx[a] + 1) * span / (def.grid[a] + 1);
    }
    points.push_back(std::move(x));
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < def.grid[a]) break;
      idx[a] = 0;
    }
  }
  return points;
}

std::vector<Eigen::VectorXd> random_points(const ManifoldDefinition& def, int count,
                                           std::uint64_t seed) {
  const int n = def.dimension;
  const Eigen::VectorXd h = fd_steps(def);
  std::mt19937_64 rng(seed);
  // Manual mapping to [0,1) instead of std::uniform_real_distribution, whose
  // output is not pinned by the standard across implementations.
  auto uniform01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<Eigen::VectorXd> points;
  points.reserve(count);
  for (int c = 0; c < count; ++c) {
    Eigen::VectorXd x(n);
    for (int a = 0; a < n; ++a) {
      const double lo = def.domain.lo(a) + 2.5 * h(a);
      const double hi = def.domain.hi(a) - 2.5 * h(a);
      x(a) = lo + uniform01() * (hi - lo);
    }
    points.push_back(std::move(x));
  }
  return points;
}

}  // namespace kvf
