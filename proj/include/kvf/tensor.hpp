#pragma once

#include <cstddef>
#include <vector>

namespace kvf {

// Dense rank-3 array with uniform extent n per index, zero-initialized.
struct Tensor3 {
  int n = 0;
  std::vector<double> d;

  Tensor3() = default;
  explicit Tensor3(int n_) : n(n_), d(static_cast<std::size_t>(n_) * n_ * n_, 0.0) {}

  double& operator()(int i, int j, int k) {
    return d[(static_cast<std::size_t>(i) * n + j) * n + k];
  }
  double operator()(int i, int j, int k) const {
    return d[(static_cast<std::size_t>(i) * n + j) * n + k];
  }
};

// Dense rank-4 array with uniform extent n per index, zero-initialized.
struct Tensor4 {
  int n = 0;
  std::vector<double> d;

  Tensor4() = default;
  explicit Tensor4(int n_) : n(n_), d(static_cast<std::size_t>(n_) * n_ * n_ * n_, 0.0) {}

  double& operator()(int i, int j, int k, int l) {
    return d[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
  }
  double operator()(int i, int j, int k, int l) const {
    return d[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
  }
};

}  // namespace kvf
