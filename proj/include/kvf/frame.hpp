#pragma once

#include <Eigen/Dense>
#include <random>
#include <utility>
#include <vector>

#include "kvf/geometry.hpp"
#include "kvf/tensor.hpp"

namespace kvf {

// Orthonormal frame adapted to nablaV: columns E_1, E_1*, ..., E_m, E_m*,
// then kernel directions, then E_n = V. For each rotation plane,
// nablaV(E_i) = -lambda_i E_i* and nablaV(E_i*) = lambda_i E_i with
// lambda_1 >= ... >= lambda_m > 0.
struct AdaptedFrame {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd columns;  // (coordinate component, frame index); last column is V
  std::vector<double> lambdas;
  std::vector<std::pair<int, int>> pairs;  // zero-based column indices (E_i, E_i*)
  std::vector<int> kernel_indices;         // zero-based, excludes the V column
};

// Validates a supplied analytic frame or constructs one from the real
// canonical form of the skew map nablaV restricted to the complement of V.
// Throws FrameValidationError (naming the violated invariant) or
// NearDegenerateError (two lambdas closer than tol.sep with no analytic
// frame, where the 2-plane split is ill-posed).
AdaptedFrame adapted_frame_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                              const Tolerances& tol = {});
AdaptedFrame adapted_frame_from(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                                const Tolerances& tol = {});

// Random admissible frame change: an SO(2) rotation inside every lambda
// 2-plane and an O(k) change of the kernel block. V is untouched. Quantities
// that are frame traces must be invariant under this.
AdaptedFrame rotate_admissible(const AdaptedFrame& frame, std::mt19937_64& rng);

// Frame connection data at a point:
//   G(i,j,k)    = g(nab_{E_i} E_j, E_k)              (antisymmetric in j,k)
//   psi(j,k)    = g(nab_{E_j} V, E_k)                ((nablaV)_j^k = G_{jn}^k)
//   dpsi(c,j,k) = d_c psi_jk along coordinate c
// With an analytic frame everything is exact (jets); otherwise the frame is
// constructed pointwise and stencil frames are aligned to the center frame
// (per-plane SO(2) and kernel O(k) Procrustes) before central differencing.
struct FrameData {
  AdaptedFrame frame;
  Tensor3 G;
  Eigen::MatrixXd psi;
  Tensor3 dpsi;
};

FrameData frame_coeffs_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                          const Tolerances& tol = {});
FrameData frame_coeffs_from(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                            const Tolerances& tol = {});

// E_a(lambda_p) for every frame direction a, assembled from dpsi. Columns are
// indexed by plane p, rows by frame direction.
Eigen::MatrixXd frame_lambda_derivatives(const FrameData& data);

}  // namespace kvf
