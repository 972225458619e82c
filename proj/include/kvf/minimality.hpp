#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kvf/frame.hpp"
#include "kvf/geometry.hpp"

namespace kvf {

// L = id + (nablaV)^t nablaV, f = sqrt(det L), K = f L^{-1} (nablaV)^t,
// all as coordinate-basis endomorphisms with the transpose taken as the
// g-adjoint: (nablaV^t)^k_j = g^{kl} g_{jm} (nablaV)^m_l.
struct OperatorsAtPoint {
  Eigen::MatrixXd nablaV;
  Eigen::MatrixXd nablaV_adj;
  Eigen::MatrixXd L, L_inv, K;
  double detL = 1.0;
  double f = 1.0;
};

OperatorsAtPoint operators_from(const GeometryAtPoint& geo);
OperatorsAtPoint operators_at(const ManifoldDefinition& def, const Eigen::VectorXd& x);

// omega(X) = Tr(Z -> (nab_Z K)(X)), computed frame-free in coordinates as
// omega_j = sum_a (nab_a K)^a_j with the K field differentiated by central
// stencils; returned both on coordinate directions and contracted against
// the frame columns.
struct OmegaDirect {
  Eigen::VectorXd coord;
  Eigen::VectorXd frame;
};

OmegaDirect omega_direct_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                            const AdaptedFrame& frame);

// The frame-component equations for omega: the plane formulas in E_i and
// E_i*, and the kernel formula for every direction with nablaV(E) = 0 --
// including E_n = V, which sits in the kernel because nab_V V = 0. Returns
// f times the displayed right-hand sides, one entry per frame direction.
Eigen::VectorXd omega_frame_from(const OperatorsAtPoint& ops, const FrameData& fd);
Eigen::VectorXd omega_frame_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                               const Tolerances& tol = {});

enum class RhoVariant { Original, Corrected };

// rho(X) = sum_j [ R((L^{-1} nablaV) X, (L^{-1} nablaV) E_j, V, E_j)
//                  +/- R(L^{-1} X, L^{-1} E_j, V, E_j) ]
// summed over the full frame; '+' is the original statement, '-' the
// corrected one. `directions` holds the X vectors as columns.
Eigen::VectorXd rho_with_frame(const GeometryAtPoint& geo, const OperatorsAtPoint& ops,
                               const Eigen::MatrixXd& sum_frame_columns,
                               const Eigen::MatrixXd& directions, RhoVariant variant);
Eigen::VectorXd rho_original_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                const Tolerances& tol = {});
Eigen::VectorXd rho_corrected_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                 const Tolerances& tol = {});

// The literal curvature-sum expansions of rho over the adapted frame (the
// displayed per-direction formulas), which must agree with the abstract
// contractions above to 1e-9.
Eigen::VectorXd rho_expanded_from(const GeometryAtPoint& geo, const AdaptedFrame& frame,
                                  RhoVariant variant);
Eigen::VectorXd rho_expanded_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                RhoVariant variant, const Tolerances& tol = {});

// ((L^{-1} nablaV) X) f per frame direction X, by two routes: the
// directional derivative of the scalar field f (central stencil), and the
// closed-form expression through E(lambda) (zero on kernel directions).
struct GradTerm {
  Eigen::VectorXd direct;
  Eigen::VectorXd formula;
};

GradTerm grad_term_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                      const Tolerances& tol = {});

// Max residual of the curvature-component identity
//   R_jikn = -E_i(psi_jk) + E_j(psi_ik)
//            + sum_{l<n} ( -G_il^k psi_jl + G_jl^k psi_il + (G_ij^l - G_ji^l) psi_lk )
// over all frame index triples (i,j,k).
double lemma12_residual(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                        const Tolerances& tol = {});

struct DirectionRow {
  std::string label;
  double omega_direct = 0.0;
  double omega_frame = 0.0;
  double rho_original = 0.0;
  double rho_corrected = 0.0;
  double grad_term = 0.0;
  double residual_original = 0.0;
  double residual_corrected = 0.0;
};

struct IdentityResiduals {
  Eigen::VectorXd x;
  double f = 0.0;
  std::vector<double> lambdas;
  std::vector<DirectionRow> directions;
  bool ok = false;
  std::string error;
};

struct MinimalityReport {
  std::vector<IdentityResiduals> rows;
  bool minimal = false;
  double max_residual_original = 0.0;   // over every direction, V included
  double max_residual_corrected = 0.0;  // over every direction, V included
  double max_min_measure = 0.0;    // max |f rho_corrected - grad_term| over X orthogonal to V
  double max_omega_perp = 0.0;     // max |omega_direct(E_a)| over X orthogonal to V
  int failed_points = 0;
};

// Evaluates all residuals at every sample point (parallel across points,
// merged in point order). Per-point failures are recorded in the row and do
// not abort the batch. The verdict `minimal` holds iff
// max |f rho_corrected - grad_term| < tol.min over the V-orthogonal frame
// directions at all successfully evaluated points.
MinimalityReport compare_theorems(const ManifoldDefinition& def,
                                  const std::vector<Eigen::VectorXd>& points,
                                  const Tolerances& tol = {});

// Direction labels for report rows: E1, E1*, ..., Ea<index> for kernel
// directions, V last.
std::vector<std::string> direction_labels(const AdaptedFrame& frame);

}  // namespace kvf
