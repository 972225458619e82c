#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kvf/expr.hpp"
#include "kvf/tensor.hpp"

namespace kvf {

struct Domain {
  Eigen::VectorXd lo, hi;
};

// Tolerances shared across modules; every value is the project-wide default
// and may be overridden per run from the CLI.
struct Tolerances {
  double unit = 1e-9;      // |g(V,V) - 1| bound certifying unit norm
  double killing = 1e-9;   // killing_defect bound certifying the Killing property
  double sep = 1e-6;       // minimum lambda separation for the constructed-frame split
  double rank = 1e-8;      // singular values of nablaV below this count as zero
  double min = 1e-6;       // |f rho_corrected - grad_term| bound for the minimality verdict
  double identity = 1e-5;  // corrected-identity residual bound (two stencil layers deep)
  double lemma12 = 1e-5;   // curvature-component identity residual bound
};

// A manifold in a single coordinate chart: symbolic metric and field
// components, an optional analytic adapted frame (columns E_1, E_1*, ...,
// E_n = V), a sample box, and per-axis grid counts. Immutable once built.
struct ManifoldDefinition {
  std::string name;
  int dimension = 0;
  std::vector<std::string> coords;
  std::vector<Expression> metric;   // row-major n*n, symmetric by construction
  std::vector<Expression> field_V;  // n coordinate components
  std::optional<std::vector<Expression>> frame;  // column-major: [a*n + c] = component c of E_{a+1}
  Domain domain;
  std::vector<int> grid;

  const Expression& metric_entry(int i, int j) const { return metric[i * dimension + j]; }
  const Expression& frame_entry(int column, int component) const {
    return (*frame)[column * dimension + component];
  }
  bool inside_domain(const Eigen::VectorXd& x) const;
};

// Structural checks: sizes consistent, domain bounds ordered, grid counts >= 1.
// Throws ValidationError.
void validate_definition(const ManifoldDefinition& def);

// Everything the downstream formulas need at one point. Index conventions:
//   dg(a,i,j)        = d_a g_ij
//   gamma(k,i,j)     = Gamma^k_ij
//   dgamma(a,k,i,j)  = d_a Gamma^k_ij
//   riemann(i,j,k,l) = R(d_i, d_j, d_k, d_l) in the convention
//                      R(x,y,z,w) = -g((nab_x nab_y - nab_y nab_x - nab_[x,y]) z, w)
//   nablaV(k,j)      = component k of nab_{d_j} V
//   dnablaV(a,k,j)   = d_a nablaV(k,j)
//   dV(k,a)          = d_a V^k
struct GeometryAtPoint {
  Eigen::VectorXd x;
  Eigen::MatrixXd g, g_inv;
  Tensor3 dg;
  Tensor3 gamma;
  Tensor4 dgamma;
  Tensor4 riemann;
  Eigen::VectorXd V;
  Eigen::MatrixXd dV;
  Eigen::MatrixXd nablaV;
  Tensor3 dnablaV;

  // R(a,b,c,d) for coordinate vectors a,b,c,d.
  double riemann_on(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, const Eigen::VectorXd& d) const;
};

// Throws MetricSingularError (det below 1e-12 or a leading principal minor
// <= 0), ValidationError for points outside the box, EvalDomainError from the
// expression layer.
GeometryAtPoint geometry_at(const ManifoldDefinition& def, const Eigen::VectorXd& x);

// max over coordinate pairs (a,b) of |g(nab_a V, d_b) + g(nab_b V, d_a)|;
// zero certifies the Killing property at x.
double killing_defect(const ManifoldDefinition& def, const Eigen::VectorXd& x);

// Per-axis central-difference step: 1e-4 times the box edge length.
Eigen::VectorXd fd_steps(const ManifoldDefinition& def);

// Throws StencilBoundaryError when x is within 2 steps of the box boundary.
void require_stencil_margin(const ManifoldDefinition& def, const Eigen::VectorXd& x);

using Tensor11Field = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// (nab_a T)^k_j = d_a T^k_j + Gamma^k_al T^l_j - Gamma^l_aj T^k_l, with d_a T
// by central differences at step_scale times the per-axis step. Result is
// indexed (a, k, j). step_scale in (0, 1] keeps the stencil inside the margin
// checked by require_stencil_margin; the half-step value feeds the Richardson
// consistency test.
Tensor3 covariant_derivative_tensor11(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                      const Tensor11Field& T, double step_scale = 1.0);

}  // namespace kvf
