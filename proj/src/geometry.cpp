#include "kvf/geometry.hpp"

#include <cmath>

#include "kvf/errors.hpp"
#include "kvf/format.hpp"

namespace kvf {

bool ManifoldDefinition::inside_domain(const Eigen::VectorXd& x) const {
  for (int a = 0; a < dimension; ++a)
    if (x(a) < domain.lo(a) || x(a) > domain.hi(a)) return false;
  return true;
}

void validate_definition(const ManifoldDefinition& def) {
  const int n = def.dimension;
  if (n <= 0) throw ValidationError("dimension must be positive");
  if (static_cast<int>(def.coords.size()) != n)
    throw ValidationError("coords list must have exactly 'dimension' entries");
  if (static_cast<int>(def.metric.size()) != n * n)
    throw ValidationError("metric must have dimension x dimension entries");
  if (static_cast<int>(def.field_V.size()) != n)
    throw ValidationError("V must have 'dimension' components");
  if (def.frame && static_cast<int>(def.frame->size()) != n * n)
    throw ValidationError("frame must have dimension x dimension entries");
  if (def.domain.lo.size() != n || def.domain.hi.size() != n)
    throw ValidationError("domain must bound every coordinate");
  for (int a = 0; a < n; ++a)
    if (!(def.domain.lo(a) < def.domain.hi(a)))
      throw ValidationError("domain bounds for coordinate '" + def.coords[a] +
                            "' must satisfy lo < hi");
  if (static_cast<int>(def.grid.size()) != n)
    throw ValidationError("grid must give a count per coordinate");
  for (int a = 0; a < n; ++a)
    if (def.grid[a] < 1) throw ValidationError("grid counts must be >= 1");
}

double GeometryAtPoint::riemann_on(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& c, const Eigen::VectorXd& d) const {
  const int n = static_cast<int>(a.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (a(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (b(j) == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        if (c(k) == 0.0) continue;
        for (int l = 0; l < n; ++l) s += riemann(i, j, k, l) * a(i) * b(j) * c(k) * d(l);
      }
    }
  }
  return s;
}

GeometryAtPoint geometry_at(const ManifoldDefinition& def, const Eigen::VectorXd& x) {
  const int n = def.dimension;
  if (!def.inside_domain(x))
    throw ValidationError("point outside the definition's domain box");

  GeometryAtPoint out;
  out.x = x;
  out.g.resize(n, n);
  out.dg = Tensor3(n);
  std::vector<Eigen::MatrixXd> d2g(static_cast<std::size_t>(n) * n);  // [i*n+j] = Hessian of g_ij

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Jet2 jet = def.metric_entry(i, j).eval_jet2(x);
      out.g(i, j) = jet.v;
      out.g(j, i) = jet.v;
      for (int a = 0; a < n; ++a) {
        out.dg(a, i, j) = jet.g(a);
        out.dg(a, j, i) = jet.g(a);
      }
      d2g[i * n + j] = jet.h;
      d2g[j * n + i] = jet.h;
    }
  }

  for (int k = 1; k <= n; ++k) {
    const double minor = out.g.topLeftCorner(k, k).determinant();
    if (!(minor > 0.0))
      throw MetricSingularError("metric is not positive definite at the sample point "
                                "(leading principal minor " + std::to_string(k) +
                                " = " + format_g17(minor) + ")");
  }
  const double det = out.g.determinant();
  if (det < 1e-12)
    throw MetricSingularError("metric determinant " + format_g17(det) +
                              " below singularity threshold 1e-12");
  out.g_inv = out.g.inverse();

  // Gamma^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  out.gamma = Tensor3(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += out.g_inv(k, l) * (out.dg(i, j, l) + out.dg(j, i, l) - out.dg(l, i, j));
        out.gamma(k, i, j) = 0.5 * s;
        out.gamma(k, j, i) = 0.5 * s;
      }

  // d_a g^{kl} = -g^{km} (d_a g_mn) g^{nl}
  std::vector<Eigen::MatrixXd> dginv(n);
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd dga(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dga(i, j) = out.dg(a, i, j);
    dginv[a] = -out.g_inv * dga * out.g_inv;
  }

  // d_a Gamma^k_ij, using d_a d_i g_jl = Hessian(g_jl)(a, i)
  out.dgamma = Tensor4(n);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += dginv[a](k, l) * (out.dg(i, j, l) + out.dg(j, i, l) - out.dg(l, i, j));
            s += out.g_inv(k, l) * (d2g[j * n + l](a, i) + d2g[i * n + l](a, j) -
                                    d2g[i * n + j](a, l));
          }
          out.dgamma(a, k, i, j) = 0.5 * s;
          out.dgamma(a, k, j, i) = 0.5 * s;
        }

  // Curvature operator [R(d_i, d_j) d_k]^m, then lower and flip sign once so
  // riemann(i,j,k,l) matches the stated convention; the S^2 regression pins
  // R(u,w,w,u) = -1 for orthonormal u,w on the round unit sphere.
  out.riemann = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double op_l = out.dgamma(i, l, j, k) - out.dgamma(j, l, i, k);
          for (int m = 0; m < n; ++m)
            op_l += out.gamma(l, i, m) * out.gamma(m, j, k) -
                    out.gamma(l, j, m) * out.gamma(m, i, k);
          for (int w = 0; w < n; ++w) out.riemann(i, j, k, w) += -out.g(w, l) * op_l;
        }
      }
    }

  out.V.resize(n);
  out.dV.resize(n, n);
  std::vector<Eigen::MatrixXd> d2V(n);
  for (int k = 0; k < n; ++k) {
    const Jet2 jet = def.field_V[k].eval_jet2(x);
    out.V(k) = jet.v;
    out.dV.row(k) = jet.g.transpose();
    d2V[k] = jet.h;
  }

  out.nablaV.resize(n, n);
  out.dnablaV = Tensor3(n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      double s = out.dV(k, j);
      for (int l = 0; l < n; ++l) s += out.gamma(k, j, l) * out.V(l);
      out.nablaV(k, j) = s;
      for (int a = 0; a < n; ++a) {
        double t = d2V[k](a, j);
        for (int l = 0; l < n; ++l)
          t += out.dgamma(a, k, j, l) * out.V(l) + out.gamma(k, j, l) * out.dV(l, a);
        out.dnablaV(a, k, j) = t;
      }
    }

  return out;
}

double killing_defect(const ManifoldDefinition& def, const Eigen::VectorXd& x) {
  const GeometryAtPoint geo = geometry_at(def, x);
  const int n = def.dimension;
  const Eigen::MatrixXd lowered = geo.g * geo.nablaV;  // lowered(b,a) = g(nab_a V, d_b)
  double defect = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      defect = std::max(defect, std::abs(lowered(b, a) + lowered(a, b)));
  return defect;
}

Eigen::VectorXd fd_steps(const ManifoldDefinition& def) {
  return 1e-4 * (def.domain.hi - def.domain.lo);
}

void require_stencil_margin(const ManifoldDefinition& def, const Eigen::VectorXd& x) {
  const Eigen::VectorXd h = fd_steps(def);
  for (int a = 0; a < def.dimension; ++a) {
    if (x(a) - def.domain.lo(a) < 2.0 * h(a) || def.domain.hi(a) - x(a) < 2.0 * h(a))
      throw StencilBoundaryError(
          "point within 2 finite-difference steps of the domain boundary along coordinate '" +
          def.coords[a] + "'");
  }
}

Tensor3 covariant_derivative_tensor11(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                      const Tensor11Field& T, double step_scale) {
  require_stencil_margin(def, x);
  const int n = def.dimension;
  const Eigen::VectorXd h = fd_steps(def) * step_scale;
  const GeometryAtPoint geo = geometry_at(def, x);
  const Eigen::MatrixXd T0 = T(x);

  Tensor3 out(n);
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd xp = x, xm = x;
    xp(a) += h(a);
    xm(a) -= h(a);
    const Eigen::MatrixXd dT = (T(xp) - T(xm)) / (2.0 * h(a));
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double s = dT(k, j);
        for (int l = 0; l < n; ++l)
          s += geo.gamma(k, a, l) * T0(l, j) - geo.gamma(l, a, j) * T0(k, l);
        out(a, k, j) = s;
      }
  }
  return out;
}

}  // namespace kvf
