#include "kvf/minimality.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "kvf/errors.hpp"
#include "kvf/format.hpp"

namespace kvf {

OperatorsAtPoint operators_from(const GeometryAtPoint& geo) {
  const int n = static_cast<int>(geo.V.size());
  OperatorsAtPoint out;
  out.nablaV = geo.nablaV;
  out.nablaV_adj = geo.g_inv * geo.nablaV.transpose() * geo.g;
  out.L = Eigen::MatrixXd::Identity(n, n) + out.nablaV_adj * out.nablaV;
  out.detL = out.L.determinant();
  if (out.detL < 1e-12)
    throw InternalError("det(L_V) = " + format_g17(out.detL) +
                        " is not positive; L_V must be positive definite");
  out.f = std::sqrt(out.detL);
  out.L_inv = out.L.inverse();
  out.K = out.f * out.L_inv * out.nablaV_adj;
  return out;
}

OperatorsAtPoint operators_at(const ManifoldDefinition& def, const Eigen::VectorXd& x) {
  return operators_from(geometry_at(def, x));
}

namespace {

// One pass over the +/- h stencil produces both the covariant derivative of
// the K field and the gradient of f; arithmetic matches
// covariant_derivative_tensor11 applied to K exactly.
struct StencilDerivatives {
  Tensor3 nabK;         // (a, k, j) = (nab_a K)^k_j
  Eigen::VectorXd df;   // (a) = d_a f
};

StencilDerivatives stencil_derivatives(const ManifoldDefinition& def,
                                       const GeometryAtPoint& geo,
                                       const OperatorsAtPoint& ops) {
  require_stencil_margin(def, geo.x);
  const int n = def.dimension;
  const Eigen::VectorXd h = fd_steps(def);

  StencilDerivatives out;
  out.nabK = Tensor3(n);
  out.df.resize(n);
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd xp = geo.x, xm = geo.x;
    xp(a) += h(a);
    xm(a) -= h(a);
    const OperatorsAtPoint op = operators_at(def, xp);
    const OperatorsAtPoint om = operators_at(def, xm);
    const Eigen::MatrixXd dK = (op.K - om.K) / (2.0 * h(a));
    out.df(a) = (op.f - om.f) / (2.0 * h(a));
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double s = dK(k, j);
        for (int l = 0; l < n; ++l)
          s += geo.gamma(k, a, l) * ops.K(l, j) - geo.gamma(l, a, j) * ops.K(k, l);
        out.nabK(a, k, j) = s;
      }
  }
  return out;
}

OmegaDirect omega_from_stencil(const StencilDerivatives& st, const AdaptedFrame& frame) {
  const int n = frame.n;
  OmegaDirect out;
  out.coord = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a) out.coord(j) += st.nabK(a, a, j);
  out.frame = frame.columns.transpose() * out.coord;
  return out;
}

}  // namespace

OmegaDirect omega_direct_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                            const AdaptedFrame& frame) {
  const GeometryAtPoint geo = geometry_at(def, x);
  const OperatorsAtPoint ops = operators_from(geo);
  return omega_from_stencil(stencil_derivatives(def, geo, ops), frame);
}

Eigen::VectorXd omega_frame_from(const OperatorsAtPoint& ops, const FrameData& fd) {
  const AdaptedFrame& fr = fd.frame;
  const int n = fr.n;
  const int m = fr.m;
  const Eigen::MatrixXd Elam = frame_lambda_derivatives(fd);

  std::vector<double> mu(m), nu(m);
  for (int p = 0; p < m; ++p) {
    const double lam = fr.lambdas[p];
    nu[p] = 1.0 / (1.0 + lam * lam);
    mu[p] = lam * nu[p];
  }

  auto kernel_formula = [&](int alpha) {
    double s = 0.0;
    for (int q = 0; q < m; ++q)
      s -= mu[q] * (fd.G(2 * q + 1, alpha, 2 * q) - fd.G(2 * q, alpha, 2 * q + 1));
    return s;
  };

  Eigen::VectorXd out(n);
  for (int p = 0; p < m; ++p) {
    const auto [i, is] = fr.pairs[p];
    const double lam = fr.lambdas[p];

    double sum_mu_Elam_is = 0.0, sum_mu_Elam_i = 0.0;
    for (int q = 0; q < m; ++q) {
      sum_mu_Elam_is += mu[q] * Elam(is, q);
      sum_mu_Elam_i += mu[q] * Elam(i, q);
    }
    double trace_G_is = 0.0, trace_G_i = 0.0;
    for (int j = 0; j <= n - 2; ++j) {
      trace_G_is += fd.G(j, is, j);
      trace_G_i += fd.G(j, i, j);
    }
    double pair_G_i = 0.0, pair_G_is = 0.0;
    for (int q = 0; q < m; ++q) {
      pair_G_i += mu[q] * (fd.G(2 * q, i, 2 * q + 1) - fd.G(2 * q + 1, i, 2 * q));
      pair_G_is += mu[q] * (fd.G(2 * q + 1, is, 2 * q) - fd.G(2 * q, is, 2 * q + 1));
    }

    out(i) = 2.0 * mu[p] * sum_mu_Elam_is + (1.0 - lam * lam) * nu[p] * nu[p] * Elam(is, p) +
             mu[p] * trace_G_is + pair_G_i;
    out(is) = -2.0 * mu[p] * sum_mu_Elam_i - (1.0 - lam * lam) * nu[p] * nu[p] * Elam(i, p) -
              mu[p] * trace_G_i - pair_G_is;
  }
  for (int alpha : fr.kernel_indices) out(alpha) = kernel_formula(alpha);
  out(n - 1) = kernel_formula(n - 1);
  return ops.f * out;
}

Eigen::VectorXd omega_frame_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                               const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  return omega_frame_from(operators_from(geo), frame_coeffs_from(def, geo, tol));
}

Eigen::VectorXd rho_with_frame(const GeometryAtPoint& geo, const OperatorsAtPoint& ops,
                               const Eigen::MatrixXd& sum_frame_columns,
                               const Eigen::MatrixXd& directions, RhoVariant variant) {
  const int n = static_cast<int>(sum_frame_columns.rows());
  const double sign = variant == RhoVariant::Original ? 1.0 : -1.0;
  const Eigen::MatrixXd LiM = ops.L_inv * ops.nablaV;

  std::vector<Eigen::VectorXd> A(n), B(n);
  for (int j = 0; j < n; ++j) {
    A[j] = LiM * sum_frame_columns.col(j);
    B[j] = ops.L_inv * sum_frame_columns.col(j);
  }

  const int d = static_cast<int>(directions.cols());
  Eigen::VectorXd out(d);
  for (int b = 0; b < d; ++b) {
    const Eigen::VectorXd AX = LiM * directions.col(b);
    const Eigen::VectorXd BX = ops.L_inv * directions.col(b);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      s += geo.riemann_on(AX, A[j], geo.V, sum_frame_columns.col(j));
      s += sign * geo.riemann_on(BX, B[j], geo.V, sum_frame_columns.col(j));
    }
    out(b) = s;
  }
  return out;
}

Eigen::VectorXd rho_original_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  const AdaptedFrame frame = adapted_frame_from(def, geo, tol);
  return rho_with_frame(geo, operators_from(geo), frame.columns, frame.columns,
                        RhoVariant::Original);
}

Eigen::VectorXd rho_corrected_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                 const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  const AdaptedFrame frame = adapted_frame_from(def, geo, tol);
  return rho_with_frame(geo, operators_from(geo), frame.columns, frame.columns,
                        RhoVariant::Corrected);
}

Eigen::VectorXd rho_expanded_from(const GeometryAtPoint& geo, const AdaptedFrame& frame,
                                  RhoVariant variant) {
  const int n = frame.n;
  const int m = frame.m;
  const int Vc = n - 1;
  const bool corrected = variant == RhoVariant::Corrected;

  std::vector<double> mu(m), nu(m);
  for (int p = 0; p < m; ++p) {
    const double lam = frame.lambdas[p];
    nu[p] = 1.0 / (1.0 + lam * lam);
    mu[p] = lam * nu[p];
  }

  auto Rf = [&](int a, int b, int c, int d) {
    return geo.riemann_on(frame.columns.col(a), frame.columns.col(b), frame.columns.col(c),
                          frame.columns.col(d));
  };

  // beta ranges over the full kernel of nablaV, V included; the beta = n
  // term of a plane-direction sum is R(E, V, V, V) = 0 by antisymmetry but
  // is kept to mirror the displayed summation range.
  std::vector<int> betas;
  for (int a = 2 * m; a <= n - 1; ++a) betas.push_back(a);

  Eigen::VectorXd out(n);
  for (int p = 0; p < m; ++p) {
    const auto [i, is] = frame.pairs[p];
    double t1_i = 0.0, t1_is = 0.0, t2_i = 0.0, t2_is = 0.0, t3_i = 0.0, t3_is = 0.0;
    for (int q = 0; q < m; ++q) {
      t1_i += nu[q] * (Rf(i, 2 * q, 2 * q, Vc) + Rf(i, 2 * q + 1, 2 * q + 1, Vc));
      t1_is += nu[q] * (Rf(is, 2 * q, 2 * q, Vc) + Rf(is, 2 * q + 1, 2 * q + 1, Vc));
      t2_i += mu[q] * Rf(2 * q + 1, 2 * q, is, Vc);
      t2_is += mu[q] * Rf(2 * q + 1, 2 * q, i, Vc);
    }
    for (int beta : betas) {
      t3_i += Rf(i, beta, beta, Vc);
      t3_is += Rf(is, beta, beta, Vc);
    }
    t1_i *= nu[p];
    t1_is *= nu[p];
    t2_i *= mu[p];
    t2_is *= mu[p];
    t3_i *= nu[p];
    t3_is *= nu[p];
    out(i) = corrected ? (t1_i + t2_i + t3_i) : (-t1_i + t2_i - t3_i);
    out(is) = corrected ? (t1_is - t2_is + t3_is) : (-t1_is - t2_is - t3_is);
  }

  auto kernel_value = [&](int alpha) {
    double t1 = 0.0, t3 = 0.0;
    for (int q = 0; q < m; ++q)
      t1 += nu[q] * (Rf(alpha, 2 * q, 2 * q, Vc) + Rf(alpha, 2 * q + 1, 2 * q + 1, Vc));
    for (int beta : betas) t3 += Rf(alpha, beta, beta, Vc);
    return corrected ? (t1 + t3) : (-t1 - t3);
  };
  for (int alpha : frame.kernel_indices) out(alpha) = kernel_value(alpha);
  out(Vc) = kernel_value(Vc);
  return out;
}

Eigen::VectorXd rho_expanded_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                RhoVariant variant, const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  return rho_expanded_from(geo, adapted_frame_from(def, geo, tol), variant);
}

namespace {

Eigen::VectorXd grad_formula_from(const OperatorsAtPoint& ops, const FrameData& fd) {
  const AdaptedFrame& fr = fd.frame;
  const Eigen::MatrixXd Elam = frame_lambda_derivatives(fd);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fr.n);
  for (int p = 0; p < fr.m; ++p) {
    const auto [i, is] = fr.pairs[p];
    const double lam = fr.lambdas[p];
    const double mu_p = lam / (1.0 + lam * lam);
    double s_is = 0.0, s_i = 0.0;
    for (int q = 0; q < fr.m; ++q) {
      const double mu_q = fr.lambdas[q] / (1.0 + fr.lambdas[q] * fr.lambdas[q]);
      s_is += mu_q * Elam(is, q);
      s_i += mu_q * Elam(i, q);
    }
    out(i) = -ops.f * 2.0 * mu_p * s_is;
    out(is) = ops.f * 2.0 * mu_p * s_i;
  }
  return out;
}

Eigen::VectorXd grad_direct_from(const AdaptedFrame& frame, const OperatorsAtPoint& ops,
                                 const Eigen::VectorXd& df) {
  const Eigen::MatrixXd LiM = ops.L_inv * ops.nablaV;
  Eigen::VectorXd out(frame.n);
  for (int b = 0; b < frame.n; ++b) out(b) = (LiM * frame.columns.col(b)).dot(df);
  return out;
}

}  // namespace

GradTerm grad_term_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                      const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  const OperatorsAtPoint ops = operators_from(geo);
  const FrameData fd = frame_coeffs_from(def, geo, tol);
  GradTerm out;
  out.formula = grad_formula_from(ops, fd);
  out.direct = grad_direct_from(fd.frame, ops, stencil_derivatives(def, geo, ops).df);
  return out;
}

namespace {

double lemma12_residual_from(const GeometryAtPoint& geo, const FrameData& fd) {
  const AdaptedFrame& fr = fd.frame;
  const int n = fr.n;

  // Epsi(a, j, k) = E_a(psi_jk)
  Tensor3 Epsi(n);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += fr.columns(c, a) * fd.dpsi(c, j, k);
        Epsi(a, j, k) = s;
      }

  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double rhs = -Epsi(i, j, k) + Epsi(j, i, k);
        for (int l = 0; l <= n - 2; ++l)
          rhs += -fd.G(i, l, k) * fd.psi(j, l) + fd.G(j, l, k) * fd.psi(i, l) +
                 (fd.G(i, j, l) - fd.G(j, i, l)) * fd.psi(l, k);
        const double lhs = geo.riemann_on(fr.columns.col(j), fr.columns.col(i),
                                          fr.columns.col(k), fr.columns.col(n - 1));
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  return worst;
}

}  // namespace

double lemma12_residual(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                        const Tolerances& tol) {
  const GeometryAtPoint geo = geometry_at(def, x);
  return lemma12_residual_from(geo, frame_coeffs_from(def, geo, tol));
}

std::vector<std::string> direction_labels(const AdaptedFrame& frame) {
  std::vector<std::string> labels;
  for (int p = 0; p < frame.m; ++p) {
    labels.push_back("E" + std::to_string(p + 1));
    labels.push_back("E" + std::to_string(p + 1) + "*");
  }
  for (int a : frame.kernel_indices) labels.push_back("Ea" + std::to_string(a + 1));
  labels.push_back("V");
  return labels;
}

namespace {

IdentityResiduals evaluate_point(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                                 const Tolerances& tol) {
  IdentityResiduals row;
  row.x = x;
  try {
    const GeometryAtPoint geo = geometry_at(def, x);
    const OperatorsAtPoint ops = operators_from(geo);
    const FrameData fd = frame_coeffs_from(def, geo, tol);
    const AdaptedFrame& frame = fd.frame;

    const StencilDerivatives st = stencil_derivatives(def, geo, ops);
    const OmegaDirect omega = omega_from_stencil(st, frame);
    const Eigen::VectorXd omega_f = omega_frame_from(ops, fd);
    const Eigen::VectorXd rho_o =
        rho_with_frame(geo, ops, frame.columns, frame.columns, RhoVariant::Original);
    const Eigen::VectorXd rho_c =
        rho_with_frame(geo, ops, frame.columns, frame.columns, RhoVariant::Corrected);
    const Eigen::VectorXd grad = grad_direct_from(frame, ops, st.df);

    row.f = ops.f;
    row.lambdas = frame.lambdas;
    const std::vector<std::string> labels = direction_labels(frame);
    for (int b = 0; b < frame.n; ++b) {
      DirectionRow dir;
      dir.label = labels[b];
      dir.omega_direct = omega.frame(b);
      dir.omega_frame = omega_f(b);
      dir.rho_original = rho_o(b);
      dir.rho_corrected = rho_c(b);
      dir.grad_term = grad(b);
      dir.residual_original = std::abs(dir.omega_direct - ops.f * dir.rho_original);
      dir.residual_corrected =
          std::abs(dir.omega_direct - (ops.f * dir.rho_corrected - dir.grad_term));
      row.directions.push_back(dir);
    }
    row.ok = true;
  } catch (const Error& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

MinimalityReport compare_theorems(const ManifoldDefinition& def,
                                  const std::vector<Eigen::VectorXd>& points,
                                  const Tolerances& tol) {
  MinimalityReport report;
  report.rows.resize(points.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(hw, points.size() ? points.size() : 1));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= points.size()) return;
      report.rows[idx] = evaluate_point(def, points[idx], tol);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  bool minimal = true;
  for (const IdentityResiduals& row : report.rows) {
    if (!row.ok) {
      ++report.failed_points;
      continue;
    }
    const int n = static_cast<int>(row.directions.size());
    for (int b = 0; b < n; ++b) {
      const DirectionRow& dir = row.directions[b];
      report.max_residual_original = std::max(report.max_residual_original,
                                              dir.residual_original);
      report.max_residual_corrected = std::max(report.max_residual_corrected,
                                               dir.residual_corrected);
      if (b < n - 1) {
        const double measure = std::abs(row.f * dir.rho_corrected - dir.grad_term);
        report.max_min_measure = std::max(report.max_min_measure, measure);
        report.max_omega_perp = std::max(report.max_omega_perp, std::abs(dir.omega_direct));
        if (measure >= tol.min) minimal = false;
      }
    }
  }
  report.minimal = minimal;
  return report;
}

}  // namespace kvf
