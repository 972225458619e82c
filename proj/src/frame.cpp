#include "kvf/frame.hpp"

#include <algorithm>
#include <cmath>

#include "kvf/errors.hpp"
#include "kvf/format.hpp"

namespace kvf {

namespace {

double g_inner(const Eigen::MatrixXd& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return u.dot(g * v);
}

// psi(j,k) = g(nablaV E_j, E_k) for the given columns.
Eigen::MatrixXd psi_matrix(const Eigen::MatrixXd& g, const Eigen::MatrixXd& nablaV,
                           const Eigen::MatrixXd& columns) {
  const Eigen::MatrixXd lowered = g * nablaV * columns;  // (q, j) = [g nablaV E_j]_q
  return (columns.transpose() * lowered).transpose();    // (j, k)
}

void check_killing_and_unit(const GeometryAtPoint& geo, const Tolerances& tol) {
  const double unit_defect = std::abs(g_inner(geo.g, geo.V, geo.V) - 1.0);
  if (unit_defect > tol.unit)
    throw FrameValidationError("V is not unit: |g(V,V)-1| = " + format_g17(unit_defect));
  const int n = static_cast<int>(geo.V.size());
  const Eigen::MatrixXd lowered = geo.g * geo.nablaV;
  double defect = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      defect = std::max(defect, std::abs(lowered(b, a) + lowered(a, b)));
  if (defect > tol.killing)
    throw FrameValidationError("V is not Killing: defect " + format_g17(defect) +
                               " exceeds tolerance " + format_g17(tol.killing));
}

// Shared invariant checks; `strict` distinguishes user input (frame
// validation failure) from a constructed frame (internal failure).
void validate_frame(const GeometryAtPoint& geo, const AdaptedFrame& f, bool user_supplied) {
  const int n = f.n;
  auto fail = [&](const std::string& msg) -> void {
    if (user_supplied) throw FrameValidationError(msg);
    throw InternalError("constructed frame invalid: " + msg);
  };

  double vdiff = (f.columns.col(n - 1) - geo.V).cwiseAbs().maxCoeff();
  if (vdiff > 1e-9) fail("frame column n differs from V by " + format_g17(vdiff));

  const Eigen::MatrixXd gram = f.columns.transpose() * geo.g * f.columns;
  const double gram_err = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (gram_err > 1e-9)
    fail("frame is not g-orthonormal: Gram defect " + format_g17(gram_err));

  for (int p = 0; p < f.m; ++p) {
    const double lam = f.lambdas[p];
    if (!(lam > 0.0)) fail("lambda_" + std::to_string(p + 1) + " is not positive");
    if (p > 0 && f.lambdas[p] > f.lambdas[p - 1] + 1e-9)
      fail("lambdas are not in descending order");
    const auto [i, is] = f.pairs[p];
    const Eigen::VectorXd r1 = geo.nablaV * f.columns.col(i) + lam * f.columns.col(is);
    const Eigen::VectorXd r2 = geo.nablaV * f.columns.col(is) - lam * f.columns.col(i);
    const double e1 = std::sqrt(g_inner(geo.g, r1, r1));
    const double e2 = std::sqrt(g_inner(geo.g, r2, r2));
    if (e1 > 1e-8)
      fail("nablaV(E_" + std::to_string(p + 1) + ") != -lambda E_" + std::to_string(p + 1) +
           "*: residual " + format_g17(e1));
    if (e2 > 1e-8)
      fail("nablaV(E_" + std::to_string(p + 1) + "*) != lambda E_" + std::to_string(p + 1) +
           ": residual " + format_g17(e2));
  }

  for (int a : f.kernel_indices) {
    const Eigen::VectorXd r = geo.nablaV * f.columns.col(a);
    const double e = std::sqrt(g_inner(geo.g, r, r));
    if (e > 1e-8)
      fail("nablaV(E_" + std::to_string(a + 1) + ") != 0 on a kernel direction: residual " +
           format_g17(e));
  }
  const Eigen::VectorXd rv = geo.nablaV * f.columns.col(n - 1);
  const double ev = std::sqrt(g_inner(geo.g, rv, rv));
  if (ev > 1e-8) fail("nablaV(V) != 0: residual " + format_g17(ev));
}

AdaptedFrame read_analytic_frame(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                                 const Tolerances& tol) {
  const int n = def.dimension;
  AdaptedFrame f;
  f.n = n;
  f.columns.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) f.columns(c, a) = def.frame_entry(a, c).eval(geo.x);

  // Read off the rotation planes from psi: leading 2x2 blocks with
  // psi(i*, i) = +lambda.
  const Eigen::MatrixXd psi = psi_matrix(geo.g, geo.nablaV, f.columns);
  int m = 0;
  while (2 * m + 1 <= n - 2) {
    const double lam = psi(2 * m + 1, 2 * m);
    if (std::abs(lam) <= tol.rank) break;
    if (lam < 0.0)
      throw FrameValidationError("frame pair " + std::to_string(m + 1) +
                                 " is oriented against the normalization: psi(i*, i) = " +
                                 format_g17(lam) + " < 0");
    f.lambdas.push_back(lam);
    f.pairs.emplace_back(2 * m, 2 * m + 1);
    ++m;
  }
  f.m = m;
  for (int a = 2 * m; a <= n - 2; ++a) f.kernel_indices.push_back(a);
  validate_frame(geo, f, true);
  return f;
}

// First coordinate component with magnitude above the threshold must be
// positive; flipping a whole plane (or a kernel column) is admissible.
void orient_positive(Eigen::MatrixXd& columns, int col, int partner) {
  const int n = static_cast<int>(columns.rows());
  for (int c = 0; c < n; ++c) {
    const double v = columns(c, col);
    if (std::abs(v) > 1e-10) {
      if (v < 0.0) {
        columns.col(col) = -columns.col(col);
        if (partner >= 0) columns.col(partner) = -columns.col(partner);
      }
      return;
    }
  }
}

AdaptedFrame construct_frame(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                             const Tolerances& tol) {
  const int n = def.dimension;

  // g-orthonormal basis of the complement of V, by pivoted Gram-Schmidt over
  // the coordinate directions (largest residual g-norm first, deterministic).
  Eigen::MatrixXd U(n, n - 1);
  {
    std::vector<Eigen::VectorXd> ortho;
    ortho.push_back(geo.V / std::sqrt(g_inner(geo.g, geo.V, geo.V)));
    std::vector<int> remaining(n);
    for (int c = 0; c < n; ++c) remaining[c] = c;
    for (int s = 0; s < n - 1; ++s) {
      double best_norm2 = -1.0;
      int best_pos = -1;
      Eigen::VectorXd best_res;
      for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        r(remaining[pos]) = 1.0;
        for (const Eigen::VectorXd& o : ortho) r -= g_inner(geo.g, r, o) * o;
        const double norm2 = g_inner(geo.g, r, r);
        if (norm2 > best_norm2) {
          best_norm2 = norm2;
          best_pos = static_cast<int>(pos);
          best_res = r;
        }
      }
      if (best_norm2 <= 1e-12)
        throw InternalError("complement basis construction degenerated");
      best_res /= std::sqrt(best_norm2);
      // One re-orthogonalization pass tightens the Gram matrix to roundoff.
      for (const Eigen::VectorXd& o : ortho) best_res -= g_inner(geo.g, best_res, o) * o;
      best_res /= std::sqrt(g_inner(geo.g, best_res, best_res));
      ortho.push_back(best_res);
      U.col(s) = best_res;
      remaining.erase(remaining.begin() + best_pos);
    }
  }

  // nablaV restricted to the complement, expressed in the U basis; exactly
  // skew for a Killing field, so the symmetric roundoff part is dropped.
  const int d0 = n - 1;
  Eigen::MatrixXd S(d0, d0);
  for (int p = 0; p < d0; ++p)
    for (int q = 0; q < d0; ++q) S(p, q) = g_inner(geo.g, geo.nablaV * U.col(q), U.col(p));
  S = 0.5 * (S - S.transpose()).eval();

  // Peel off rotation planes in descending lambda order. Each plane is the
  // top eigenspace of -S^2 restricted to the not-yet-claimed subspace.
  std::vector<Eigen::VectorXd> plane_cols;  // u-basis coefficients, (E_i, E_i*) pairs
  std::vector<double> lambdas;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(d0, d0);
  while (basis.cols() >= 2) {
    const Eigen::MatrixXd Sd = basis.transpose() * S * basis;
    const Eigen::MatrixXd Cd = Sd.transpose() * Sd;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Cd);
    const int top = static_cast<int>(Cd.cols()) - 1;
    const double lam = std::sqrt(std::max(es.eigenvalues()(top), 0.0));
    if (lam < tol.rank) break;
    Eigen::VectorXd u1 = basis * es.eigenvectors().col(top);
    u1.normalize();
    Eigen::VectorXd v1 = -(S * u1) / lam;
    v1.normalize();
    plane_cols.push_back(u1);
    plane_cols.push_back(v1);
    lambdas.push_back(lam);

    Eigen::MatrixXd projected = basis;
    projected -= u1 * (u1.transpose() * basis);
    projected -= v1 * (v1.transpose() * basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projected);
    qr.setThreshold(1e-8);
    // Genuine leftover directions keep unit-scale pivots; a numerically zero
    // remainder must read as rank 0 (the relative threshold would not).
    const int rank = qr.maxPivot() < 1e-10 ? 0 : static_cast<int>(qr.rank());
    if (rank != static_cast<int>(basis.cols()) - 2)
      throw InternalError("plane deflation produced unexpected rank");
    basis = Eigen::MatrixXd(qr.householderQ()).leftCols(rank).eval();
  }

  const int m = static_cast<int>(lambdas.size());
  for (int p = 0; p + 1 < m; ++p)
    if (lambdas[p] - lambdas[p + 1] < tol.sep)
      throw NearDegenerateError(
          "rotation-plane eigenvalues " + format_g17(lambdas[p]) + " and " +
          format_g17(lambdas[p + 1]) +
          " are closer than the separation tolerance and no analytic frame was supplied");

  AdaptedFrame f;
  f.n = n;
  f.m = m;
  f.lambdas = lambdas;
  f.columns.resize(n, n);
  for (int p = 0; p < m; ++p) {
    f.columns.col(2 * p) = U * plane_cols[2 * p];
    f.columns.col(2 * p + 1) = U * plane_cols[2 * p + 1];
    f.pairs.emplace_back(2 * p, 2 * p + 1);
    orient_positive(f.columns, 2 * p, 2 * p + 1);
  }
  for (int s = 0; s < static_cast<int>(basis.cols()); ++s) {
    const int col = 2 * m + s;
    f.columns.col(col) = U * basis.col(s);
    f.kernel_indices.push_back(col);
    orient_positive(f.columns, col, -1);
  }
  f.columns.col(n - 1) = geo.V;

  validate_frame(geo, f, false);
  return f;
}

}  // namespace

AdaptedFrame adapted_frame_from(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                                const Tolerances& tol) {
  check_killing_and_unit(geo, tol);
  if (def.frame) return read_analytic_frame(def, geo, tol);
  return construct_frame(def, geo, tol);
}

AdaptedFrame adapted_frame_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                              const Tolerances& tol) {
  return adapted_frame_from(def, geometry_at(def, x), tol);
}

namespace {

double uniform_unit(std::mt19937_64& rng) {
  // Top 53 bits; identical across platforms, unlike the distribution classes.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

AdaptedFrame rotate_admissible(const AdaptedFrame& frame, std::mt19937_64& rng) {
  AdaptedFrame out = frame;
  for (int p = 0; p < frame.m; ++p) {
    const double theta = 2.0 * M_PI * uniform_unit(rng);
    const double c = std::cos(theta), s = std::sin(theta);
    const auto [i, is] = frame.pairs[p];
    const Eigen::VectorXd ei = frame.columns.col(i), eis = frame.columns.col(is);
    out.columns.col(i) = c * ei + s * eis;
    out.columns.col(is) = -s * ei + c * eis;
  }
  const int k = static_cast<int>(frame.kernel_indices.size());
  if (k >= 1) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        const double theta = 2.0 * M_PI * uniform_unit(rng);
        Eigen::MatrixXd giv = Eigen::MatrixXd::Identity(k, k);
        giv(a, a) = std::cos(theta);
        giv(b, b) = std::cos(theta);
        giv(a, b) = -std::sin(theta);
        giv(b, a) = std::sin(theta);
        R = giv * R;
      }
    for (int a = 0; a < k; ++a)
      if (uniform_unit(rng) < 0.5) R.col(a) = -R.col(a);
    Eigen::MatrixXd kernel(frame.n, k);
    for (int a = 0; a < k; ++a) kernel.col(a) = frame.columns.col(frame.kernel_indices[a]);
    kernel = (kernel * R).eval();
    for (int a = 0; a < k; ++a) out.columns.col(frame.kernel_indices[a]) = kernel.col(a);
  }
  return out;
}

namespace {

// G and psi from explicit frame values and their coordinate derivatives.
// dE is indexed (coordinate direction a, frame column j, component c).
void assemble_coeffs(const GeometryAtPoint& geo, const Eigen::MatrixXd& columns,
                     const Tensor3& dE, FrameData& out) {
  const int n = static_cast<int>(columns.rows());
  out.psi = psi_matrix(geo.g, geo.nablaV, columns);
  out.G = Tensor3(n);
  for (int j = 0; j < n; ++j) {
    // W(a, c) = (d_a E_j + Gamma(., a, .) E_j)^c
    Eigen::MatrixXd W(n, n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        double s = dE(a, j, c);
        for (int l = 0; l < n; ++l) s += geo.gamma(c, a, l) * columns(l, j);
        W(a, c) = s;
      }
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd cov = Eigen::VectorXd::Zero(n);
      for (int a = 0; a < n; ++a) cov += columns(a, i) * W.row(a).transpose();
      const Eigen::VectorXd lowered = geo.g * cov;
      for (int k = 0; k < n; ++k) out.G(i, j, k) = lowered.dot(columns.col(k));
    }
  }
}

// Exact coordinate derivative of psi via the product rule; needs dg,
// dnablaV and dE.
Tensor3 dpsi_exact(const GeometryAtPoint& geo, const Eigen::MatrixXd& columns,
                   const Tensor3& dE) {
  const int n = static_cast<int>(columns.rows());
  Tensor3 dpsi(n);
  for (int a = 0; a < n; ++a) {
    Eigen::MatrixXd dga(n, n), dMa(n, n), dEa(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        dga(p, q) = geo.dg(a, p, q);
        dMa(p, q) = geo.dnablaV(a, p, q);
        dEa(p, q) = dE(a, q, p);  // (component p, column q)
      }
    const Eigen::MatrixXd t1 = dga * geo.nablaV * columns;
    const Eigen::MatrixXd t2 = geo.g * dMa * columns;
    const Eigen::MatrixXd t3 = geo.g * geo.nablaV * dEa;
    const Eigen::MatrixXd lowered = geo.g * geo.nablaV * columns;
    // psi(j,k) = sum_q columns(q,k) * lowered(q,j)
    const Eigen::MatrixXd dl = t1 + t2 + t3;
    const Eigen::MatrixXd part1 = (columns.transpose() * dl).transpose();  // (j,k)
    const Eigen::MatrixXd part2 = (dEa.transpose() * lowered).transpose();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) dpsi(a, j, k) = part1(j, k) + part2(j, k);
  }
  return dpsi;
}

// Align a stencil frame onto the center frame: SO(2) Procrustes per plane,
// O(k) Procrustes on the kernel block. Returns the aligned column matrix.
Eigen::MatrixXd align_frame(const AdaptedFrame& center, const AdaptedFrame& other) {
  if (other.m != center.m)
    throw AlignmentError("rank of nablaV changes across the stencil (m = " +
                         std::to_string(center.m) + " vs " + std::to_string(other.m) + ")");
  const int n = center.n;
  Eigen::MatrixXd aligned = other.columns;
  for (int p = 0; p < center.m; ++p) {
    const auto [i, is] = center.pairs[p];
    Eigen::MatrixXd Pc(n, 2), Po(n, 2);
    Pc.col(0) = center.columns.col(i);
    Pc.col(1) = center.columns.col(is);
    Po.col(0) = other.columns.col(i);
    Po.col(1) = other.columns.col(is);
    const Eigen::Matrix2d M = Po.transpose() * Pc;
    const double theta = std::atan2(M(1, 0) - M(0, 1), M(0, 0) + M(1, 1));
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Eigen::MatrixXd rotated = Po * R;
    if ((rotated - Pc).cwiseAbs().maxCoeff() > 0.5)
      throw AlignmentError("stencil frame too far from the center frame after alignment");
    aligned.col(i) = rotated.col(0);
    aligned.col(is) = rotated.col(1);
  }
  const int k = static_cast<int>(center.kernel_indices.size());
  if (k >= 1) {
    Eigen::MatrixXd Kc(n, k), Ko(n, k);
    for (int a = 0; a < k; ++a) {
      Kc.col(a) = center.columns.col(center.kernel_indices[a]);
      Ko.col(a) = other.columns.col(other.kernel_indices[a]);
    }
    const Eigen::MatrixXd M = Ko.transpose() * Kc;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd rotated = Ko * R;
    if ((rotated - Kc).cwiseAbs().maxCoeff() > 0.5)
      throw AlignmentError("stencil kernel block too far from the center block after alignment");
    for (int a = 0; a < k; ++a) aligned.col(center.kernel_indices[a]) = rotated.col(a);
  }
  return aligned;
}

}  // namespace

FrameData frame_coeffs_from(const ManifoldDefinition& def, const GeometryAtPoint& geo,
                            const Tolerances& tol) {
  const int n = def.dimension;
  FrameData out;
  out.frame = adapted_frame_from(def, geo, tol);

  if (def.frame) {
    Tensor3 dE(n);
    Eigen::MatrixXd columns(n, n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        const Jet2 jet = def.frame_entry(a, c).eval_jet2(geo.x);
        columns(c, a) = jet.v;
        for (int d = 0; d < n; ++d) dE(d, a, c) = jet.g(d);
      }
    assemble_coeffs(geo, columns, dE, out);
    out.dpsi = dpsi_exact(geo, columns, dE);
    return out;
  }

  require_stencil_margin(def, geo.x);
  const Eigen::VectorXd h = fd_steps(def);
  Tensor3 dE(n);
  Tensor3 dpsi(n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd xp = geo.x, xm = geo.x;
    xp(c) += h(c);
    xm(c) -= h(c);
    const GeometryAtPoint geop = geometry_at(def, xp);
    const GeometryAtPoint geom = geometry_at(def, xm);
    const Eigen::MatrixXd colsp = align_frame(out.frame, adapted_frame_from(def, geop, tol));
    const Eigen::MatrixXd colsm = align_frame(out.frame, adapted_frame_from(def, geom, tol));
    const Eigen::MatrixXd dcols = (colsp - colsm) / (2.0 * h(c));
    for (int a = 0; a < n; ++a)
      for (int comp = 0; comp < n; ++comp) dE(c, a, comp) = dcols(comp, a);
    const Eigen::MatrixXd psip = psi_matrix(geop.g, geop.nablaV, colsp);
    const Eigen::MatrixXd psim = psi_matrix(geom.g, geom.nablaV, colsm);
    const Eigen::MatrixXd dp = (psip - psim) / (2.0 * h(c));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) dpsi(c, j, k) = dp(j, k);
  }
  assemble_coeffs(geo, out.frame.columns, dE, out);
  out.dpsi = dpsi;
  return out;
}

FrameData frame_coeffs_at(const ManifoldDefinition& def, const Eigen::VectorXd& x,
                          const Tolerances& tol) {
  return frame_coeffs_from(def, geometry_at(def, x), tol);
}

Eigen::MatrixXd frame_lambda_derivatives(const FrameData& data) {
  const AdaptedFrame& f = data.frame;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.n, f.m);
  for (int a = 0; a < f.n; ++a)
    for (int p = 0; p < f.m; ++p) {
      const auto [i, is] = f.pairs[p];
      double s = 0.0;
      for (int c = 0; c < f.n; ++c) s += f.columns(c, a) * data.dpsi(c, is, i);
      out(a, p) = s;
    }
  return out;
}

}  // namespace kvf
