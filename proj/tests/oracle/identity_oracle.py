#!/usr/bin/env python3
"""High-precision numerical oracle for the minimality identities.

Evaluates every quantity the C++ engine computes (curvature, adapted-frame
data, L_V / f / K_V, omega, both rho variants, the gradient term) with
mpmath at 70 significant digits, using central finite differences whose
truncation error is far below every tolerance asserted in the test suite.
All derivatives here are plain nested stencils of closed-form pointwise
evaluations; nothing is shared with the C++ implementation.

Run offline to (re)generate the golden numbers frozen into the C++ tests:

    python3 tests/oracle/identity_oracle.py
"""

import mpmath as mp

mp.mp.dps = 70

# FD step per derivative "level": level-1 differentiates closed forms,
# level-2 differentiates level-1 results, level-3 differentiates level-2.
H1 = mp.mpf("1e-22")
H2 = mp.mpf("1e-14")
H3 = mp.mpf("1e-9")


def shift(x, a, h):
    y = list(x)
    y[a] = y[a] + h
    return tuple(y)


def d1(f, x, a, h=H1):
    return (f(shift(x, a, h)) - f(shift(x, a, -h))) / (2 * h)


def mat(rows):
    return mp.matrix(rows)


def vec(entries):
    return mp.matrix([list(entries)]).T if not isinstance(entries, mp.matrix) else entries


class Manifold:
    """g, V, frame as closed-form callables over a coordinate tuple."""

    def __init__(self, name, n, gfun, vfun, framefun):
        self.name = name
        self.n = n
        self.g = gfun          # x -> mp.matrix n x n
        self.V = vfun          # x -> list of n mpf
        self.frame = framefun  # x -> list of n columns, each a list of n mpf; last = V

    # ---- level-1 data -------------------------------------------------
    def dg(self, x):
        n = self.n
        return [d1(lambda y, i=i, j=j: self.g(y)[i, j], x, a)
                for a in range(n) for i in range(n) for j in range(n)]

    def gamma(self, x):
        n = self.n
        g = self.g(x)
        gi = g ** -1
        dg = [[[d1(lambda y, i=i, j=j: self.g(y)[i, j], x, a) for j in range(n)]
               for i in range(n)] for a in range(n)]
        G = [[[sum(gi[k, l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) for l in range(n)) / 2
               for j in range(n)] for i in range(n)] for k in range(n)]
        return G  # G[k][i][j]

    def nablaV(self, x):
        n = self.n
        G = self.gamma(x)
        V = self.V(x)
        M = mp.zeros(n, n)
        for k in range(n):
            for j in range(n):
                M[k, j] = d1(lambda y, k=k: self.V(y)[k], x, j) + \
                    sum(G[k][j][l] * V[l] for l in range(n))
        return M

    # ---- level-2: curvature -------------------------------------------
    def riemann(self, x):
        """R[i][j][k][l] in the convention R(x,y,z,w) = -g((nab_x nab_y - nab_y nab_x)z, w)."""
        n = self.n
        G = self.gamma(x)
        dG = [[[[d1(lambda y, k=k, i=i, j=j: self.gamma(y)[k][i][j], x, a, H2)
                 for j in range(n)] for i in range(n)] for k in range(n)] for a in range(n)]
        g = self.g(x)
        R = [[[[mp.mpf(0)] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        op = dG[i][l][j][k] - dG[j][l][i][k] + \
                            sum(G[l][i][m] * G[m][j][k] - G[l][j][m] * G[m][i][k]
                                for m in range(n))
                        R[i][j][k][l] = op  # still the operator component
        Rlow = [[[[ -sum(g[l, m] * R[i][j][k][m] for m in range(n))
                    for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)]
        return Rlow

    # ---- operators -----------------------------------------------------
    def operators(self, x):
        n = self.n
        g = self.g(x)
        gi = g ** -1
        M = self.nablaV(x)
        B = gi * M.T * g
        L = mp.eye(n) + B * M
        f = mp.sqrt(mp.det(L))
        K = f * (L ** -1) * B
        return M, B, L, f, K

    def fval(self, x):
        return self.operators(x)[3]

    def Kmat(self, x):
        return self.operators(x)[4]


def omega_coord(man, x):
    """omega_j = sum_a (nab_a K)^a_j with
    (nab_a K)^k_j = d_a K^k_j + G^k_{a l} K^l_j - G^l_{a j} K^k_l."""
    n = man.n
    G = man.gamma(x)
    K = man.Kmat(x)
    w = [mp.mpf(0)] * n
    for j in range(n):
        acc = mp.mpf(0)
        for a in range(n):
            dK_aj = d1(lambda y, a=a, j=j: man.Kmat(y)[a, j], x, a, H3)
            acc += dK_aj
            for l in range(n):
                acc += G[a][a][l] * K[l, j]   # G^a_{a l} K^l_j with k = a summed over a
                acc -= G[l][a][j] * K[a, l]   # G^l_{a j} K^a_l
        w[j] = acc
    return w


def contract4(R, A, B, C, D, n):
    s = mp.mpf(0)
    for i in range(n):
        if A[i] == 0:
            continue
        for j in range(n):
            if B[j] == 0:
                continue
            for k in range(n):
                if C[k] == 0:
                    continue
                for l in range(n):
                    s += R[i][j][k][l] * A[i] * B[j] * C[k] * D[l]
    return s


def matvec(M, v, n):
    return [sum(M[i, j] * v[j] for j in range(n)) for i in range(n)]


def run_manifold(man, points, directions="frame"):
    n = man.n
    print(f"=== {man.name} (n={n}) ===")
    for x in points:
        g = man.g(x)
        V = man.V(x)
        M, B, L, f, K = man.operators(x)
        Li = L ** -1
        R = man.riemann(x)
        cols = man.frame(x)

        def ip(u, v):
            return sum(g[i, j] * u[i] * v[j] for i in range(n) for j in range(n))

        # frame sanity: gram + adapted relations
        gram_err = max(abs(ip(cols[a], cols[b]) - (1 if a == b else 0))
                       for a in range(n) for b in range(n))
        unit = abs(ip(V, V) - 1)
        kd = max(abs(sum(g[b, k] * M[k, a] for k in range(n)) +
                     sum(g[a, k] * M[k, b] for k in range(n)))
                 for a in range(n) for b in range(n))

        # psi_{jk} = g(nab_{E_j} V, E_k); lambda readoff
        psi = mp.zeros(n, n)
        for j in range(n):
            for k in range(n):
                psi[j, k] = ip(matvec(M, cols[j], n), cols[k])
        # detect m from psi structure: pairs (2p, 2p+1)
        m = 0
        lambdas = []
        while 2 * m + 1 < n and abs(psi[2 * m, 2 * m + 1]) > mp.mpf("1e-12"):
            lambdas.append(psi[2 * m + 1, 2 * m])  # g(nabV E_{i*}, E_i) = +lambda
            m += 1
        adapt_err = mp.mpf(0)
        for p in range(m):
            lam = lambdas[p]
            nvE = matvec(M, cols[2 * p], n)
            nvEs = matvec(M, cols[2 * p + 1], n)
            adapt_err = max(adapt_err,
                            max(abs(nvE[c] + lam * cols[2 * p + 1][c]) for c in range(n)),
                            max(abs(nvEs[c] - lam * cols[2 * p][c]) for c in range(n)))
        for a in range(2 * m, n - 1):
            nvA = matvec(M, cols[a], n)
            adapt_err = max(adapt_err, max(abs(c) for c in nvA))

        w = omega_coord(man, x)
        om = [sum(w[j] * cols[b][j] for j in range(n)) for b in range(n)]

        def rho(X, sign):
            LiM_X = matvec(Li, matvec(M, X, n), n)
            Li_X = matvec(Li, X, n)
            s = mp.mpf(0)
            for jdir in range(n):
                Ej = cols[jdir]
                LiM_Ej = matvec(Li, matvec(M, Ej, n), n)
                Li_Ej = matvec(Li, Ej, n)
                s += contract4(R, LiM_X, LiM_Ej, V, Ej, n)
                s += sign * contract4(R, Li_X, Li_Ej, V, Ej, n)
            return s

        def grad_term_direct(X):
            Y = matvec(Li, matvec(M, X, n), n)
            return sum(Y[a] * d1(lambda y: man.fval(y), x, a, H2) for a in range(n))

        print(f" x={tuple(mp.nstr(c, 6) for c in x)} f={mp.nstr(f, 17)} "
              f"m={m} lam={[mp.nstr(l, 17) for l in lambdas]}")
        print(f"   unit={mp.nstr(unit, 3)} killing={mp.nstr(kd, 3)} "
              f"gram={mp.nstr(gram_err, 3)} adapted={mp.nstr(adapt_err, 3)}")

        labels = []
        for p in range(m):
            labels += [f"E{p+1}", f"E{p+1}*"]
        labels += [f"Ea{a}" for a in range(2 * m + 1, n)]
        labels += ["V"]
        for b in range(n):
            ro = rho(cols[b], +1)
            rc = rho(cols[b], -1)
            gt = grad_term_direct(cols[b])
            res_o = om[b] - f * ro
            res_c = om[b] - (f * rc - gt)
            print(f"   X={labels[b]:<5} omega={mp.nstr(om[b], 17):>24} "
                  f"res_orig={mp.nstr(res_o, 3):>12} res_corr={mp.nstr(res_c, 3):>12}")

        # rho_expanded (corrected + original variants) vs abstract
        kern = list(range(2 * m, n))  # beta = 2m+1..n in 1-based, incl V slot
        def rho_expanded(bpos, sign):
            # sign=+1: original (rho i), sign=-1: corrected (rho i-1)
            lam = lambdas
            nu = [1 / (1 + l ** 2) for l in lam]
            mu = [l / (1 + l ** 2) for l in lam]
            Rf = lambda a, b, c, d: contract4(R, cols[a], cols[b], cols[c], cols[d], n)
            Vc = n - 1
            if bpos == n - 1:
                return None
            if bpos < 2 * m and bpos % 2 == 0:
                i = bpos // 2
                t1 = nu[i] * sum(nu[j] * (Rf(bpos, 2 * j, 2 * j, Vc) +
                                          Rf(bpos, 2 * j + 1, 2 * j + 1, Vc)) for j in range(m))
                t2 = mu[i] * sum(mu[j] * Rf(2 * j + 1, 2 * j, bpos + 1, Vc) for j in range(m))
                t3 = nu[i] * sum(Rf(bpos, bt, bt, Vc) for bt in kern)
                return (-t1 + t2 - t3) if sign > 0 else (t1 + t2 + t3)
            if bpos < 2 * m:
                i = bpos // 2
                t1 = nu[i] * sum(nu[j] * (Rf(bpos, 2 * j, 2 * j, Vc) +
                                          Rf(bpos, 2 * j + 1, 2 * j + 1, Vc)) for j in range(m))
                t2 = mu[i] * sum(mu[j] * Rf(2 * j + 1, 2 * j, bpos - 1, Vc) for j in range(m))
                t3 = nu[i] * sum(Rf(bpos, bt, bt, Vc) for bt in kern)
                return (-t1 - t2 - t3) if sign > 0 else (t1 - t2 + t3)
            # kernel direction
            t1 = sum((1 / (1 + lam[j] ** 2)) * (Rf(bpos, 2 * j, 2 * j, Vc) +
                                                Rf(bpos, 2 * j + 1, 2 * j + 1, Vc)) for j in range(m))
            t3 = sum(Rf(bpos, bt, bt, Vc) for bt in kern)
            return (-t1 - t3) if sign > 0 else (t1 + t3)

        exp_err = mp.mpf(0)
        for b in range(n - 1):
            for sign in (+1, -1):
                rex = rho_expanded(b, sign)
                rab = rho(cols[b], sign)
                exp_err = max(exp_err, abs(rex - rab))
        print(f"   rho_expanded_vs_abstract max err = {mp.nstr(exp_err, 3)}")

        # lemma 12: R_{jikn} vs G / dpsi, for index triples
        def psival(y, j, k):
            gy = man.g(y)
            My = man.nablaV(y)
            cy = man.frame(y)
            return sum(gy[p, q] * My[p, c] * cy[j][c] * cy[k][q]
                       for p in range(n) for q in range(n) for c in range(n))

        # G_{ij}^k = g(nab_{E_i} E_j, E_k)
        Gam = man.gamma(x)
        dE = [[[d1(lambda y, j=j, c=c: man.frame(y)[j][c], x, a) for c in range(n)]
               for j in range(n)] for a in range(n)]
        Gf = [[[mp.mpf(0)] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                covj = [sum(cols[i][a] * (dE[a][j][c] +
                                          sum(Gam[c][a][l] * cols[j][l] for l in range(n)))
                            for a in range(n)) for c in range(n)]
                for k in range(n):
                    Gf[i][j][k] = ip(covj, cols[k])

        Rf = lambda a, b, c, d: contract4(R, cols[a], cols[b], cols[c], cols[d], n)
        lem_err_sub = mp.mpf(0)   # i,j,k < n-1
        lem_err_full = mp.mpf(0)  # i,j,k <= n-1
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    dpsi_i = sum(cols[i][a] * d1(lambda y, j=j, k=k: psival(y, j, k), x, a, H2)
                                 for a in range(n))
                    dpsi_j = sum(cols[j][a] * d1(lambda y, i=i, k=k: psival(y, i, k), x, a, H2)
                                 for a in range(n))
                    rhs = -dpsi_i + dpsi_j
                    for l in range(n - 1):
                        rhs += -Gf[i][l][k] * psi[j, l] + Gf[j][l][k] * psi[i, l] \
                            + Gf[i][j][l] * psi[l, k] - Gf[j][i][l] * psi[l, k]
                    lhs = Rf(j, i, k, n - 1)
                    err = abs(lhs - rhs)
                    if max(i, j, k) < n - 1:
                        lem_err_sub = max(lem_err_sub, err)
                    lem_err_full = max(lem_err_full, err)
        print(f"   lemma12 err (i,j,k<n) = {mp.nstr(lem_err_sub, 3)}   "
              f"(incl. V index) = {mp.nstr(lem_err_full, 3)}")

        # omega frame formulas (e_i)/(e_i*)/(e_alpha), using exact dpsi for E(lambda)
        if m > 0:
            lam = lambdas
            nu = [1 / (1 + l ** 2) for l in lam]
            mu = [l / (1 + l ** 2) for l in lam]

            def Edir_lambda(a, j):
                # E_a(lambda_j) = E_a(psi_{(j*),(j)})
                return sum(cols[a][c] * d1(lambda y, j=j: psival(y, 2 * j + 1, 2 * j), x, c, H2)
                           for c in range(n))

            err_e = mp.mpf(0)
            for i in range(m):
                ei, eis = 2 * i, 2 * i + 1
                s1 = 2 * mu[i] * sum(mu[j] * Edir_lambda(eis, j) for j in range(m))
                s2 = (1 - lam[i] ** 2) * nu[i] ** 2 * Edir_lambda(eis, i)
                s3 = mu[i] * sum(Gf[j][eis][j] for j in range(n - 1))
                s4 = sum(mu[j] * (Gf[2 * j][ei][2 * j + 1] - Gf[2 * j + 1][ei][2 * j])
                         for j in range(m))
                err_e = max(err_e, abs(om[ei] / f - (s1 + s2 + s3 + s4)))
                s1s = -2 * mu[i] * sum(mu[j] * Edir_lambda(ei, j) for j in range(m))
                s2s = -(1 - lam[i] ** 2) * nu[i] ** 2 * Edir_lambda(ei, i)
                s3s = -mu[i] * sum(Gf[j][ei][j] for j in range(n - 1))
                s4s = -sum(mu[j] * (Gf[2 * j + 1][eis][2 * j] - Gf[2 * j][eis][2 * j + 1])
                           for j in range(m))
                err_e = max(err_e, abs(om[eis] / f - (s1s + s2s + s3s + s4s)))
            for a in range(2 * m, n - 1):
                sa = -sum(mu[j] * (Gf[2 * j + 1][a][2 * j] - Gf[2 * j][a][2 * j + 1])
                          for j in range(m))
                err_e = max(err_e, abs(om[a] / f - sa))
            print(f"   omega frame-formula err = {mp.nstr(err_e, 3)}")

            # gradient term formula (L1)/(L2) vs direct
            err_g = mp.mpf(0)
            for i in range(m):
                ei, eis = 2 * i, 2 * i + 1
                form = -f * 2 * mu[i] * sum(mu[j] * Edir_lambda(eis, j) for j in range(m))
                err_g = max(err_g, abs(grad_term_direct(cols[ei]) - form))
                forms = f * 2 * mu[i] * sum(mu[j] * Edir_lambda(ei, j) for j in range(m))
                err_g = max(err_g, abs(grad_term_direct(cols[eis]) - forms))
            for a in range(2 * m, n):
                err_g = max(err_g, abs(grad_term_direct(cols[a])))
            print(f"   grad-term formula err = {mp.nstr(err_g, 3)}")
        print()


# ---------------------------------------------------------------------------
# catalog manifolds
# ---------------------------------------------------------------------------

def euclidean_parallel():
    n = 3
    g = lambda x: mp.eye(3)
    V = lambda x: [mp.mpf(0), mp.mpf(0), mp.mpf(1)]
    fr = lambda x: [[mp.mpf(1), mp.mpf(0), mp.mpf(0)],
                    [mp.mpf(0), mp.mpf(1), mp.mpf(0)],
                    [mp.mpf(0), mp.mpf(0), mp.mpf(1)]]
    return Manifold("euclidean_parallel", n, g, V, fr)


def hopf_s3():
    n = 3

    def g(x):
        w = 1 + x[0] ** 2 + x[1] ** 2 + x[2] ** 2
        s = 4 / w ** 2
        return mat([[s, 0, 0], [0, s, 0], [0, 0, s]])

    def V(x):
        u1, u2, u3 = x
        return [u1 * u3 - u2, u2 * u3 + u1, (1 - u1 ** 2 - u2 ** 2 + u3 ** 2) / 2]

    def fr(x):
        u1, u2, u3 = x
        E1 = [-u3 - u1 * u2, (u1 ** 2 - u2 ** 2 + u3 ** 2 - 1) / 2, u1 - u2 * u3]
        E1s = [(-u1 ** 2 + u2 ** 2 + u3 ** 2 - 1) / 2, u3 - u1 * u2, -u2 - u1 * u3]
        return [E1, E1s, V(x)]

    return Manifold("hopf_s3", n, g, V, fr)


def heisenberg():
    n = 3

    def g(x):
        return mat([[1, 0, 0], [0, 1 + x[0] ** 2, -x[0]], [0, -x[0], 1]])

    V = lambda x: [mp.mpf(0), mp.mpf(0), mp.mpf(1)]

    def fr(x):
        return [[mp.mpf(1), mp.mpf(0), mp.mpf(0)],
                [mp.mpf(0), mp.mpf(1), x[0]],
                [mp.mpf(0), mp.mpf(0), mp.mpf(1)]]

    return Manifold("heisenberg", n, g, V, fr)


def twisted_r3(a=1):
    n = 3
    a = mp.mpf(a)

    def A(x):
        return a * x[0] * x[1]

    def g(x):
        Ax = A(x)
        return mat([[1 + Ax ** 2, 0, Ax], [0, 1, 0], [Ax, 0, 1]])

    V = lambda x: [mp.mpf(0), mp.mpf(0), mp.mpf(1)]

    def fr(x):
        Ax = A(x)
        return [[mp.mpf(1), mp.mpf(0), -Ax],
                [mp.mpf(0), mp.mpf(1), mp.mpf(0)],
                [mp.mpf(0), mp.mpf(0), mp.mpf(1)]]

    return Manifold("twisted_r3", n, g, V, fr)


def product_s3_r2():
    n = 5
    base = hopf_s3()

    def g(x):
        G = mp.eye(5)
        gb = base.g(x[:3])
        for i in range(3):
            for j in range(3):
                G[i, j] = gb[i, j]
        return G

    def V(x):
        return base.V(x[:3]) + [mp.mpf(0), mp.mpf(0)]

    def fr(x):
        cb = base.frame(x[:3])
        z2 = [mp.mpf(0), mp.mpf(0)]
        return [cb[0] + z2, cb[1] + z2,
                [0, 0, 0, mp.mpf(1), 0], [0, 0, 0, 0, mp.mpf(1)],
                cb[2] + z2]

    return Manifold("product_s3_r2", n, g, V, fr)


def sphere2_sign_check():
    """Round unit S^2 in the stereographic chart: report R(u,w,w,u) for
    orthonormal u,w under the sign convention used throughout."""
    n = 2

    def g(x):
        w = 1 + x[0] ** 2 + x[1] ** 2
        s = 4 / w ** 2
        return mat([[s, 0], [0, s]])

    man = Manifold("s2_sign", n, g, lambda x: [mp.mpf(0)] * 2, lambda x: None)
    x = (mp.mpf("0.3"), mp.mpf("-0.2"))
    R = man.riemann(x)
    gm = man.g(x)
    scale = 1 / mp.sqrt(gm[0, 0])
    u = [scale, mp.mpf(0)]
    w = [mp.mpf(0), scale]
    val = contract4(R, u, w, w, u, 2)
    print(f"=== S^2 sign check: R(u,w,w,u) = {mp.nstr(val, 17)} ===\n")


if __name__ == "__main__":
    sphere2_sign_check()

    run_manifold(euclidean_parallel(), [(mp.mpf("0.2"), mp.mpf("-0.3"), mp.mpf("0.1"))])
    run_manifold(twisted_r3(1), [(mp.mpf("0.3"), mp.mpf("0.7"), mp.mpf("0")),
                                 (mp.mpf("0.5"), mp.mpf("0.5"), mp.mpf("0")),
                                 (mp.mpf("0.3"), mp.mpf("0.4"), mp.mpf("0"))])
    run_manifold(hopf_s3(), [(mp.mpf("0.1"), mp.mpf("-0.15"), mp.mpf("0.2"))])
    run_manifold(heisenberg(), [(mp.mpf("0.4"), mp.mpf("-0.2"), mp.mpf("0.3"))])
    run_manifold(product_s3_r2(), [(mp.mpf("0.1"), mp.mpf("-0.15"), mp.mpf("0.2"),
                                    mp.mpf("0.3"), mp.mpf("-0.1"))])
