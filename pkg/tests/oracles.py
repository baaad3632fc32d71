"""Independent reference computations used to check the library.

Nothing here calls into qgbasis, so agreement is a genuine cross-check.
"""
from itertools import combinations
import math

import numpy as np
from scipy import integrate, linalg, optimize


def random_gram(d, rng, spread=0.7):
    """Random real symmetric positive definite matrix with unit diagonal."""
    M = rng.standard_normal((d, d)) * spread + np.eye(d) * 1.5
    G = M @ M.T
    s = 1.0 / np.sqrt(np.diag(G))
    return G * s[:, None] * s[None, :]


def projection_norm_geneig(H, A):
    """sup ||P_A x||_H / ||x||_H as a generalized symmetric eigenproblem."""
    d = H.shape[0]
    P = np.zeros((d, d))
    P[list(A), list(A)] = 1.0
    w = linalg.eigh(P @ H @ P, H, eigvals_only=True)
    return math.sqrt(max(w[-1], 0.0))


def projection_norm_ascent(H, A, starts=6, seed=0, steps=400):
    """Maximize ||P_A x||_H^2 / ||x||_H^2 by direct ascent on the ratio.

    The search runs in whitened coordinates x = L^-T y (H = L L^T), where the
    ratio is y^T M y / y^T y.  A batch of random starts follows normalized
    gradient steps, then the best one is polished with BFGS.
    """
    d = H.shape[0]
    mask = np.zeros(d)
    mask[list(A)] = 1.0
    L = np.linalg.cholesky(H)
    W = linalg.solve_triangular(L, np.eye(d), lower=True).T
    PW = mask[:, None] * W
    M = PW.T @ H @ PW
    rng = np.random.default_rng(seed)

    Y = rng.standard_normal((d, starts))
    eta = 1.0 / max(np.trace(M), 1e-300)
    for _ in range(steps):
        Y = Y + eta * (M @ Y)
        Y /= np.linalg.norm(Y, axis=0)
    ratios = np.einsum("ij,ij->j", Y, M @ Y)
    y0 = Y[:, int(np.argmax(ratios))]

    def f(y):
        ny = y @ y
        my = M @ y
        num = y @ my
        return -num / ny, -(2 * my / ny - 2 * num * y / ny ** 2)

    r = optimize.minimize(f, y0, jac=True, method="BFGS", options={"gtol": 1e-12})
    return math.sqrt(max(-r.fun, float(np.max(ratios))))


def brute_nterm(H, v, N, grid=9):
    """min over |A| = N and real coefficients of ||v - sum_A c_j e_j||_H.

    Coarse grid over the coefficients followed by Nelder-Mead polishing.
    """
    d = H.shape[0]
    best = math.inf
    span = 2.0 * (np.max(np.abs(v)) + 1.0)
    ticks = np.linspace(-span, span, grid)
    for A in combinations(range(d), N):
        A = list(A)

        def f(c):
            w = v.copy()
            w[A] -= c
            return math.sqrt(max(w @ H @ w, 0.0))

        if N <= 2:
            mesh = np.stack(np.meshgrid(*[ticks] * N, indexing="ij"), -1).reshape(-1, N)
            c0 = min(mesh, key=f)
        else:
            c0 = v[A].copy()
        r = optimize.minimize(f, c0, method="Nelder-Mead",
                              options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 20000})
        r = optimize.minimize(f, r.x, method="Nelder-Mead",
                              options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        best = min(best, r.fun)
    return best


def dirichlet_norm_quad(N, gamma):
    """||D_N|| in L^2(|t|^gamma dt) by direct quadrature of the kernel."""
    def f(t):
        s = math.sin(t / 2)
        k = (2 * N + 1) if abs(s) < 1e-300 else math.sin((N + 0.5) * t) / s
        return k * k

    pts = [math.pi * j / (N + 0.5) for j in range(1, int(N + 0.5) + 1)
           if math.pi * j / (N + 0.5) < math.pi]
    a = 0.0
    total = 0.0
    for b in pts + [math.pi]:
        if a == 0.0:
            val, _ = integrate.quad(f, a, b, weight="alg", wvar=(gamma, 0.0),
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
        else:
            val, _ = integrate.quad(lambda t: f(t) * t ** gamma, a, b,
                                    epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
        a = b
    return math.sqrt(2 * total)


def kn_enumerate(H, N):
    d = H.shape[0]
    return max(projection_norm_geneig(H, A) for m in range(1, N + 1)
               for A in combinations(range(d), m))
