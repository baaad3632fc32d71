"""Thresholding greedy algorithm, quasi-greedy constants, best N-term error."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
import math

import numpy as np
from scipy import linalg, optimize

from .core import HILBERT, as_coeffs, restrict, support
from .errors import ValidationError

ASCENDING = "ascending-index"
ENUMERATE = "enumerate-all"
DEFAULT_ENUM_BUDGET = 10_000


@dataclass(frozen=True)
class TiePolicy:
    mode: str = ASCENDING
    budget: int = DEFAULT_ENUM_BUDGET

    def __post_init__(self):
        if self.mode not in (ASCENDING, ENUMERATE):
            raise ValidationError(f"unknown tie policy {self.mode!r}")
        if self.budget < 1:
            raise ValidationError("enumeration budget must be positive")


@dataclass
class GreedySets:
    """All greedy projections of a vector under the enumerate-all policy."""

    sets: list
    vectors: list
    truncated: bool


def greedy_order(v):
    """Indices sorted by decreasing modulus, ties broken by ascending index."""
    return np.argsort(-np.abs(v), kind="stable")


def greedy_set(v, N):
    v = as_coeffs(v)
    n = min(int(N), len(support(v)))
    return tuple(sorted(int(i) for i in greedy_order(v)[:n]))


def greedy_sets(v, N, budget=DEFAULT_ENUM_BUDGET):
    """Every valid greedy set of size ``min(N, |supp v|)``, up to `budget`.

    Returns ``(sets, truncated)``.
    """
    v = as_coeffs(v)
    mod = np.abs(v)
    n = min(int(N), len(support(v)))
    if n == 0:
        return [()], False
    order = greedy_order(v)
    t = mod[order[n - 1]]
    above = [int(i) for i in np.flatnonzero(mod > t)]
    ties = [int(i) for i in np.flatnonzero(mod == t)]
    need = n - len(above)
    sets = []
    truncated = False
    for extra in combinations(ties, need):
        if len(sets) >= budget:
            truncated = True
            break
        sets.append(tuple(sorted(above + list(extra))))
    return sets, truncated


def greedy_projection(v, N, policy=TiePolicy()):
    """G_N v: keep the N largest coefficients in modulus.

    With the ascending-index policy returns one vector; with enumerate-all
    returns a :class:`GreedySets` listing every admissible choice.
    """
    v = as_coeffs(v)
    if not 0 <= N <= v.shape[0]:
        raise ValidationError(f"N must lie in [0, {v.shape[0]}], got {N}")
    if policy.mode == ASCENDING:
        return restrict(v, greedy_set(v, N))
    sets, truncated = greedy_sets(v, N, policy.budget)
    return GreedySets(sets, [restrict(v, A) for A in sets], truncated)


# -- sampling --------------------------------------------------------------

def _block_ids(basis):
    labels = basis.labels
    if labels and all(isinstance(l, tuple) and len(l) == 2 and isinstance(l[0], int)
                      for l in labels):
        return np.array([l[0] for l in labels])
    return None


def sample_gaussian(basis, rng):
    d = basis.dim
    return (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / math.sqrt(2)


def sample_signs(basis, rng):
    d = basis.dim
    m = int(rng.integers(1, d + 1))
    v = np.zeros(d, dtype=complex)
    idx = rng.choice(d, size=m, replace=False)
    v[idx] = rng.choice([-1.0, 1.0], size=m)
    return v


def sample_block(basis, rng):
    d = basis.dim
    v = np.zeros(d, dtype=complex)
    blocks = _block_ids(basis)
    if blocks is not None:
        ids = np.unique(blocks)
        chosen = rng.choice(ids, size=int(rng.integers(1, len(ids) + 1)), replace=False)
        for b in chosen:
            members = np.flatnonzero(blocks == b)
            take = members[: int(rng.integers(1, len(members) + 1))]
            v[take] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
    else:
        a = int(rng.integers(0, d))
        b = int(rng.integers(a + 1, d + 1))
        v[a:b] = 1.0
    return v


def sample_geometric(basis, rng):
    """Coefficients spread over dyadic modulus levels 2^-l < |a| <= 2^-(l-1)."""
    d = basis.dim
    levels = max(1, int(math.ceil(math.log2(d + 1))))
    lev = rng.integers(1, levels + 2, size=d)
    mod = 2.0 ** (-lev) * (1.0 + rng.uniform(0.0, 1.0, size=d))
    phase = rng.choice([-1.0, 1.0], size=d)
    return mod * phase


SAMPLERS = {
    "gaussian": sample_gaussian,
    "signs": sample_signs,
    "block": sample_block,
    "geometric": sample_geometric,
}


@dataclass
class Witness:
    x: np.ndarray
    N: int
    ratio: float
    kind: str = "greedy"


@dataclass
class GreedyReport:
    Khat: float
    kappaHat: float
    witnesses: list
    trials: int
    seed: int
    skipped: int = 0
    extras: dict = field(default_factory=dict)


def prefix_norms(basis, v, order=None):
    """Norms of ``G_N v`` and ``v - G_N v`` for N = 0..d along `order`."""
    v = as_coeffs(v, basis.dim)
    if order is None:
        order = greedy_order(v)
    nz = np.abs(v[order]) > 0
    order = order[nz]
    cols = v[order]
    if basis.kind == HILBERT:
        # q_N = q_{N-1} + |y_N|^2 H_NN + 2 Re(conj(y_N) sum_{rank j < N} H_Nj y_j)
        H = basis.gram
        d = basis.dim
        w = v.real if not np.any(v.imag) and not np.iscomplexobj(H) else v
        rank = np.full(d, d)
        rank[order] = np.arange(order.size)
        r = np.where(rank[None, :] < rank[:, None], H, 0.0) @ w
        Hw = H @ w
        inc = np.abs(w) ** 2 * np.real(np.diag(H)) + 2.0 * np.real(np.conj(w) * r)
        q = np.cumsum(inc[order])
        cross = np.cumsum(np.real(np.conj(w[order]) * Hw[order]))
        full_sq = float(np.real(np.vdot(w, Hw)))
        head = np.sqrt(np.maximum(q, 0.0))
        # squared tails carry absolute error ~eps*||v||^2; the last one is exactly 0
        tail = np.sqrt(np.maximum(full_sq - 2.0 * cross + q, 0.0))
        if tail.size:
            tail[-1] = 0.0
        full = math.sqrt(max(full_sq, 0.0))
    else:
        Y = basis.B[:, order] * cols
        P = np.cumsum(Y, axis=1)
        total = P[:, -1:] if P.shape[1] else np.zeros((basis.B.shape[0], 1))
        head = basis.ambient.norms(P)
        tail = basis.ambient.norms(total - P)
        full = float(basis.ambient.norms(total)[0])
    head = np.concatenate([[0.0], head])
    tail = np.concatenate([[full], tail])
    return head, tail


def _trial(basis, sampler, child, policy):
    rng = np.random.default_rng(child)
    v = SAMPLERS[sampler](basis, rng)
    nrm = basis.norm(v)
    if not nrm > 0:
        return None
    if policy.mode == ASCENDING:
        head, tail = prefix_norms(basis, v)
        n = int(np.argmax(head))
        return v, n, head[n] / nrm, float(np.max(tail)) / nrm
    best_k, best_n, best_kappa = -1.0, 0, 0.0
    for N in range(basis.dim + 1):
        sets, _ = greedy_sets(v, N, policy.budget)
        for A in sets:
            g = restrict(v, A)
            rk = basis.norm(g) / nrm
            rr = basis.norm(v - g) / nrm
            if rk > best_k:
                best_k, best_n = rk, N
            best_kappa = max(best_kappa, rr)
    return v, best_n, best_k, best_kappa


def estimate_qg_constant(basis, sampler="mixed", trials=100, seed=0,
                         policy=TiePolicy(), threads=1, keep=5):
    """Lower estimates of the quasi-greedy constants over random vectors.

    ``Khat = max ||G_N x|| / ||x||`` and ``kappaHat`` additionally maximizes
    ``||x - G_N x|| / ||x||``, over all N and the sampled x.  `sampler` is a
    name from ``SAMPLERS``, a list of names, or ``"mixed"`` (round robin).
    Trial ``i`` draws from its own spawned seed, so results do not depend on
    `threads`.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if sampler == "mixed":
        names = sorted(SAMPLERS)
    elif isinstance(sampler, str):
        names = [sampler]
    else:
        names = list(sampler)
    for n in names:
        if n not in SAMPLERS:
            raise ValidationError(f"unknown sampler {n!r}")
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(names[i % len(names)], children[i]) for i in range(trials)]

    def run(job):
        return _trial(basis, job[0], job[1], policy)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    Khat, kappa, skipped = 1.0, 1.0, 0
    wits = []
    for res in results:
        if res is None:
            skipped += 1
            continue
        v, n, rk, rr = res
        kappa = max(kappa, rr)
        wits.append(Witness(v, n, float(rk)))
    wits.sort(key=lambda w: -w.ratio)
    wits = wits[:keep]
    if wits:
        Khat = max(Khat, wits[0].ratio)
    if not wits or wits[0].ratio < 1.0:
        # N = d gives ratio one; record that witness so Khat is attained.
        e = np.zeros(basis.dim, dtype=complex)
        e[0] = 1.0
        wits.insert(0, Witness(e, basis.dim, 1.0, kind="identity"))
    return GreedyReport(Khat=float(Khat), kappaHat=float(kappa), witnesses=wits,
                        trials=trials, seed=seed, skipped=skipped)


# -- best N-term approximation ---------------------------------------------

@dataclass
class NTermResult:
    value: float
    support: tuple
    exact: bool
    method: str


def _residual_hilbert(basis, v, A):
    """min_c ||v - sum_{j in A} c_j b_j|| by least squares in factor coordinates."""
    F = basis.factor
    y = F @ v
    if not A:
        return float(np.linalg.norm(y))
    FA = F[:, list(A)]
    c, *_ = linalg.lstsq(FA, y)
    return float(np.linalg.norm(y - FA @ c))


def _residual_general(basis, v, A):
    if not A:
        return basis.norm(v)
    A = list(A)
    cplx = np.iscomplexobj(basis.B) or np.any(np.imag(v))

    def unpack(z):
        return z[: len(A)] + 1j * z[len(A):] if cplx else z

    def f(z):
        w = v.copy()
        w[A] = w[A] - unpack(z)
        return basis.norm(w)

    z0 = np.concatenate([v[A].real, v[A].imag]) if cplx else v[A].real.copy()
    res = optimize.minimize(f, z0, method="Powell",
                            options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 20000})
    return float(min(res.fun, f(z0)))


def _schur_scores(H, Hv, vHv, sets):
    """Squared residuals for many candidate supports via Schur complements."""
    out = []
    for A in sets:
        A = list(A)
        b = Hv[A]
        try:
            sol = linalg.solve(H[np.ix_(A, A)], b, assume_a="pos")
        except linalg.LinAlgError:
            sol = np.linalg.lstsq(H[np.ix_(A, A)], b, rcond=None)[0]
        out.append(max(0.0, float(np.real(vHv - np.vdot(b, sol)))))
    return out


def best_nterm_error(basis, v, N, budget=100_000, search_budget=None):
    """sigma_N(v) = inf over |A| <= N and coefficients of ||v - sum_A c_j b_j||.

    Exhaustive over supports when ``C(d, N) <= budget`` (Hilbert ambient),
    otherwise greedy support plus pairwise-swap local search, flagged with
    ``exact=False``.  Non-Hilbert ambients always take the heuristic path.
    """
    v = as_coeffs(v, basis.dim)
    d = basis.dim
    if not 0 <= N <= d:
        raise ValidationError(f"N must lie in [0, {d}]")
    n = min(int(N), d)
    if search_budget is None:
        search_budget = 200 * d
    hilbert = basis.kind == HILBERT
    if n == 0:
        return NTermResult(basis.norm(v), (), True, "empty")
    if n == d:
        return NTermResult(0.0, tuple(range(d)), True, "full")
    if hilbert and math.comb(d, n) <= budget:
        H = basis.gram
        Hv = H @ v
        vHv = np.vdot(v, Hv)
        best, bestA = math.inf, None
        for A in combinations(range(d), n):
            s = _schur_scores(H, Hv, vHv, [A])[0]
            if s < best:
                best, bestA = s, A
        return NTermResult(_residual_hilbert(basis, v, bestA), bestA, True, "exhaustive")

    resid = (lambda A: _residual_hilbert(basis, v, A)) if hilbert else \
        (lambda A: _residual_general(basis, v, A))
    A = set(greedy_set(v, n))
    for i in range(d):
        if len(A) == n:
            break
        A.add(i)
    cur = resid(tuple(sorted(A)))
    evals = 1
    improved = True
    while improved and evals < search_budget:
        improved = False
        for i in sorted(A):
            for j in range(d):
                if j in A or evals >= search_budget:
                    continue
                cand = tuple(sorted((A - {i}) | {j}))
                r = resid(cand)
                evals += 1
                if r < cur - 1e-14:
                    A, cur, improved = set(cand), r, True
                    break
            if improved:
                break
    return NTermResult(cur, tuple(sorted(A)), False,
                       "local-search" if hilbert else "local-search-general")


def lebesgue_ratio(basis, v, N, budget=100_000):
    """||v - G_N v|| / sigma_N(v); None when sigma_N(v) vanishes."""
    v = as_coeffs(v, basis.dim)
    sigma = best_nterm_error(basis, v, N, budget)
    if sigma.value <= 1e-12 * max(1.0, basis.norm(v)):
        return None
    g = greedy_projection(v, N)
    return basis.norm(v - g) / sigma.value
