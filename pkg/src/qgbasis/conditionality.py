"""Coordinate-projection norms, the conditionality constants k_N, democracy
profiles, and explicit witness constructions."""
from dataclasses import dataclass, field
from itertools import combinations, islice
import math

import numpy as np
from scipy import linalg, optimize

from .core import HILBERT, as_coeffs, indicator, restrict, support_set
from .errors import BudgetExceeded, ValidationError

EXACT = "exact-spectral"
SIGN = "sign-partition"
ODD = "odd-block"
OLEVSKII = "olevskii-block"
RANDOM = "random-search"
ALL_STRATEGIES = (EXACT, ODD, SIGN, OLEVSKII, RANDOM)

_CHUNK = 4096


@dataclass
class WitnessReport:
    """A set A and vector x certifying ``k_{|A|} >= ||S_A x|| / ||x||``."""

    A: tuple
    x: np.ndarray
    ratio: float
    method: str
    info: dict = field(default_factory=dict)

    def recompute(self, basis):
        return witness_ratio(basis, self.A, self.x)


def witness_ratio(basis, A, x):
    x = as_coeffs(x, basis.dim)
    n = basis.norms(np.stack([restrict(x, A), x], axis=1))
    return float(n[0] / n[1])


@dataclass
class KnRow:
    N: int
    lower: float
    exact: float | None
    witness: WitnessReport
    tried: dict = field(default_factory=dict)


# -- projection norms -------------------------------------------------------

def _spectral_batch(H, Hinv, idx):
    """Squared norms ||S_A||^2 for a stack of equal-size index sets.

    Uses ``||S_A||^2 = lambda_max(C^H Hinv_AA C)`` with ``H_AA = C C^H``.
    """
    HA = H[idx[:, :, None], idx[:, None, :]]
    HiA = Hinv[idx[:, :, None], idx[:, None, :]]
    C = np.linalg.cholesky(HA)
    M = np.conj(np.swapaxes(C, 1, 2)) @ HiA @ C
    return np.linalg.eigvalsh(M)[:, -1]


def _spectral_witness(basis, A):
    """Top generalized eigenvector: the x maximizing ||S_A x|| / ||x||."""
    A = list(A)
    H, Hinv = basis.gram, basis.gram_inv
    C = linalg.cholesky(H[np.ix_(A, A)], lower=True)
    M = C.conj().T @ Hinv[np.ix_(A, A)] @ C
    w, U = linalg.eigh(0.5 * (M + M.conj().T))
    x = Hinv[:, A] @ (C @ U[:, -1])
    x = x / np.max(np.abs(x))
    return math.sqrt(max(w[-1], 0.0)), x


def projection_norm(basis, A, trials=64, sweeps=5, seed=0):
    """Operator norm of the coordinate projection S_A.

    Exact (spectral) for Hilbert ambients.  Otherwise a lower bound from
    sampled vectors refined by coordinate ascent.
    """
    A = support_set(A, basis.dim)
    d = basis.dim
    if not A:
        return 0.0
    if len(A) == d:
        return 1.0
    if basis.kind == HILBERT:
        comp = tuple(sorted(set(range(d)) - set(A)))
        small = A if len(A) <= len(comp) else comp
        sq = _spectral_batch(basis.gram, basis.gram_inv, np.array([small]))[0]
        return math.sqrt(max(sq, 0.0))
    return general_projection_lower(basis, A, trials, sweeps, seed).ratio


def _ascend(basis, A, x, sweeps):
    """Coordinate ascent of ||S_A x|| / ||x|| over real coordinates."""
    x = x.astype(complex).copy()
    best = witness_ratio(basis, A, x)
    for _ in range(sweeps):
        before = best
        for j in range(basis.dim):
            scale = max(1.0, float(np.max(np.abs(x))))

            def f(t):
                y = x.copy()
                y[j] = t
                return -witness_ratio(basis, A, y) if np.any(y) else 0.0

            res = optimize.minimize_scalar(f, bounds=(-2 * scale, 2 * scale),
                                           method="bounded",
                                           options={"xatol": 1e-9 * scale})
            if -res.fun > best:
                x[j] = res.x
                best = -res.fun
        if best - before <= 1e-12 * best:
            break
    return x, best


def general_projection_lower(basis, A, trials=64, sweeps=5, seed=0):
    """Lower bound of ||S_A|| for any ambient, as a :class:`WitnessReport`."""
    A = support_set(A, basis.dim)
    d = basis.dim
    rng = np.random.default_rng(seed)
    inA = indicator(A, d).real
    starts = [inA - (1 - inA), inA + (1 - inA)]
    starts += [rng.standard_normal(d) for _ in range(trials)]
    scored = sorted(((witness_ratio(basis, A, s), i) for i, s in enumerate(starts)
                     if np.any(s)), reverse=True)
    best = None
    for _, i in scored[:3]:
        x, r = _ascend(basis, A, starts[i], sweeps)
        if best is None or r > best[1]:
            best = (x, r)
    x, r = best
    return WitnessReport(A, x, witness_ratio(basis, A, x), RANDOM,
                         {"exact": False})


# -- k_N ---------------------------------------------------------------------

def subset_count(d, N):
    return sum(math.comb(d, m) for m in range(1, min(N, d) + 1))


def _exact_search(basis, N, budget, pool=None):
    if basis.kind != HILBERT:
        raise ValidationError("exact k_N needs a Hilbert ambient space")
    pool = list(range(basis.dim)) if pool is None else list(pool)
    need = subset_count(len(pool), N)
    if need > budget:
        raise BudgetExceeded(
            f"{need} subsets exceed budget {budget}; use k_n_lower instead",
            required=need, budget=budget)
    H, Hinv = basis.gram, basis.gram_inv
    best, bestA = -1.0, ()
    for m in range(1, min(N, len(pool)) + 1):
        it = combinations(pool, m)
        while True:
            chunk = list(islice(it, _CHUNK))
            if not chunk:
                break
            vals = _spectral_batch(H, Hinv, np.array(chunk))
            i = int(np.argmax(vals))
            # strict improvement keeps the lexicographically first maximizer
            if vals[i] > best * (1 + 1e-12):
                best, bestA = float(vals[i]), tuple(chunk[i])
    return math.sqrt(max(best, 0.0)), bestA


def k_n_exact(basis, N, budget=200_000):
    """max ||S_A|| over all nonempty A with |A| <= N (every size enumerated)."""
    if N < 1:
        return 0.0
    return _exact_search(basis, N, budget)[0]


def _odd_block(basis, N):
    if not basis.meta.get("pair"):
        return None
    pairs = min(int(N), basis.dim // 2)
    if pairs < 1:
        return None
    return odd_block_witness(basis, pairs)


def odd_block_witness(basis, pairs):
    """A = "+" vectors of the first `pairs` pairs, x = sum of the first 2*pairs vectors."""
    if 2 * pairs > basis.dim:
        raise ValidationError("not enough basis vectors for the requested pairs")
    x = np.zeros(basis.dim, dtype=complex)
    x[: 2 * pairs] = 1.0
    A = tuple(range(0, 2 * pairs, 2))
    return WitnessReport(A, x, witness_ratio(basis, A, x), ODD, {"pairs": pairs})


def _random_search(basis, N, trials, rng, pool):
    pool = list(pool)
    best = None
    hilbert = basis.kind == HILBERT
    for _ in range(trials):
        m = int(rng.integers(1, min(N, len(pool)) + 1))
        A = tuple(sorted(int(i) for i in rng.choice(pool, size=m, replace=False)))
        if hilbert:
            if len(A) == basis.dim:
                continue
            r, x = _spectral_witness(basis, A)
            w = WitnessReport(A, x, witness_ratio(basis, A, x), RANDOM)
        else:
            w = general_projection_lower(basis, A, trials=8, sweeps=2,
                                         seed=int(rng.integers(2**32)))
        if best is None or w.ratio > best.ratio:
            best = w
    return best


def k_n_lower(basis, N, strategies=ALL_STRATEGIES, seed=0, trials=200,
              budget=50_000, sign_trials=512):
    """Best witness ratio for k_N over the applicable strategies.

    Strategies that do not apply to `basis` (wrong labels, non-Hilbert
    ambient, subset budget) are skipped.  ``exact`` is filled in when the
    exhaustive spectral search ran.
    """
    if not 1 <= N <= basis.dim:
        raise ValidationError(f"N must lie in [1, {basis.dim}]")
    rng = np.random.default_rng(seed)
    found = {}
    exact = None
    for s in strategies:
        w = None
        if s == EXACT and basis.kind == HILBERT and subset_count(basis.dim, N) <= budget:
            val, A = _exact_search(basis, N, budget)
            if len(A) < basis.dim:
                _, x = _spectral_witness(basis, A)
            else:
                x = np.ones(basis.dim, dtype=complex)
            w = WitnessReport(A, x, witness_ratio(basis, A, x), EXACT, {"exact": val})
            exact = val
        elif s == ODD:
            w = _odd_block(basis, N)
        elif s == SIGN:
            M = (N - 1) // 2
            if M >= 1 and _has_freqs(basis, M):
                w = sign_partition_witness(basis, M, sign_trials, int(rng.integers(2**32)))
        elif s == OLEVSKII:
            psi = basis.meta.get("olevskii")
            if psi is not None and N >= 2 and math.ceil(math.log2(N)) <= psi.layout.kmax:
                try:
                    w = knH_witness(psi, N, seed=int(rng.integers(2**32)))
                except (ValidationError, BudgetExceeded):
                    w = None
        elif s == RANDOM:
            w = _random_search(basis, N, trials if basis.kind == HILBERT else max(1, trials // 20),
                               rng, range(basis.dim))
        elif s not in ALL_STRATEGIES:
            raise ValidationError(f"unknown strategy {s!r}")
        if w is not None:
            found[s] = w
    if not found:
        e = np.zeros(basis.dim, dtype=complex)
        e[0] = 1.0
        found["trivial"] = WitnessReport((0,), e, 1.0, "trivial")
    best = max(found.values(), key=lambda w: w.ratio)
    return KnRow(N=N, lower=best.ratio, exact=exact, witness=best,
                 tried={k: v.ratio for k, v in found.items()})


# -- explicit witnesses ------------------------------------------------------

def _freq_index(basis):
    out = {}
    for i, lab in enumerate(basis.labels):
        if isinstance(lab, dict) and "freq" in lab:
            out[lab["freq"]] = i
    return out


def _has_freqs(basis, N):
    f = _freq_index(basis)
    return all(n in f for n in range(-N, N + 1))


def random_sign_norms(basis, N, trials=512, seed=0):
    """Norms of sum_{|n|<=N} eps_n e_n for random signs; returns (signs, norms)."""
    f = _freq_index(basis)
    if not _has_freqs(basis, N):
        raise ValidationError(f"basis frequencies do not cover |n| <= {N}")
    idx = [f[n] for n in range(-N, N + 1)]
    rng = np.random.default_rng(seed)
    eps = rng.choice([-1.0, 1.0], size=(len(idx), trials))
    V = np.zeros((basis.dim, trials))
    V[idx] = eps
    return idx, eps, basis.norms(V)


def _flip_descent(Hs, eps):
    """Single sign flips while they lower ``eps^T Hs eps`` (real symmetric Hs)."""
    e = eps.copy()
    g = Hs @ e
    diag = np.diag(Hs)
    for _ in range(64 * e.size):
        # flipping e_i changes the quadratic form by 4 (H_ii - e_i g_i)
        delta = diag - e * g
        i = int(np.argmin(delta))
        if delta[i] >= -1e-14 * diag[i]:
            break
        g -= 2.0 * e[i] * Hs[:, i]
        e[i] = -e[i]
    return e


def sign_partition_witness(basis, N, trials=512, seed=0, descent=True):
    """Khintchine-style witness on a trigonometric basis.

    Draws random sign vectors eps on |n| <= N and keeps the one of least
    norm; with `descent` (real Hilbert Gram only) each draw is first pushed
    to a local minimum by single sign flips.  The frequencies are split into
    A+ and A- by sign and A is whichever half has the larger
    ``||sum_{n in A} e_n||``.  The witness vector is the signed sum, so the
    ratio is ``||sum_A e_n|| / ||sum_A e_n - sum_B e_n||``.
    """
    idx, eps, norms = random_sign_norms(basis, N, trials, seed)
    if descent and basis.kind == HILBERT and not np.iscomplexobj(basis.gram):
        Hs = basis.gram[np.ix_(idx, idx)]
        eps = np.stack([_flip_descent(Hs, eps[:, j]) for j in range(eps.shape[1])], axis=1)
        norms = np.sqrt(np.maximum(np.einsum("ij,ik,kj->j", eps, Hs, eps), 0.0))
    j = int(np.argmin(norms))
    x = np.zeros(basis.dim, dtype=complex)
    x[idx] = eps[:, j]
    plus = tuple(sorted(i for i, s in zip(idx, eps[:, j]) if s > 0))
    minus = tuple(sorted(i for i, s in zip(idx, eps[:, j]) if s < 0))
    cand = [A for A in (plus, minus) if A]
    sums = [basis.norm(indicator(A, basis.dim)) for A in cand]
    A = cand[int(np.argmax(sums))]
    full = basis.norm(indicator(idx, basis.dim))
    info = {"min_norm": float(norms[j]), "full_norm": full,
            "mean_sq": float(np.mean(norms ** 2)), "half_norm": max(sums)}
    return WitnessReport(A, x, witness_ratio(basis, A, x), SIGN, info)


@dataclass
class DemocracyRow:
    N: int
    sup: float
    inf: float
    count: int


def _structured_sets(basis, N):
    d = basis.dim
    yield tuple(range(N))
    yield tuple(range(d - N, d))
    labels = basis.labels
    if labels and all(isinstance(l, tuple) and len(l) == 2 and isinstance(l[0], int)
                      for l in labels):
        blocks = {}
        for i, l in enumerate(labels):
            blocks.setdefault(l[0], []).append(i)
        # one block (prefix of it) and greedy unions of whole blocks
        for members in blocks.values():
            if len(members) >= N:
                yield tuple(members[:N])
        acc = []
        for members in blocks.values():
            take = members[: N - len(acc)]
            acc += take
            if len(acc) == N:
                yield tuple(acc)
                break


def democracy_profile(basis, sizes, trials=100, seed=0):
    """Largest and smallest ``||sum_{j in L} b_j||`` over sampled sets of each size."""
    rng = np.random.default_rng(seed)
    d = basis.dim
    rows = []
    for N in sizes:
        N = int(N)
        if not 1 <= N <= d:
            raise ValidationError(f"size {N} outside [1, {d}]")
        sets = list(_structured_sets(basis, N))
        sets += [tuple(rng.choice(d, size=N, replace=False)) for _ in range(trials)]
        V = np.zeros((d, len(sets)))
        for j, A in enumerate(sets):
            V[list(A), j] = 1.0
        n = basis.norms(V)
        rows.append(DemocracyRow(N, float(n.max()), float(n.min()), len(sets)))
    return rows


def knH_witness(psi, M, strategies=(EXACT, ODD, RANDOM), seed=0, budget=50_000):
    """Lift an inner-basis witness to the Olevskii basis.

    With ``N = ceil(log2 M)`` a witness (A, x) is sought among the first N
    inner vectors; Lambda is the union of the Psi-blocks k in A and x is
    lifted through ``x_k = 2^(-k/2) sum_l psi_{k,l}``.
    """
    if M < 2:
        raise ValidationError("M must be >= 2")
    N = max(1, math.ceil(math.log2(M)))
    layout = psi.layout
    if N > layout.kmax:
        raise ValidationError(f"need blocks up to {N}, basis has kmax={layout.kmax}")
    inner = psi.inner.section(N)
    inner.meta = {k: v for k, v in inner.meta.items() if k != "olevskii"}
    row = k_n_lower(inner, N, strategies=strategies, seed=seed, budget=budget)
    iw = row.witness
    c = np.zeros(psi.psi.dim, dtype=complex)
    Lam = []
    for k in range(1, N + 1):
        sl = layout.block_slice(k)
        c[sl] = iw.x[k - 1] * 2.0 ** (-k / 2)
        if (k - 1) in iw.A:
            Lam.extend(range(sl.start, sl.stop))
    Lam = tuple(Lam)
    info = {"M": int(M), "N": N, "inner_ratio": iw.ratio, "inner_method": iw.method,
            "inner_A": iw.A, "size": len(Lam)}
    return WitnessReport(Lam, c, witness_ratio(psi.psi, Lam, c), OLEVSKII, info)
