"""Closed-form constants and inequalities for quasi-greedy bases.

All functions are pure; K denotes the quasi-greedy constant, kappa its
two-sided L^p analogue, delta the pair-inequality constant derived from K.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .core import HILBERT, dominates
from .errors import NumericalError, ValidationError


@dataclass
class ExponentReport:
    inputs: dict
    delta: float | None
    alpha: float
    branch: str
    extras: dict = field(default_factory=dict)


def delta_of_K(K):
    """sqrt(1 - 1/K^2)."""
    if not K >= 1:
        raise ValidationError(f"quasi-greedy constant must be >= 1, got {K}")
    if math.isinf(K):
        return 1.0
    return math.sqrt(1.0 - 1.0 / (K * K))


def alpha_branches(delta):
    """The two candidate exponents and the besselian one for a given delta."""
    if not 0 <= delta < 1:
        raise ValidationError(f"delta must lie in [0, 1), got {delta}")
    first = 0.5 * math.log2((1 + delta) / (1 - delta))
    second = 0.5 * (1 + math.log2(1 + delta))
    bess = 0.5 * math.log2(1 + delta)
    return first, second, bess


def alpha_of_K(K):
    """Exponent alpha(K) < 1 with k_N = O((log N)^alpha) for quasi-greedy
    bases of Hilbert spaces; the smaller of the two branches is returned.

    ``extras["gap"]`` is ``1 - alpha`` evaluated without cancellation (for
    huge K the second branch is within rounding of 1).
    """
    delta = delta_of_K(K)
    if math.isinf(K):
        raise ValidationError("alpha(K) needs a finite K")
    # 1 - delta = K^-2 / (1 + delta) stays exact where delta rounds to 1
    comp = (1.0 / K) ** 2 / (1.0 + delta)
    first = 0.5 * math.log2((1 + delta) / comp)
    second = 0.5 * (1 + math.log2(1 + delta))
    bess = 0.5 * math.log2(1 + delta)
    branch = "first" if first <= second else "second"
    if branch == "first":
        gap = 1 - first
    else:
        gap = -math.log1p(-comp / 2) / (2 * math.log(2))
    return ExponentReport(inputs={"K": K}, delta=delta, alpha=min(first, second),
                          branch=branch,
                          extras={"first": first, "second": second, "besselian": bess,
                                  "gap": gap})


@dataclass
class PairResiduals:
    lower_slack: float
    upper_slack: float
    r: float


def _pair_norms(space, x, y):
    if space.kind != HILBERT:
        raise ValidationError("pair inequality needs a Hilbert space")
    nx = space.norm(x) ** 2
    ny = space.norm(y) ** 2
    nxy = space.norm(np.asarray(x) + np.asarray(y)) ** 2
    ip = space.inner(x, y)
    return nx, ny, nxy, ip


def pair_inequality_check(space, x, y, delta, tol=0.0):
    """Slacks of ``(1-d)(|x|^2+|y|^2) <= |x+y|^2 <= (1+d)(|x|^2+|y|^2)``.

    Also returns ``r = 2|<x,y>| / (|x|^2 + |y|^2)``.
    """
    if not dominates(x, y, tol):
        raise ValidationError("pair must satisfy x >= y (disjoint supports, ordered moduli)")
    nx, ny, nxy, ip = _pair_norms(space, x, y)
    s = nx + ny
    r = 2 * abs(ip) / s if s > 0 else 0.0
    return PairResiduals(lower_slack=nxy - (1 - delta) * s,
                         upper_slack=(1 + delta) * s - nxy, r=r)


def infer_K_lower_from_pairs(space, pairs, tol=0.0):
    """Largest ``(1 - r^2)^(-1/2)`` over dominated pairs; returns (K, pair)."""
    best, arg = 1.0, None
    for x, y in pairs:
        if not dominates(x, y, tol):
            raise ValidationError("every pair must satisfy x >= y")
        nx, ny, _, ip = _pair_norms(space, x, y)
        s = nx + ny
        if s == 0:
            continue
        r = 2 * abs(ip) / s
        if r >= 1:
            raise NumericalError(f"pair correlation r={r} >= 1 is impossible in an inner-product space")
        K = 1.0 / math.sqrt(1.0 - r * r)
        if K > best:
            best, arg = K, (x, y)
    return best, arg


def lemma_L2_envelope(normsSq, delta):
    """(1 -+ delta)^ceil(log2 m) * sum of squared norms, for a chain of m vectors."""
    normsSq = list(normsSq)
    m = len(normsSq)
    if m < 1:
        raise ValidationError("need at least one vector")
    if not 0 <= delta < 1:
        raise ValidationError("delta must lie in [0, 1)")
    e = math.ceil(math.log2(m)) if m > 1 else 0
    s = float(sum(normsSq))
    return (1 - delta) ** e * s, (1 + delta) ** e * s


@dataclass
class EnvelopeCheck:
    actual: float
    lower: float
    upper: float

    @property
    def inside(self):
        eps = 1e-12 * max(1.0, self.upper)
        return self.lower - eps <= self.actual <= self.upper + eps


def chain_envelope_check(space, chain, delta, tol=0.0):
    """Evaluate ``|x_1 + ... + x_m|^2`` for a chain x_1 >= ... >= x_m."""
    chain = [np.asarray(c) for c in chain]
    for a, b in zip(chain, chain[1:]):
        if not dominates(a, b, tol):
            raise ValidationError("chain is not ordered by >=")
    lo, hi = lemma_L2_envelope([space.norm(c) ** 2 for c in chain], delta)
    return EnvelopeCheck(space.norm(sum(chain)) ** 2, lo, hi)


def _check_p(p):
    if not 1 < p < math.inf:
        raise ValidationError(f"p must lie in (1, inf), got {p}")


def c_p_branches(p, kappa):
    """Both formulas where they apply: (i) for p <= 2, (ii) for p >= 2."""
    _check_p(p)
    if kappa < 1:
        raise ValidationError("kappa must be >= 1")
    out = {}
    if p <= 2:
        out["i"] = 2 - (p - 1) / (2 * kappa ** 2)
    if p >= 2:
        out["ii"] = 2 ** (p - 1) - 1 / (2 * kappa ** p)
    return out


def c_p_const(p, kappa):
    b = c_p_branches(p, kappa)
    return b["i"] if "i" in b else b["ii"]


def alpha_p(p, kappa):
    """alpha(kappa, p) = (1 + log2 c_p)/2 for p <= 2, (1 + log2 c_p)/p for p >= 2.

    For large p and kappa the exponent is within rounding of 1, so the gap
    ``1 - alpha`` is evaluated separately with log1p and kept in ``extras``.
    """
    c = c_p_const(p, kappa)
    if p <= 2:
        gap = -math.log1p(-(p - 1) / (4 * kappa ** 2)) / (2 * math.log(2))
        branch = "p-case-i"
    else:
        gap = -math.log1p(-(2 * kappa) ** (-p)) / (p * math.log(2))
        branch = "p-case-ii"
    if not gap > 0:
        raise NumericalError(f"alpha_p is not < 1 for p={p}, kappa={kappa}")
    return ExponentReport(inputs={"p": p, "kappa": kappa}, delta=None, alpha=1.0 - gap,
                          branch=branch, extras={"c_p": c, "gap": gap})


def weak_parallelogram_check(p, x, y, space=None, branch=None):
    """Slack of the weak parallelogram law in l^p (negative means violated).

    Branch 1 (1 < p <= 2): ``2(|x|^2+|y|^2) - |x+y|^2 - (p-1)|x-y|^2``.
    Branch 2 (p >= 2): ``2^(p-1)(|x|^p+|y|^p) - |x+y|^p - |x-y|^p``.
    """
    _check_p(p)
    if branch is None:
        branch = 1 if p <= 2 else 2
    if (branch == 1 and p > 2) or (branch == 2 and p < 2):
        raise ValidationError(f"branch {branch} does not apply at p={p}")
    if space is not None and getattr(space, "p", p) != p:
        raise ValidationError(f"space is l^{space.p}, not l^{p}")
    x = np.asarray(x)
    y = np.asarray(y)
    nx, ny, np_, nm = np.linalg.norm(np.stack([x, y, x + y, x - y], axis=1), ord=p, axis=0)
    if branch == 1:
        return float(2 * (nx ** 2 + ny ** 2) - np_ ** 2 - (p - 1) * nm ** 2)
    return float(2 ** (p - 1) * (nx ** p + ny ** p) - np_ ** p - nm ** p)
