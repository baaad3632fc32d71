"""Olevskii-type block construction of a quasi-greedy basis over X (+) l^2.

Conventions: levels ``k`` run from 1 to ``kmax`` and block ``k`` has
``2^k`` vectors indexed by ``l = 0 .. 2^k - 1``.  The l^2 vectors
``e_1, e_2, ...`` are stored 0-based, so ``e_j`` is l^2 coordinate ``j - 1``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .core import HILBERT, as_coeffs, indicator
from .errors import ValidationError
from .spaces import BasisInstance, GramSpace, SequenceSpace, direct_sum

MAX_LEVEL = 20


def haar_matrix(k):
    """Orthogonal 2^k x 2^k matrix whose columns are discrete Haar vectors.

    Column 0 is constant ``2^(-k/2)``; column ``2^p + q`` is supported on
    ``[q 2^(k-p), (q+1) 2^(k-p))`` with value ``+2^((p-k)/2)`` on the first
    half and the negative on the second.
    """
    if not 1 <= k <= MAX_LEVEL:
        raise ValidationError(f"level k must lie in [1, {MAX_LEVEL}], got {k}")
    n = 1 << k
    H = np.zeros((n, n))
    H[:, 0] = 2.0 ** (-k / 2)
    for p in range(k):
        width = n >> p
        amp = 2.0 ** ((p - k) / 2)
        for q in range(1 << p):
            col = (1 << p) + q
            start = q * width
            H[start:start + width // 2, col] = amp
            H[start + width // 2:start + width, col] = -amp
    return H


@dataclass(frozen=True)
class BlockLayout:
    """Index bookkeeping: n_1 = 0, n_2 = 1, n_{k+1} = n_k + 2^k - 1."""

    kmax: int
    n: tuple  # n[k] for k = 1 .. kmax + 1; n[0] unused

    def block_size(self, k):
        return self.n[k + 1] - self.n[k] + 1

    def block_slice(self, k):
        if not 1 <= k <= self.kmax:
            raise ValidationError(f"block {k} outside [1, {self.kmax}]")
        start = (1 << k) - 2
        return slice(start, start + (1 << k))

    def psi_index(self, k, l):
        sl = self.block_slice(k)
        if not 0 <= l < (1 << k):
            raise ValidationError(f"l={l} outside block {k}")
        return sl.start + l

    def from_psi_index(self, i):
        k = int(math.floor(math.log2(i + 2)))
        return k, i - ((1 << k) - 2)

    def e_coordinates(self, k):
        """0-based l^2 coordinates of e_{n_k + 1} .. e_{n_{k+1}}."""
        return list(range(self.n[k], self.n[k + 1]))

    @property
    def l2_dim(self):
        return self.n[self.kmax + 1]

    @property
    def dim(self):
        return self.kmax + self.l2_dim


def block_layout(kmax):
    if kmax < 1:
        raise ValidationError("kmax must be >= 1")
    n = [0, 0, 1]
    for k in range(2, kmax + 1):
        n.append(n[k] + (1 << k) - 1)
    return BlockLayout(kmax=int(kmax), n=tuple(n[: kmax + 2]))


@dataclass(eq=False)
class OlevskiiBasis:
    inner: BasisInstance
    layout: BlockLayout
    psi: BasisInstance
    haar: dict

    @property
    def dim(self):
        return self.psi.dim

    @property
    def inner_rows(self):
        """Ambient rows belonging to X (the remaining rows are l^2)."""
        return slice(0, self.inner.ambient.dim)

    @property
    def l2_rows(self):
        return slice(self.inner.ambient.dim, self.psi.ambient.dim)


def olevskii_basis(inner, kmax):
    """Rotate each block {x_k, e_{n_k+1}, ..., e_{n_{k+1}}} by the Haar matrix.

    ``(psi_{k,1..2^k})^T = A^(k) (g_{k,1..2^k})^T``, so every psi_{k,l} has
    x_k-coefficient ``2^(-k/2)`` and ``sum_l psi_{k,l} = 2^(k/2) x_k``.
    """
    layout = block_layout(kmax)
    if inner.dim < kmax:
        raise ValidationError(f"inner basis has {inner.dim} vectors, need kmax={kmax}")
    nx = inner.ambient.dim
    nl = layout.l2_dim
    l2 = GramSpace(np.eye(nl)) if inner.kind == HILBERT else SequenceSpace(2, nl)
    ambient = direct_sum([inner.ambient, l2])
    B = np.zeros((nx + nl, layout.dim), dtype=np.result_type(inner.B, float))
    haar = {}
    labels = []
    for k in range(1, kmax + 1):
        A = haar_matrix(k)
        haar[k] = A
        G = np.zeros((nx + nl, 1 << k), dtype=B.dtype)
        G[:nx, 0] = inner.B[:, k - 1]
        for m, j in enumerate(layout.e_coordinates(k), start=1):
            G[nx + j, m] = 1.0
        B[:, layout.block_slice(k)] = G @ A.T
        labels += [(k, l) for l in range(1 << k)]
    psi = BasisInstance(ambient, B, tuple(labels), name=f"olevskii({inner.name},kmax={kmax})",
                        normalized=inner.normalized)
    out = OlevskiiBasis(inner=inner, layout=layout, psi=psi, haar=haar)
    psi.meta["olevskii"] = out
    return out


def project_components(psi, v):
    """Split Psi-coefficients into the x-part and the l^2-part.

    Returns ``(lam, eta)``: ``lam[k-1] = 2^(-k/2) sum_l c_{k,l}`` and
    ``eta_{k,l} = c_{k,l} - 2^(-k) sum_l' c_{k,l'}`` (stored in Psi order),
    so that ``c_{k,l} = 2^(-k/2) lam_k + eta_{k,l}``.
    """
    c = as_coeffs(v, psi.dim)
    lay = psi.layout
    lam = np.zeros(lay.kmax, dtype=complex)
    eta = np.zeros_like(c)
    for k in range(1, lay.kmax + 1):
        sl = lay.block_slice(k)
        s = c[sl].sum()
        lam[k - 1] = 2.0 ** (-k / 2) * s
        eta[sl] = c[sl] - 2.0 ** (-k) * s
    return lam, eta


def reconstruct(psi, lam, eta):
    lay = psi.layout
    c = np.array(eta, dtype=complex)
    for k in range(1, lay.kmax + 1):
        c[lay.block_slice(k)] += 2.0 ** (-k / 2) * lam[k - 1]
    return c


def verify_bonek(psi, k, Lambda_k):
    """Compare ``||P_H 1_{Lambda_k}||^2`` with ``|Lambda_k| (1 - 2^-k |Lambda_k|)``.

    `Lambda_k` holds positions l inside block k.  The left side is the squared
    l^2-part of ``sum_{l in Lambda_k} psi_{k,l}``.
    """
    lay = psi.layout
    sl = lay.block_slice(k)
    L = sorted({int(l) for l in Lambda_k})
    if L and (L[0] < 0 or L[-1] >= (1 << k)):
        raise ValidationError(f"Lambda_k must lie in block {k}")
    idx = [sl.start + l for l in L]
    vec = psi.psi.B @ indicator(idx, psi.dim)
    lhs = float(np.sum(np.abs(vec[psi.l2_rows]) ** 2))
    n = len(L)
    rhs = n * (1.0 - 2.0 ** (-k) * n)
    return lhs, rhs
