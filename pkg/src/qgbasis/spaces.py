"""Concrete normed spaces and basis handles.

Every constructed basis is a :class:`BasisInstance`: an ambient space over
reference coordinates plus a matrix whose column ``j`` holds basis vector
``b_j`` in those coordinates.  Norms of a coefficient vector ``c`` are
ambient norms of ``B @ c``.
"""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import linalg

from .core import GENERAL, HILBERT, as_coeffs
from .errors import ValidationError
from .weights import fourier_coeffs_weight

HERMITIAN_TOL = 1e-12
NORMALIZATION_TOL = 1e-9


def _columns(V, dim):
    V = np.asarray(V)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != dim:
        raise ValidationError(f"expected {dim} rows, got {V.shape[0]}")
    return V


class GramSpace:
    """Hilbert space C^d with inner product defined by a Hermitian PD matrix.

    ``inner(u, v) = v^H G u`` (linear in the first argument).
    """

    kind = HILBERT

    def __init__(self, G):
        G = np.array(G)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValidationError(f"Gram matrix must be square, got {G.shape}")
        if not np.all(np.isfinite(G)):
            raise ValidationError("Gram matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(G))))
        if np.max(np.abs(G - G.conj().T)) > HERMITIAN_TOL * scale:
            raise ValidationError("Gram matrix is not Hermitian")
        G = 0.5 * (G + G.conj().T)
        if np.isrealobj(G) or not np.any(G.imag):
            G = G.real.copy()
        try:
            L = linalg.cholesky(G, lower=True)
        except linalg.LinAlgError:
            raise ValidationError("Gram matrix is not positive definite") from None
        self.G = G
        self.dim = G.shape[0]
        self.chol = L
        self.G.setflags(write=False)
        self.chol.setflags(write=False)

    @cached_property
    def chol_inv(self):
        return linalg.solve_triangular(self.chol, np.eye(self.dim), lower=True)

    @cached_property
    def condition_estimate(self):
        w = np.linalg.eigvalsh(self.G)
        return float(w[-1] / w[0])

    def norms(self, V):
        V = _columns(V, self.dim)
        return np.linalg.norm(self.chol.conj().T @ V, axis=0)

    def norm(self, v):
        return float(self.norms(v)[0])

    def inner(self, u, v):
        u = as_coeffs(u, self.dim)
        v = as_coeffs(v, self.dim)
        return complex(v.conj() @ (self.G @ u))

    def __repr__(self):
        return f"GramSpace(dim={self.dim})"


class SequenceSpace:
    """Finite section of l^p; ``p = inf`` is the sup norm standing in for c_0."""

    kind = GENERAL

    def __init__(self, p, dim):
        p = float(p)
        if not p >= 1:
            raise ValidationError(f"p must be >= 1, got {p}")
        if dim < 1:
            raise ValidationError("dimension must be positive")
        self.p = p
        self.dim = int(dim)
        if p == 2:
            self.kind = HILBERT

    def norms(self, V):
        V = _columns(V, self.dim)
        return np.linalg.norm(V, ord=self.p, axis=0)

    def norm(self, v):
        return float(self.norms(v)[0])

    def inner(self, u, v):
        if self.kind != HILBERT:
            raise ValidationError(f"l^{self.p} has no inner product")
        return complex(np.vdot(as_coeffs(v, self.dim), as_coeffs(u, self.dim)))

    def __repr__(self):
        return f"SequenceSpace(p={self.p}, dim={self.dim})"


class DirectSum:
    """l^2 direct sum: ``||(v_1, ..., v_m)||^2 = sum ||v_i||_i^2``."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValidationError("direct sum needs at least one part")
        self.parts = parts
        offsets = np.cumsum([0] + [p.dim for p in parts])
        self.ranges = [range(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]
        self.dim = int(offsets[-1])
        self.kind = HILBERT if all(p.kind == HILBERT for p in parts) else GENERAL

    def norms(self, V):
        V = _columns(V, self.dim)
        sq = sum(p.norms(V[r.start:r.stop]) ** 2 for p, r in zip(self.parts, self.ranges))
        return np.sqrt(sq)

    def norm(self, v):
        return float(self.norms(v)[0])

    def inner(self, u, v):
        if self.kind != HILBERT:
            raise ValidationError("direct sum has a non-Hilbert part")
        u = as_coeffs(u, self.dim)
        v = as_coeffs(v, self.dim)
        return sum(p.inner(u[r.start:r.stop], v[r.start:r.stop])
                   for p, r in zip(self.parts, self.ranges))

    def __repr__(self):
        return f"DirectSum({self.parts!r})"


def direct_sum(parts):
    """l^2-combination of spaces.  Gram spaces combine into a block-diagonal
    GramSpace; anything else gives a :class:`DirectSum`."""
    parts = list(parts)
    if not parts:
        raise ValidationError("direct sum needs at least one part")
    if all(isinstance(p, GramSpace) for p in parts):
        return GramSpace(linalg.block_diag(*[p.G for p in parts]))
    return DirectSum(parts)


def gram_of(space):
    """Gram matrix of a Hilbert space in its own coordinates."""
    if isinstance(space, GramSpace):
        return space.G
    if isinstance(space, SequenceSpace) and space.kind == HILBERT:
        return np.eye(space.dim)
    if isinstance(space, DirectSum) and space.kind == HILBERT:
        return linalg.block_diag(*[gram_of(p) for p in space.parts])
    raise ValidationError(f"{space!r} is not a Hilbert space")


@dataclass(eq=False)
class BasisInstance:
    """A (finite) basis: column ``j`` of `B` is ``b_j`` in ambient coordinates.

    `B` may be rectangular when the basis spans a subspace of the ambient
    section; it must have full column rank.
    """

    ambient: object
    B: np.ndarray
    labels: tuple
    name: str = ""
    normalized: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        B = np.asarray(self.B)
        if B.ndim != 2 or B.shape[0] != self.ambient.dim:
            raise ValidationError(
                f"basis matrix shape {B.shape} incompatible with ambient dim {self.ambient.dim}")
        if B.shape[1] > B.shape[0]:
            raise ValidationError("more basis vectors than ambient dimension")
        if np.iscomplexobj(B) and not np.any(B.imag):
            B = B.real
        B = B.copy()
        B.setflags(write=False)
        self.B = B
        self.labels = tuple(self.labels) if self.labels is not None else tuple(range(B.shape[1]))
        if len(self.labels) != B.shape[1]:
            raise ValidationError("one label per basis vector required")
        if self.normalized:
            n = self.ambient.norms(B)
            bad = np.flatnonzero(np.abs(n - 1.0) > NORMALIZATION_TOL)
            if bad.size:
                raise ValidationError(f"basis vector {bad[0]} has norm {n[bad[0]]!r}, expected 1")
        if self.kind == HILBERT:
            try:
                self.gram_chol
            except linalg.LinAlgError:
                raise ValidationError("basis vectors are linearly dependent") from None
        else:
            s = np.linalg.svd(B, compute_uv=False)
            if s[-1] <= 1e-12 * s[0]:
                raise ValidationError("basis vectors are linearly dependent")

    @property
    def dim(self):
        return self.B.shape[1]

    @property
    def kind(self):
        return self.ambient.kind

    # Hilbert-only quantities
    @cached_property
    def factor(self):
        """F with ``||c|| = ||F c||_2``."""
        return self.ambient_factor @ self.B

    @cached_property
    def ambient_factor(self):
        if isinstance(self.ambient, GramSpace):
            return self.ambient.chol.conj().T
        G = gram_of(self.ambient)
        return linalg.cholesky(G, lower=True).conj().T

    @cached_property
    def gram(self):
        F = self.factor
        H = F.conj().T @ F
        H = 0.5 * (H + H.conj().T)
        H.setflags(write=False)
        return H

    @cached_property
    def gram_chol(self):
        return linalg.cholesky(self.gram, lower=True)

    @cached_property
    def gram_inv(self):
        Li = linalg.solve_triangular(self.gram_chol, np.eye(self.dim), lower=True)
        Hi = Li.conj().T @ Li
        return 0.5 * (Hi + Hi.conj().T)

    def vectors(self, C):
        """Ambient coordinates of coefficient columns."""
        return self.B @ _columns(C, self.dim)

    def norms(self, C):
        C = _columns(C, self.dim)
        if self.kind == HILBERT:
            return np.linalg.norm(self.factor @ C, axis=0)
        return self.ambient.norms(self.B @ C)

    def norm(self, c):
        return float(self.norms(as_coeffs(c, self.dim))[0])

    def inner(self, u, v):
        if self.kind != HILBERT:
            raise ValidationError("inner product needs a Hilbert ambient space")
        u = as_coeffs(u, self.dim)
        v = as_coeffs(v, self.dim)
        return complex(v.conj() @ (self.gram @ u))

    def section(self, n):
        """The first `n` basis vectors as a basis of their span."""
        if not 1 <= n <= self.dim:
            raise ValidationError(f"section size {n} outside [1, {self.dim}]")
        return BasisInstance(self.ambient, self.B[:, :n], self.labels[:n],
                             name=f"{self.name}[:{n}]", normalized=self.normalized,
                             meta=dict(self.meta))

    def __repr__(self):
        return f"BasisInstance({self.name!r}, dim={self.dim}, kind={self.kind})"


def canonical_basis(space, name="canonical"):
    """Unit vectors of the reference coordinates."""
    eye = np.eye(space.dim)
    unit = bool(np.all(np.abs(space.norms(eye) - 1.0) <= NORMALIZATION_TOL))
    return BasisInstance(space, eye, tuple(range(space.dim)), name=name, normalized=unit)


def gram_basis(G, name="gram"):
    """Basis whose Gram matrix is `G` (unit vectors in a GramSpace)."""
    space = GramSpace(G)
    diag = np.real(np.diag(space.G))
    normalized = bool(np.all(np.abs(diag - 1.0) <= NORMALIZATION_TOL))
    return BasisInstance(space, np.eye(space.dim), tuple(range(space.dim)), name=name,
                         normalized=normalized)


def trig_frequencies(count):
    """First `count` frequencies of the trigonometric system in its standard
    enumeration 0, 1, -1, 2, -2, ..."""
    out = [0]
    j = 1
    while len(out) < count:
        out.append(j)
        if len(out) < count:
            out.append(-j)
        j += 1
    return out[:count]


def weighted_trig_basis(gamma, maxfreq=None, count=None):
    """Normalized trigonometric system in L^2([-pi, pi], |t|^(-gamma) dt).

    Indexing follows :func:`trig_frequencies`; either all ``|n| <= maxfreq``
    (``2*maxfreq + 1`` elements) or the first `count` elements.  The ambient
    Gram matrix is Toeplitz in the frequencies, ``G[l, m] = w_hat(m - l)``;
    normalization divides every vector by ``sqrt(w_hat(0))``.
    """
    if count is None:
        if maxfreq is None or maxfreq < 0:
            raise ValidationError("maxfreq must be a nonnegative integer")
        count = 2 * int(maxfreq) + 1
    if count < 1:
        raise ValidationError("need at least one frequency")
    freqs = np.array(trig_frequencies(count))
    span = int(freqs.max() - freqs.min())
    w = fourier_coeffs_weight(gamma, span)
    G = w[np.abs(freqs[:, None] - freqs[None, :])]
    space = GramSpace(G)
    scale = 1.0 / math.sqrt(w[0])
    B = scale * np.eye(count)
    labels = tuple({"freq": int(n)} for n in freqs)
    meta = {"gamma": float(gamma), "w0": float(w[0]), "normalization": scale}
    return BasisInstance(space, B, labels, name=f"trig(gamma={gamma:g})", meta=meta)


def gram_from_weighted_trig(alpha, maxfreq):
    """Babenko system: trigonometric basis of L^2(|t|^(-2 alpha) dt), |n| <= maxfreq.

    Returns the ambient GramSpace and the normalized basis.
    """
    if not abs(alpha) < 0.5:
        raise ValidationError(f"|alpha| must be < 1/2, got {alpha}")
    basis = weighted_trig_basis(2.0 * alpha, maxfreq=maxfreq)
    basis.name = f"babenko(alpha={alpha:g})"
    basis.meta["alpha"] = float(alpha)
    return basis.ambient, basis


def rotated_pair_basis(E, F, name=None):
    """Interleave two bases by 45-degree rotations.

    ``x_{2k-1} = (e_k + f_k)/sqrt(2)``, ``x_{2k} = (e_k - f_k)/sqrt(2)`` in the
    l^2 direct sum of the two ambient spaces.  In 0-based storage column
    ``2j`` is the "+" vector and ``2j+1`` the "-" vector of pair ``j``.
    """
    if E.dim != F.dim:
        raise ValidationError(f"dimension mismatch: {E.dim} vs {F.dim}")
    n = E.dim
    ambient = direct_sum([E.ambient, F.ambient])
    R = np.zeros((2 * n, 2 * n))
    s = 1.0 / math.sqrt(2.0)
    j = np.arange(n)
    R[j, 2 * j] = s
    R[j, 2 * j + 1] = s
    R[n + j, 2 * j] = s
    R[n + j, 2 * j + 1] = -s
    B = linalg.block_diag(E.B, F.B) @ R
    labels = tuple((k + 1, sign) for k in range(n) for sign in ("+", "-"))
    meta = {"pair": True, "E": E, "F": F}
    return BasisInstance(ambient, B, labels, name=name or f"pair({E.name},{F.name})",
                         normalized=E.normalized and F.normalized, meta=meta)


def dirichlet_weighted_norm(N, gamma):
    """||D_N||_{L^2(|t|^gamma dt)} for D_N = sum_{|n|<=N} e^{int}.

    Evaluated through the Toeplitz Gram form
    ``||D_N||^2 = sum_{|k|<=2N} (2N+1-|k|) w_hat(k)`` with the weight exponent
    passed as ``-gamma``.
    """
    N = int(N)
    if N < 0:
        raise ValidationError("N must be nonnegative")
    w = fourier_coeffs_weight(-gamma, 2 * N)
    k = np.arange(1, 2 * N + 1)
    sq = (2 * N + 1) * w[0] + 2.0 * np.sum((2 * N + 1 - k) * w[1:])
    return math.sqrt(sq)
