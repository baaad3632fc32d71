"""Coefficient vectors, support sets and the normed-space contract.

A vector is always stored by its coefficients with respect to some basis, as
a one dimensional complex numpy array.  Everything here is pure.
"""
from typing import Iterable, Protocol

import numpy as np

from .errors import ValidationError

HILBERT = "hilbert"
GENERAL = "general"


def as_coeffs(v, dim=None):
    """Return `v` as a 1-d complex array, checking finiteness and length."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise ValidationError(f"coefficient vector must be 1-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("coefficient vector has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise ValidationError(f"expected {dim} coefficients, got {arr.shape[0]}")
    return arr


def support_set(indices: Iterable[int], dim=None) -> tuple:
    """Normalize an index collection into a sorted tuple without duplicates."""
    out = tuple(sorted({int(i) for i in indices}))
    if out and out[0] < 0:
        raise ValidationError(f"negative index {out[0]} in support set")
    if dim is not None and out and out[-1] >= dim:
        raise ValidationError(f"index {out[-1]} out of range for dimension {dim}")
    return out


def support(v, tol=0.0) -> tuple:
    """Indices whose coefficient modulus exceeds `tol`."""
    if tol < 0:
        raise ValidationError("tol must be nonnegative")
    v = as_coeffs(v)
    return tuple(int(i) for i in np.flatnonzero(np.abs(v) > tol))


def restrict(v, A) -> np.ndarray:
    """Coordinate projection: keep the entries indexed by `A`, zero the rest."""
    v = as_coeffs(v)
    A = support_set(A, v.shape[0])
    out = np.zeros_like(v)
    idx = list(A)
    out[idx] = v[idx]
    return out


def indicator(A, dim) -> np.ndarray:
    """The vector sum of the basis elements indexed by `A`."""
    A = support_set(A, dim)
    out = np.zeros(dim, dtype=complex)
    out[list(A)] = 1.0
    return out


def dominates(x, y, tol=0.0) -> bool:
    """True when x and y have disjoint supports and every nonzero coefficient
    of x is at least as large in modulus as every coefficient of y."""
    x = as_coeffs(x)
    y = as_coeffs(y, x.shape[0])
    sx, sy = support(x, tol), support(y, tol)
    if set(sx) & set(sy):
        return False
    if not sx or not sy:
        return True
    return bool(np.min(np.abs(x[list(sx)])) >= np.max(np.abs(y[list(sy)])))


class Space(Protocol):
    """Normed space on coefficient arrays of length `dim`.

    `norms` evaluates column-wise on a ``(dim, m)`` array.  `inner` exists
    only when ``kind == "hilbert"``.
    """

    dim: int
    kind: str

    def norm(self, v) -> float: ...

    def norms(self, V) -> np.ndarray: ...
