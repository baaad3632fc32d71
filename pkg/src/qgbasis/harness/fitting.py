"""Least-squares growth-law fits on log-transformed data."""
from dataclasses import dataclass
import math

import numpy as np

from ..errors import ValidationError

POWER = "power"
POLYLOG = "polylog"


@dataclass
class FitResult:
    """``y ~ c * N^a`` (power) or ``y ~ c * (log N)^a`` (polylog)."""

    model: str
    exponent: float
    constant: float
    r2: float
    rows: list

    def predict(self, n):
        n = np.asarray(n, dtype=float)
        base = n if self.model == POWER else np.log(n)
        return self.constant * base ** self.exponent


def _fit(x, y, model, rows):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValidationError("need at least two matching data points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("log fits need positive data")
    lx, ly = np.log(x), np.log(y)
    a, b = np.polyfit(lx, ly, 1)
    resid = ly - (a * lx + b)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(model, float(a), math.exp(b), min(1.0, max(0.0, r2)), rows)


def fit_power(N, y):
    """Fit ``y = c N^a`` by least squares in log-log coordinates."""
    return _fit(N, y, POWER, list(zip(N, y)))


def fit_polylog(M, y):
    """Fit ``y = c (log M)^a``; requires M > 1."""
    M = np.asarray(M, dtype=float)
    if np.any(M <= 1):
        raise ValidationError("polylog fit needs M > 1")
    return _fit(np.log(M), y, POLYLOG, list(zip(M.tolist(), y)))
