"""Fourier coefficients of the power weight |t|^(-gamma) on [-pi, pi].

    w_hat(k) = int_{-pi}^{pi} |t|^(-gamma) exp(-ikt) dt = 2 int_0^pi t^(-gamma) cos(kt) dt

The integrand has an algebraic endpoint singularity at 0 and oscillates for
large k, so the interval is split at 1/|k|: the head uses QUADPACK's
algebraic-weight rule (QAWS) and the tail the Fourier-weight rule (QAWO).
"""
from functools import lru_cache
import math
import warnings

import numpy as np
from scipy import integrate

from .errors import NumericalError, ValidationError

REL_TOL = 1e-8
ABS_FLOOR = 1e-13


def _check_gamma(gamma):
    if not abs(gamma) < 1:
        raise ValidationError(f"|gamma| must be < 1 for integrability, got {gamma}")


def weight_mass(gamma):
    """Closed form of w_hat(0) = 2 pi^(1-gamma) / (1-gamma)."""
    _check_gamma(gamma)
    return 2.0 * math.pi ** (1.0 - gamma) / (1.0 - gamma)


@lru_cache(maxsize=None)
def _coeff(gamma, k, limit):
    # QUADPACK warns when it cannot certify epsrel=1e-13; the returned error
    # estimate is checked against the real target by the caller.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _coeff_raw(gamma, k, limit)


def _coeff_raw(gamma, k, limit):
    if k == 0:
        val, err = integrate.quad(lambda t: 1.0, 0.0, math.pi, weight="alg",
                                  wvar=(-gamma, 0.0), epsabs=1e-15, epsrel=1e-13,
                                  limit=limit)
        return 2.0 * val, 2.0 * err
    cut = min(1.0 / k, math.pi)
    head, e1 = integrate.quad(lambda t: math.cos(k * t), 0.0, cut, weight="alg",
                              wvar=(-gamma, 0.0), epsabs=1e-15, epsrel=1e-13,
                              limit=limit)
    tail, e2 = 0.0, 0.0
    if cut < math.pi:
        tail, e2 = integrate.quad(lambda t: t ** (-gamma), cut, math.pi,
                                  weight="cos", wvar=k, epsabs=1e-15,
                                  epsrel=1e-13, limit=limit)
    return 2.0 * (head + tail), 2.0 * (e1 + e2)


def fourier_coeff_weight(gamma, k, limit=200):
    """Fourier coefficient w_hat(k) of |t|^(-gamma), real and even in k.

    Raises NumericalError (carrying the error estimate) if QUADPACK's
    estimate exceeds the 1e-8 relative target.
    """
    _check_gamma(gamma)
    k = abs(int(k))
    val, err = _coeff(float(gamma), k, int(limit))
    if err > REL_TOL * abs(val) + ABS_FLOOR:
        raise NumericalError(
            f"quadrature for w_hat({k}), gamma={gamma} did not converge "
            f"(estimate {err:.3e})", achieved=err)
    return val


def fourier_coeffs_weight(gamma, kmax):
    """Array of w_hat(0..kmax)."""
    return np.array([fourier_coeff_weight(gamma, k) for k in range(kmax + 1)])
