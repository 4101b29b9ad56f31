"""Log-gamma, digamma and trigamma on the positive real axis.

Asymptotic (Stirling / Bernoulli) series evaluated at ``x >= 10`` after
upward recurrence shifting. All three accept scalars or numpy arrays and
return the same shape (a Python float for scalar input).
"""

from __future__ import annotations

import math

import numpy as np

_SHIFT = 10.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_2n / (2n (2n - 1)), n = 1..8
_LGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_2n / (2n), n = 1..7
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_2n, n = 1..7
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


class DomainError(ValueError):
    """Argument outside the supported domain."""


def _check(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        bad = arr[~(np.isfinite(arr) & (arr > 0.0))].ravel()[0]
        raise DomainError(f"{name} requires finite x > 0, got {bad!r}")
    return arr


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _poly(coefs, z):
    # Horner in z for sum_i coefs[i] * z**i
    acc = np.zeros_like(z)
    for c in reversed(coefs):
        acc = acc * z + c
    return acc


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    scalar = np.ndim(x) == 0
    z = _check(x, "log_gamma").copy()
    prod = np.ones_like(z)
    small = z < _SHIFT
    while np.any(small):
        prod = np.where(small, prod * z, prod)
        z = np.where(small, z + 1.0, z)
        small = z < _SHIFT
    inv = 1.0 / z
    series = inv * _poly(_LGAMMA_COEF, inv * inv)
    out = (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series - np.log(prod)
    return _out(out, scalar)


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    scalar = np.ndim(x) == 0
    z = _check(x, "digamma").copy()
    terms = []
    small = z < _SHIFT
    while np.any(small):
        terms.append(np.where(small, 1.0 / z, 0.0))
        z = np.where(small, z + 1.0, z)
        small = z < _SHIFT
    inv2 = 1.0 / (z * z)
    out = np.log(z) - 0.5 / z - inv2 * _poly(_DIGAMMA_COEF, inv2)
    # innermost shift last, so psi(x) == fl(psi(x + 1) - 1/x)
    for t in reversed(terms):
        out = out - t
    return _out(out, scalar)


def trigamma(x):
    """psi'(x) for x > 0."""
    scalar = np.ndim(x) == 0
    z = _check(x, "trigamma").copy()
    terms = []
    small = z < _SHIFT
    while np.any(small):
        terms.append(np.where(small, 1.0 / (z * z), 0.0))
        z = np.where(small, z + 1.0, z)
        small = z < _SHIFT
    inv = 1.0 / z
    inv2 = inv * inv
    out = inv + 0.5 * inv2 + inv * inv2 * _poly(_TRIGAMMA_COEF, inv2)
    for t in reversed(terms):
        out = out + t
    return _out(out, scalar)
