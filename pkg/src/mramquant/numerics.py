"""Scalar primitives: Gaussian tail, its inverse, and entropy summands.

Every function accepts a float or an array-like and returns the same kind.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _out(result, scalar: bool):
    return float(result) if scalar else result


def q_function(t):
    """Gaussian upper-tail probability ``Q(t) = P(Z > t)``.

    Evaluated as ``ndtr(-t)``, which goes through ``erfc`` and keeps full
    relative precision deep into the upper tail. Underflows to 0 (never
    NaN) beyond ``t ~ 38``.
    """
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"q_function requires finite input, got {t!r}")
    return _out(special.ndtr(-arr), arr.ndim == 0)


def normal_pdf(t):
    """Standard normal density."""
    arr = np.asarray(t, dtype=float)
    return _out(np.exp(-0.5 * arr * arr) / _SQRT_2PI, arr.ndim == 0)


def inv_q_function(p):
    """Inverse of :func:`q_function` on the open interval (0, 1).

    ``ndtri`` gives the starting point; one Newton step on ``Q(t) - p``
    polishes it.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"inv_q_function requires 0 < p < 1, got {p!r}")
    t = -special.ndtri(arr)
    dens = np.exp(-0.5 * t * t) / _SQRT_2PI
    t = t + (special.ndtr(-t) - arr) / dens
    return _out(t, arr.ndim == 0)


def _check_prob(arr, name):
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError(f"{name} requires 0 <= p <= 1")


def xlog2x(p):
    """``p * log2(p)`` with ``0 * log2(0) = 0``."""
    arr = np.asarray(p, dtype=float)
    _check_prob(arr, "xlog2x")
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(arr > 0.0, arr * np.log2(np.where(arr > 0.0, arr, 1.0)), 0.0)
    return _out(val, arr.ndim == 0)


def binary_entropy(p):
    """Binary entropy in bits."""
    arr = np.asarray(p, dtype=float)
    _check_prob(arr, "binary_entropy")
    # sum order p, 1-p is irrelevant: float addition is commutative
    val = -(xlog2x(arr) + xlog2x(1.0 - arr))
    return _out(val, arr.ndim == 0)
