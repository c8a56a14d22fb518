"""Cascaded STT-MRAM read channel and its quantized transition matrix.

The channel is a binary asymmetric channel (write errors plus read disturb,
read current along the write-0 direction) followed by a two-component
Gaussian resistance read-out. Resistances are in kOhm throughout.

A transition matrix is a ``(2, n)`` array ``W[i, j] = Pr(symbol j | x = i)``.
Several helpers also accept stacks of shape ``(..., 2, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError
from .numerics import q_function

__all__ = [
    "ChannelParams",
    "CrossoverProbs",
    "Quantizer",
    "crossover_probs",
    "interval_probs",
    "transition_matrix",
    "one_bit_matrices",
    "output_distribution",
    "check_transition_matrix",
]


def _is_prob(x: float) -> bool:
    return math.isfinite(x) and 0.0 <= x <= 1.0


@dataclass(frozen=True)
class ChannelParams:
    """Physical parameters of the cascaded channel.

    Parameters
    ----------
    P0, P1 : float
        Write-error rates for 1->0 and 0->1 switching.
    Pr : float
        Read-disturb rate.
    mu0, mu1 : float
        Mean low/high resistance in kOhm.
    sigma0, sigma1 : float
        Standard deviations of the two resistance states in kOhm.
    """

    P0: float
    P1: float
    Pr: float
    mu0: float
    mu1: float
    sigma0: float
    sigma1: float

    def __post_init__(self):
        for name in ("P0", "P1", "Pr"):
            if not _is_prob(getattr(self, name)):
                raise ValidationError(f"{name} must lie in [0, 1], got {getattr(self, name)!r}")
        for name in ("mu0", "mu1", "sigma0", "sigma1"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        # equality is allowed so that degenerate (indistinguishable) read-outs
        # can be modelled; designers reject it
        if self.mu0 > self.mu1:
            raise ValidationError(f"need mu0 <= mu1, got mu0={self.mu0}, mu1={self.mu1}")
        if self.sigma0 <= 0 or self.sigma1 <= 0:
            raise ValidationError("sigma0 and sigma1 must be positive")

    @classmethod
    def from_sigma_ratio(
        cls,
        sigma_ratio: float,
        *,
        P0: float,
        Pr: float,
        P1: float = 2e-4,
        mu0: float = 1.0,
        mu1: float = 2.0,
    ) -> "ChannelParams":
        """Build parameters with equal relative spread ``sigma/mu`` on both states."""
        return cls(P0=P0, P1=P1, Pr=Pr, mu0=mu0, mu1=mu1,
                   sigma0=sigma_ratio * mu0, sigma1=sigma_ratio * mu1)

    def scaled(self, k: float) -> "ChannelParams":
        """Same channel with every resistance multiplied by ``k``."""
        return ChannelParams(self.P0, self.P1, self.Pr, k * self.mu0, k * self.mu1,
                             k * self.sigma0, k * self.sigma1)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.mu0 + self.mu1)


@dataclass(frozen=True)
class CrossoverProbs:
    """BAC transition probabilities; ``p`` flips, ``q`` keeps."""

    p0: float
    q0: float
    p1: float
    q1: float


@dataclass(frozen=True)
class Quantizer:
    """Interior boundaries ``a_1 < ... < a_{n-1}`` of an ``n``-level quantizer.

    ``n`` must be a power of two. Functions in this module also take a bare
    sequence of boundaries, which skips the power-of-two check.
    """

    boundaries: tuple

    def __init__(self, boundaries: Sequence[float]):
        b = tuple(float(x) for x in np.atleast_1d(boundaries))
        object.__setattr__(self, "boundaries", b)
        _check_boundaries(b)
        n = len(b) + 1
        if n & (n - 1):
            raise ValidationError(f"number of levels must be a power of two, got {n}")

    @property
    def levels(self) -> int:
        return len(self.boundaries) + 1

    @property
    def bits(self) -> int:
        return self.levels.bit_length() - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.boundaries, dtype=dtype)


QuantizerLike = Union[Quantizer, Sequence[float], float, np.ndarray]


def _check_boundaries(b) -> None:
    if len(b) < 1:
        raise ValidationError("a quantizer needs at least one boundary")
    if not all(math.isfinite(x) for x in b):
        raise ValidationError("quantizer boundaries must be finite")
    if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
        raise ValidationError(f"quantizer boundaries must be strictly increasing: {b}")


def _boundaries(quantizer: QuantizerLike) -> np.ndarray:
    if isinstance(quantizer, Quantizer):
        return np.asarray(quantizer.boundaries, dtype=float)
    b = np.atleast_1d(np.asarray(quantizer, dtype=float))
    _check_boundaries(tuple(b))
    return b


def crossover_probs(params: ChannelParams) -> CrossoverProbs:
    """BAC crossover probabilities for reading along the write-0 direction."""
    P0, P1, Pr = params.P0, params.P1, params.Pr
    p0 = P0 / 2 * (1 - Pr)
    q0 = (1 - P0 / 2) + P0 / 2 * Pr
    p1 = P1 / 2 + (1 - P1 / 2) * Pr
    q1 = (1 - P1 / 2) * (1 - Pr)
    return CrossoverProbs(p0=p0, q0=q0, p1=p1, q1=q1)


def _interval_probs(mu: float, sigma: float, b: np.ndarray) -> np.ndarray:
    """Gaussian mass of each interval; ``b`` has boundaries on its last axis."""
    t = (b - mu) / sigma
    upper = q_function(t)  # P(y > a_j)
    lower = q_function(-t)  # P(y < a_j)
    first = lower[..., :1]
    last = upper[..., -1:]
    if b.shape[-1] == 1:
        return np.concatenate([first, last], axis=-1)
    # take the difference in whichever tail keeps it well conditioned
    use_upper = (t[..., :-1] + t[..., 1:]) > 0
    mid = np.where(use_upper, upper[..., :-1] - upper[..., 1:], lower[..., 1:] - lower[..., :-1])
    return np.concatenate([first, np.maximum(mid, 0.0), last], axis=-1)


def interval_probs(params: ChannelParams, quantizer: QuantizerLike, component: int) -> np.ndarray:
    """Probability that the read-out of state ``component`` lands in each interval."""
    if component not in (0, 1):
        raise ValidationError(f"component must be 0 or 1, got {component!r}")
    b = _boundaries(quantizer)
    mu, sigma = (params.mu0, params.sigma0) if component == 0 else (params.mu1, params.sigma1)
    return _interval_probs(mu, sigma, b)


def _mix(params: ChannelParams, r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    c = crossover_probs(params)
    w0 = c.q0 * r0 + c.p0 * r1
    w1 = c.p1 * r0 + c.q1 * r1
    return np.stack([w0, w1], axis=-2)


def transition_matrix(params: ChannelParams, quantizer: QuantizerLike) -> np.ndarray:
    """``(2, n)`` matrix of ``W(symbol j | x = i)`` for the quantized channel."""
    b = _boundaries(quantizer)
    r0 = _interval_probs(params.mu0, params.sigma0, b)
    r1 = _interval_probs(params.mu1, params.sigma1, b)
    return _mix(params, r0, r1)


def one_bit_matrices(params: ChannelParams, a1) -> np.ndarray:
    """Stack of 1-bit transition matrices, shape ``a1.shape + (2, 2)``."""
    a = np.asarray(a1, dtype=float)[..., None]
    r0 = _interval_probs(params.mu0, params.sigma0, a)
    r1 = _interval_probs(params.mu1, params.sigma1, a)
    return _mix(params, r0, r1)


def output_distribution(matrix) -> np.ndarray:
    """Output marginal under equiprobable input."""
    W = np.asarray(matrix, dtype=float)
    return 0.5 * (W[..., 0, :] + W[..., 1, :])


def check_transition_matrix(matrix, atol: float = 1e-12) -> np.ndarray:
    """Validate shape, sign and row sums; returns the matrix as an array."""
    W = np.asarray(matrix, dtype=float)
    if W.ndim < 2 or W.shape[-2] != 2 or W.shape[-1] < 2:
        raise ValidationError(f"transition matrix must have shape (2, n>=2), got {W.shape}")
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValidationError("transition matrix entries must be finite and non-negative")
    if np.any(np.abs(W.sum(axis=-1) - 1.0) > atol):
        raise ValidationError("transition matrix rows must sum to 1")
    return W
