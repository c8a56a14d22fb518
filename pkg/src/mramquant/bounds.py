"""Information-theoretic figures of merit of the quantized channel.

Matrix-level functions take a ``(2, n)`` transition matrix (or a stack of
them with the two trailing axes) and assume equiprobable binary input.
Rates are in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .channel import ChannelParams, crossover_probs, output_distribution
from .errors import DomainError, QuadratureError
from .numerics import inv_q_function, normal_pdf, q_function

__all__ = [
    "BoundsReport",
    "CapacityDerivativeTerms",
    "CutoffDerivativeTerms",
    "FiniteBlocklengthQuery",
    "capacity",
    "capacity_derivative",
    "capacity_derivative_terms",
    "cutoff_rate",
    "cutoff_rate_derivative",
    "cutoff_rate_derivative_terms",
    "dispersion",
    "normal_approx_rate",
    "normal_approx_blep",
    "ppv_max_rate",
    "ppv_blep",
    "ppv_surrogate",
    "bounds_report",
    "unquantized_mutual_information",
]

_LN2 = math.log(2.0)


def _as_scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _info_density(W):
    """log2(W / Pr(y)) with zero-probability entries mapped to 0.

    Computed as a difference of logs so tiny entries do not lose digits in a
    division first.
    """
    Py = output_distribution(W)[..., None, :]
    pos = W > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log2(np.where(pos, W, 1.0)) - np.log2(np.where(pos, Py, 1.0))
    return np.where(pos, dens, 0.0)


def capacity(matrix):
    """Mutual information ``H(Y) - H(Y|X)`` for uniform input, clipped to [0, 1]."""
    W = np.asarray(matrix, dtype=float)
    cq = 0.5 * np.sum(W * _info_density(W), axis=(-2, -1))
    return _as_scalar(np.clip(cq, 0.0, 1.0))


def cutoff_rate(matrix):
    """``R0 = 1 - log2(1 + sum_j sqrt(W(j|0) W(j|1)))``."""
    W = np.asarray(matrix, dtype=float)
    bhat = np.sum(np.sqrt(W[..., 0, :] * W[..., 1, :]), axis=-1)
    r0 = 1.0 - np.log2(1.0 + bhat)
    return _as_scalar(np.clip(r0, 0.0, 1.0))


def dispersion(matrix):
    """Variance of the information density (channel dispersion), bits^2.

    Uses the centred second moment, which equals the raw second moment minus
    ``Cq**2`` but cannot go negative.
    """
    W = np.asarray(matrix, dtype=float)
    dens = _info_density(W)
    mean = 0.5 * np.sum(W * dens, axis=(-2, -1))
    centred = dens - mean[..., None, None]
    v = 0.5 * np.sum(W * centred * centred, axis=(-2, -1))
    return _as_scalar(np.maximum(v, 0.0))


# --- derivatives with respect to the 1-bit threshold -------------------------


@dataclass(frozen=True)
class CapacityDerivativeTerms:
    """Intermediate quantities of ``dCq/da1``.

    ``Wprime[i, j]`` is ``dW(symbol j | x=i)/da1``; column 1 is the exact
    negation of column 0.
    """

    derivative: float
    Psi: float
    Psi_prime: float
    Hprime_Y: float
    Hprime_Y_given_X: float
    Wprime: np.ndarray


@dataclass(frozen=True)
class CutoffDerivativeTerms:
    """Intermediate quantities of ``dR0/da1``."""

    derivative: float
    alpha: float
    beta: float
    Omega: float
    Phi: float


def _gauss_terms(params: ChannelParams, a1):
    a = np.asarray(a1, dtype=float)
    t0 = (a - params.mu0) / params.sigma0
    t1 = (a - params.mu1) / params.sigma1
    g0 = normal_pdf(t0) / params.sigma0
    g1 = normal_pdf(t1) / params.sigma1
    return t0, t1, np.asarray(g0), np.asarray(g1)


def _w_prime(params: ChannelParams, g0, g1):
    c = crossover_probs(params)
    alpha = c.q0 * g0 + c.p0 * g1  # dW(0|x=0)/da1
    beta = c.p1 * g0 + c.q1 * g1  # dW(0|x=1)/da1
    return alpha, beta


def _safe_log2(w):
    return np.log2(np.where(w > 0, w, 1.0))


def _capacity_derivative_arrays(params: ChannelParams, a1):
    c = crossover_probs(params)
    t0, t1, g0, g1 = _gauss_terms(params, a1)
    Q0, Q1 = q_function(t0), q_function(t1)
    Qm0, Qm1 = q_function(-t0), q_function(-t1)

    psi = 0.5 * (c.q0 + c.p1) * Q0 + 0.5 * (c.p0 + c.q1) * Q1
    psi_c = 0.5 * (c.q0 + c.p1) * Qm0 + 0.5 * (c.p0 + c.q1) * Qm1  # 1 - psi
    psi_p = -0.5 * (c.q0 + c.p1) * g0 - 0.5 * (c.p0 + c.q1) * g1
    with np.errstate(divide="ignore", invalid="ignore"):
        hy = np.where((psi > 0) & (psi_c > 0), -psi_p * (_safe_log2(psi) - _safe_log2(psi_c)), 0.0)

    alpha, beta = _w_prime(params, g0, g1)
    W = np.stack([
        np.stack([c.q0 * Qm0 + c.p0 * Qm1, c.q0 * Q0 + c.p0 * Q1], axis=-1),
        np.stack([c.p1 * Qm0 + c.q1 * Qm1, c.p1 * Q0 + c.q1 * Q1], axis=-1),
    ], axis=-2)
    Wp = np.stack([
        np.stack([alpha, -alpha], axis=-1),
        np.stack([beta, -beta], axis=-1),
    ], axis=-2)
    hyx = -0.5 * np.sum(Wp * _safe_log2(W) + Wp / _LN2, axis=(-2, -1))
    return hy - hyx, psi, psi_p, hy, hyx, Wp


def capacity_derivative(params: ChannelParams, a1):
    """Closed-form ``dCq/da1`` of the 1-bit quantized channel.

    Vectorized over ``a1``.
    """
    return _as_scalar(_capacity_derivative_arrays(params, a1)[0])


def capacity_derivative_terms(params: ChannelParams, a1: float) -> CapacityDerivativeTerms:
    d, psi, psi_p, hy, hyx, Wp = _capacity_derivative_arrays(params, float(a1))
    return CapacityDerivativeTerms(float(d), float(psi), float(psi_p), float(hy), float(hyx), Wp)


def _cutoff_derivative_arrays(params: ChannelParams, a1):
    c = crossover_probs(params)
    t0, t1, g0, g1 = _gauss_terms(params, a1)
    alpha, beta = _w_prime(params, g0, g1)
    # Q((mu - a1)/sigma) - 1 == -Q((a1 - mu)/sigma), so Omega = -W(1|0), Phi = -W(1|1)
    omega = c.p0 * (q_function(-t1) - 1.0) + c.q0 * (q_function(-t0) - 1.0)
    phi = c.p1 * (q_function(-t0) - 1.0) + c.q1 * (q_function(-t1) - 1.0)
    # Omega + 1 and Phi + 1 are W(0|0), W(0|1); form them directly to avoid 1 + (-1 + tiny)
    w00 = c.q0 * q_function(-t0) + c.p0 * q_function(-t1)
    w01 = c.p1 * q_function(-t0) + c.q1 * q_function(-t1)
    prod_hi = omega * phi
    prod_lo = w00 * w01
    sq_hi, sq_lo = np.sqrt(prod_hi), np.sqrt(prod_lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        term_hi = np.where(prod_hi > 0, (beta * omega + alpha * phi) / (2 * sq_hi), 0.0)
        term_lo = np.where(prod_lo > 0, (beta * w00 + alpha * w01) / (2 * sq_lo), 0.0)
    d = -(term_hi + term_lo) / (_LN2 * (sq_lo + sq_hi + 1.0))
    return d, alpha, beta, omega, phi


def cutoff_rate_derivative(params: ChannelParams, a1):
    """Closed-form ``dR0/da1`` of the 1-bit quantized channel; vectorized."""
    return _as_scalar(_cutoff_derivative_arrays(params, a1)[0])


def cutoff_rate_derivative_terms(params: ChannelParams, a1: float) -> CutoffDerivativeTerms:
    d, alpha, beta, omega, phi = _cutoff_derivative_arrays(params, float(a1))
    return CutoffDerivativeTerms(float(d), float(alpha), float(beta), float(omega), float(phi))


# --- finite blocklength -------------------------------------------------------


@dataclass(frozen=True)
class FiniteBlocklengthQuery:
    N: int
    R: float
    epsilon: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"blocklength N must be a positive integer, got {self.N!r}")
        if not 0.0 < self.R < 1.0:
            raise DomainError(f"rate R must lie in (0, 1), got {self.R!r}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")


def normal_approx_rate(cap: float, disp: float, N: int, epsilon: float) -> float:
    """``C - sqrt(V/N) * Qinv(eps)``."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if epsilon == 0.5:
        return float(cap)
    return float(cap - math.sqrt(disp / N) * inv_q_function(epsilon))


def normal_approx_blep(cap: float, disp: float, N: int, R: float) -> float:
    """``Q(sqrt(N/V) * (C - R))``; the ``V = 0`` limit is a step at ``R = C``."""
    gap = cap - R
    if disp <= 0.0:
        if gap > 0:
            return 0.0
        return 1.0 if gap < 0 else 0.5
    return q_function(math.sqrt(N / disp) * gap)


def ppv_max_rate(matrix, N: int, epsilon: float) -> float:
    """Normal-approximation maximal rate at blocklength ``N`` and error ``epsilon``."""
    return normal_approx_rate(capacity(matrix), dispersion(matrix), N, epsilon)


def ppv_blep(matrix, N: int, R: float) -> float:
    """Normal-approximation block error probability at blocklength ``N`` and rate ``R``."""
    return normal_approx_blep(capacity(matrix), dispersion(matrix), N, R)


def ppv_surrogate(matrix, R: float):
    """``(Cq - R) / sqrt(Vq)``: larger is better, monotone in the BLEP when ``Cq > R``.

    Unlike the BLEP itself this does not underflow at small read noise.
    Vectorized over stacked matrices.
    """
    cq = np.asarray(capacity(matrix))
    v = np.asarray(dispersion(matrix))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(v > 0, (cq - R) / np.sqrt(np.where(v > 0, v, 1.0)), np.sign(cq - R) * np.inf)
    return _as_scalar(g)


@dataclass(frozen=True)
class BoundsReport:
    capacity: float
    cutoff_rate: float
    dispersion: float
    N: Optional[int] = None
    R: Optional[float] = None
    epsilon: Optional[float] = None
    max_rate: Optional[float] = None
    blep: Optional[float] = None


def bounds_report(matrix, query: Optional[FiniteBlocklengthQuery] = None) -> BoundsReport:
    """All figures of merit for one quantized channel."""
    cq, r0, vq = capacity(matrix), cutoff_rate(matrix), dispersion(matrix)
    if query is None:
        return BoundsReport(cq, r0, vq)
    max_rate = None
    if query.epsilon is not None:
        max_rate = normal_approx_rate(cq, vq, query.N, query.epsilon)
    blep = normal_approx_blep(cq, vq, query.N, query.R)
    return BoundsReport(cq, r0, vq, query.N, query.R, query.epsilon, max_rate, blep)


# --- continuous-output reference ---------------------------------------------


def _log_normal_pdf(y, mu, sigma):
    z = (y - mu) / sigma
    return -0.5 * z * z - math.log(sigma * math.sqrt(2 * math.pi))


def unquantized_mutual_information(params: ChannelParams, tol: float = 1e-10) -> float:
    """Mutual information of the unquantized cascaded channel, bits.

    Each mixture component is integrated in its own standardized coordinate
    over +-10 sigma, so the integrand stays well resolved however small the
    read noise is. Densities are combined in the log domain.
    """
    c = crossover_probs(params)
    weights = ((c.q0, c.p0), (c.p1, c.q1))  # row i: weights of components 0, 1
    comps = ((params.mu0, params.sigma0), (params.mu1, params.sigma1))

    def log_f(i, y):
        terms = [math.log(w) + _log_normal_pdf(y, mu, s)
                 for w, (mu, s) in zip(weights[i], comps) if w > 0]
        return special.logsumexp(terms)

    total = 0.0
    for i in (0, 1):
        for k, (mu, s) in enumerate(comps):
            w = weights[i][k]
            if w == 0:
                continue

            def integrand(z, i=i, mu=mu, s=s):
                y = mu + s * z
                lf0, lf1 = log_f(0, y), log_f(1, y)
                lfi = lf0 if i == 0 else lf1
                lbar = np.logaddexp(lf0, lf1) - math.log(2.0)
                return normal_pdf(z) * (lfi - lbar) / _LN2

            val, err, *rest = integrate.quad(integrand, -10.0, 10.0, epsabs=tol, epsrel=1e-12,
                                             limit=500, points=(0.0,), full_output=1)
            if len(rest) > 1 and err > 10 * tol:
                raise QuadratureError(
                    f"quadrature did not converge for row {i}, component {k}: "
                    f"value={val!r}, error estimate={err!r}, message={rest[1]!r}"
                )
            total += 0.5 * w * val
    return float(total)
