"""Quantizer design: threshold optimizers for each criterion.

The 1-bit designers locate stationary points of the objective by bisection
on its derivative (closed form for capacity and cutoff rate, central finite
differences for the finite-blocklength criterion) and keep the best
candidate. Multi-level quantizers are refined by cyclic coordinate ascent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import bounds
from .bounds import capacity, cutoff_rate, dispersion, normal_approx_blep
from .channel import ChannelParams, Quantizer, crossover_probs, one_bit_matrices, transition_matrix
from .errors import BracketError, ConvergenceError, DegenerateQuantizerError, ValidationError
from .numerics import normal_pdf, q_function

__all__ = [
    "Criterion",
    "OptimizerConfig",
    "DesignResult",
    "bisect_root",
    "golden_section_max",
    "design_quantizer",
    "design_capacity_max",
    "design_cutoff_max",
    "design_ppv_min",
    "design_lloyd_max",
    "design_multibit",
    "evaluate_objective",
    "quantizer_mse",
    "surrogate_curve",
    "mixture_weights",
    "DEFAULT_N",
    "DEFAULT_R",
]

DEFAULT_N = 128
DEFAULT_R = 110 / 128
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Criterion(str, enum.Enum):
    CAPACITY = "capacity"
    CUTOFF_RATE = "cutoff_rate"
    PPV_BLEP = "ppv_blep"
    LLOYD_MAX = "lloyd_max"


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings. ``None`` fields are derived from the channel.

    The default bracket is ``[mu0, mu1]`` and the default finite-difference
    step is ``1e-5 * (mu1 - mu0)``.
    """

    bracket_lo: Optional[float] = None
    bracket_hi: Optional[float] = None
    tol_a: float = 1e-9
    max_iter: int = 200
    fd_step: Optional[float] = None
    grid_points: int = 512

    def __post_init__(self):
        if self.tol_a <= 0:
            raise ValidationError("tol_a must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")
        if self.fd_step is not None and self.fd_step <= 0:
            raise ValidationError("fd_step must be positive")
        if self.grid_points < 2:
            raise ValidationError("grid_points must be at least 2")
        if (self.bracket_lo is not None and self.bracket_hi is not None
                and not self.bracket_lo < self.bracket_hi):
            raise ValidationError("bracket_lo must be below bracket_hi")

    def resolve(self, params: ChannelParams) -> "OptimizerConfig":
        span = params.mu1 - params.mu0
        return replace(
            self,
            bracket_lo=params.mu0 if self.bracket_lo is None else self.bracket_lo,
            bracket_hi=params.mu1 if self.bracket_hi is None else self.bracket_hi,
            fd_step=1e-5 * span if self.fd_step is None else self.fd_step,
        )


@dataclass
class DesignResult:
    quantizer: Quantizer
    objective_value: float
    criterion: Criterion
    iterations: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        """First boundary; the decision threshold of a 1-bit design."""
        return self.quantizer.boundaries[0]


# --- generic 1-D search --------------------------------------------------------


def _bisect(f, lo, hi, tol, max_iter):
    f_lo, f_hi = f(lo), f(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise BracketError(lo, hi, f_lo, f_hi)
    if f_lo == 0:
        return lo, lo, lo, 0
    if f_hi == 0:
        return hi, hi, hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(lo, hi, f_lo, f_hi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            return mid, lo, hi, it - 1
        f_mid = f(mid)
        if f_mid == 0:
            return mid, mid, mid, it
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    if hi - lo <= tol:
        return 0.5 * (lo + hi), lo, hi, max_iter
    raise ConvergenceError(
        f"bisection did not reach tol={tol!r} in {max_iter} iterations", (lo, hi)
    )


def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-9, max_iter: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]`` by bisection.

    Raises
    ------
    BracketError
        ``f(lo)`` and ``f(hi)`` have the same sign or are not finite.
    ConvergenceError
        The bracket is still wider than ``tol`` after ``max_iter`` halvings;
        the last bracket is attached to the exception.
    """
    return _bisect(f, lo, hi, tol, max_iter)[0]


def golden_section_max(f, lo, hi, tol, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), evaluations)``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol and n < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def _sign_changes(values):
    v = np.asarray(values)
    s = np.sign(v)
    return [k for k in range(len(v) - 1) if s[k] != 0 and s[k] != s[k + 1]]


def _one_bit_search(params, cfg, objective, derivative):
    """Best stationary point of ``objective`` found by scanning ``derivative``.

    ``objective`` and ``derivative`` are vectorized over the threshold.
    """
    brackets = [(cfg.bracket_lo, cfg.bracket_hi)]
    wide = (min(cfg.bracket_lo, params.mu0 - 3 * params.sigma0),
            max(cfg.bracket_hi, params.mu1 + 3 * params.sigma1))
    if wide != brackets[0]:
        brackets.append(wide)

    deriv = lambda x: float(derivative(x))  # noqa: E731
    for lo, hi in brackets:
        grid = np.linspace(lo, hi, cfg.grid_points)
        dgrid = np.asarray(derivative(grid))
        changes = _sign_changes(dgrid)
        # a maximum needs the derivative to go from + to -
        if not any(dgrid[k] > 0 for k in changes):
            continue
        roots, iters = [], 0
        for k in changes:
            root, _, _, it = _bisect(deriv, grid[k], grid[k + 1], cfg.tol_a, cfg.max_iter)
            roots.append(root)
            iters += it
        candidates = np.array(roots + [lo, hi])
        values = np.asarray(objective(candidates))
        best = int(np.argmax(values))
        a1 = float(candidates[best])
        diag = {
            "bracket": (lo, hi),
            "roots": roots,
            "residual_derivative": deriv(a1),
            "grid_fallback": False,
        }
        return a1, iters, diag

    lo, hi = brackets[-1]
    grid = np.linspace(lo, hi, max(cfg.grid_points, 10_000))
    a1 = float(grid[int(np.argmax(objective(grid)))])
    diag = {"bracket": (lo, hi), "roots": [], "residual_derivative": deriv(a1),
            "grid_fallback": True}
    return a1, 0, diag


def _require_distinct(params: ChannelParams):
    if not params.mu0 < params.mu1:
        raise ValidationError("quantizer design needs mu0 < mu1")


# --- objectives -----------------------------------------------------------------


def mixture_weights(params: ChannelParams, bac_weights: bool = True):
    """Prior weights of the low/high resistance components seen by the reader."""
    if not bac_weights:
        return 0.5, 0.5
    c = crossover_probs(params)
    return 0.5 * (c.q0 + c.p1), 0.5 * (c.p0 + c.q1)


def _cell_moments(params, b, bac_weights):
    """Mass and first moment of the output mixture over each interval."""
    b = np.asarray(b, dtype=float)
    weights = mixture_weights(params, bac_weights)
    mass = np.zeros(len(b) + 1)
    first = np.zeros(len(b) + 1)
    for w, mu, s in zip(weights, (params.mu0, params.mu1), (params.sigma0, params.sigma1)):
        t = (b - mu) / s
        tails = np.concatenate([[1.0], q_function(t), [0.0]])  # P(y > a_j), a_0=-inf, a_n=+inf
        dens = np.concatenate([[0.0], normal_pdf(t), [0.0]])
        lower = np.concatenate([[0.0], q_function(-t), [1.0]])  # P(y < a_j)
        t_mid = np.concatenate([[-np.inf], t, [np.inf]])
        use_upper = (t_mid[:-1] + t_mid[1:]) > 0
        m = np.where(use_upper, tails[:-1] - tails[1:], lower[1:] - lower[:-1])
        mass += w * m
        first += w * (mu * m + s * (dens[:-1] - dens[1:]))
    return mass, first


def quantizer_mse(params: ChannelParams, quantizer, bac_weights: bool = True) -> float:
    """Mean squared error of a quantizer reconstructing each cell at its centroid."""
    b = np.atleast_1d(np.asarray(quantizer, dtype=float))
    mass, first = _cell_moments(params, b, bac_weights)
    w0, w1 = mixture_weights(params, bac_weights)
    second = w0 * (params.mu0 ** 2 + params.sigma0 ** 2) + w1 * (params.mu1 ** 2 + params.sigma1 ** 2)
    pos = mass > 0
    return float(second - np.sum(first[pos] ** 2 / mass[pos]))


def evaluate_objective(params: ChannelParams, quantizer, criterion, N: int = DEFAULT_N,
                       R: float = DEFAULT_R, bac_weights: bool = True) -> float:
    """Value of a design criterion for a given quantizer.

    Capacity and cutoff rate are maximized, the block error probability and
    the MSE are minimized.
    """
    criterion = Criterion(criterion)
    if criterion is Criterion.LLOYD_MAX:
        return quantizer_mse(params, quantizer, bac_weights)
    W = transition_matrix(params, quantizer)
    if criterion is Criterion.CAPACITY:
        return capacity(W)
    if criterion is Criterion.CUTOFF_RATE:
        return cutoff_rate(W)
    return normal_approx_blep(capacity(W), dispersion(W), N, R)


# --- 1-bit designers --------------------------------------------------------------


def _finish(params, a1, criterion, iters, diag, N=DEFAULT_N, R=DEFAULT_R, bac_weights=True):
    q = Quantizer([a1])
    value = evaluate_objective(params, q, criterion, N, R, bac_weights)
    return DesignResult(q, value, Criterion(criterion), iters, diag)


def design_capacity_max(params: ChannelParams, cfg: OptimizerConfig = OptimizerConfig()) -> DesignResult:
    """1-bit threshold maximizing the quantized channel capacity."""
    _require_distinct(params)
    cfg = cfg.resolve(params)
    a1, iters, diag = _one_bit_search(
        params, cfg,
        objective=lambda a: capacity(one_bit_matrices(params, a)),
        derivative=lambda a: bounds.capacity_derivative(params, a),
    )
    return _finish(params, a1, Criterion.CAPACITY, iters, diag)


def design_cutoff_max(params: ChannelParams, cfg: OptimizerConfig = OptimizerConfig()) -> DesignResult:
    """1-bit threshold maximizing the cutoff rate."""
    _require_distinct(params)
    cfg = cfg.resolve(params)
    a1, iters, diag = _one_bit_search(
        params, cfg,
        objective=lambda a: cutoff_rate(one_bit_matrices(params, a)),
        derivative=lambda a: bounds.cutoff_rate_derivative(params, a),
    )
    return _finish(params, a1, Criterion.CUTOFF_RATE, iters, diag)


def surrogate_curve(params: ChannelParams, R: float):
    """Vectorized ``a1 -> (Cq - R) / sqrt(Vq)`` for the 1-bit channel."""

    def g(a):
        W = one_bit_matrices(params, a)
        cq = np.asarray(capacity(W))
        v = np.asarray(dispersion(W))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(v > 0, (cq - R) / np.sqrt(np.where(v > 0, v, 1.0)),
                           np.sign(cq - R) * np.inf)
        return out if out.ndim else float(out)
    return g


def design_ppv_min(params: ChannelParams, N: int = DEFAULT_N, R: float = DEFAULT_R,
                   cfg: OptimizerConfig = OptimizerConfig()) -> DesignResult:
    """1-bit threshold minimizing the normal-approximation block error probability.

    The search maximizes ``(Cq - R) / sqrt(Vq)``, which orders thresholds the
    same way as the BLEP whenever ``Cq > R`` and stays finite where the BLEP
    underflows. Its derivative is taken by central differences.
    """
    _require_distinct(params)
    if not 0 < R < 1 or N < 1:
        raise ValidationError("need 0 < R < 1 and N >= 1")
    cfg = cfg.resolve(params)
    h = cfg.fd_step

    grid = np.linspace(cfg.bracket_lo, cfg.bracket_hi, cfg.grid_points)
    if np.max(capacity(one_bit_matrices(params, grid))) <= R:
        res = design_capacity_max(params, cfg)
        res.diagnostics["capacity_below_rate"] = True
        return _finish(params, res.threshold, Criterion.PPV_BLEP, res.iterations,
                       res.diagnostics, N, R)

    g = surrogate_curve(params, R)
    a1, iters, diag = _one_bit_search(
        params, cfg,
        objective=g,
        derivative=lambda a: (g(np.asarray(a) + h) - g(np.asarray(a) - h)) / (2 * h),
    )
    diag["capacity_below_rate"] = False
    diag["surrogate"] = float(g(a1))
    return _finish(params, a1, Criterion.PPV_BLEP, iters, diag, N, R)


def _lloyd_init(params, n_levels):
    lo = params.mu0 - 2 * params.sigma0
    hi = params.mu1 + 2 * params.sigma1
    if n_levels == 2:
        return np.array([params.midpoint])
    return np.linspace(lo, hi, n_levels + 1)[1:-1]


def design_lloyd_max(params: ChannelParams, cfg: OptimizerConfig = OptimizerConfig(),
                     n_levels: int = 2, bac_weights: bool = True,
                     initial=None) -> DesignResult:
    """Lloyd-Max (MMSE) quantizer of the read-out resistance mixture.

    The mixture weights include the BAC priors unless ``bac_weights`` is
    False. Alternates centroid and midpoint conditions until no boundary
    moves by more than ``tol_a``.
    """
    _require_distinct(params)
    b = np.asarray(_lloyd_init(params, n_levels) if initial is None else initial, dtype=float)
    if len(b) != n_levels - 1:
        raise ValidationError("initial boundaries do not match n_levels")
    for it in range(1, cfg.max_iter + 1):
        mass, first = _cell_moments(params, b, bac_weights)
        if np.any(mass <= 0):
            raise DegenerateQuantizerError(f"empty quantizer cell at iteration {it}: {b}")
        centroids = first / mass
        new = 0.5 * (centroids[:-1] + centroids[1:])
        step = float(np.max(np.abs(new - b)))
        b = new
        if step < cfg.tol_a:
            q = Quantizer(b)
            diag = {"centroids": tuple(centroids), "last_step": step, "bac_weights": bac_weights}
            return DesignResult(q, quantizer_mse(params, q, bac_weights),
                                Criterion.LLOYD_MAX, it, diag)
    raise ConvergenceError(f"Lloyd-Max did not converge in {cfg.max_iter} iterations "
                           f"(last boundaries {b})")


_ONE_BIT = {
    Criterion.CAPACITY: design_capacity_max,
    Criterion.CUTOFF_RATE: design_cutoff_max,
}


def design_quantizer(params: ChannelParams, criterion, cfg: OptimizerConfig = OptimizerConfig(),
           n_levels: int = 2, N: int = DEFAULT_N, R: float = DEFAULT_R) -> DesignResult:
    """Dispatch to the designer for ``criterion`` and ``n_levels``."""
    criterion = Criterion(criterion)
    if n_levels != 2:
        return design_multibit(params, n_levels, criterion, cfg, N=N, R=R)
    if criterion is Criterion.PPV_BLEP:
        return design_ppv_min(params, N, R, cfg)
    if criterion is Criterion.LLOYD_MAX:
        return design_lloyd_max(params, cfg)
    return _ONE_BIT[criterion](params, cfg)


# --- multi-level -------------------------------------------------------------------


def _score(params, b, criterion, R):
    """Quantity to maximize for a boundary vector."""
    W = transition_matrix(params, b)
    if criterion is Criterion.CAPACITY:
        return capacity(W)
    if criterion is Criterion.CUTOFF_RATE:
        return cutoff_rate(W)
    v = dispersion(W)
    gap = capacity(W) - R
    return gap / math.sqrt(v) if v > 0 else math.copysign(math.inf, gap)


def design_multibit(params: ChannelParams, n_levels: int, criterion,
                    cfg: OptimizerConfig = OptimizerConfig(), N: int = DEFAULT_N,
                    R: float = DEFAULT_R) -> DesignResult:
    """Locally optimal ``n_levels``-level quantizer by cyclic coordinate ascent.

    Starts from the ``n_levels / 2`` design of the same criterion with one
    extra boundary inserted into every cell, so the result never scores
    below the coarser design. Each sweep re-optimizes every boundary by
    golden-section search between its neighbours.
    """
    criterion = Criterion(criterion)
    if n_levels < 2 or n_levels & (n_levels - 1):
        raise ValidationError(f"n_levels must be a power of two >= 2, got {n_levels}")
    if n_levels == 2:
        return design_quantizer(params, criterion, cfg, 2, N, R)
    if criterion is Criterion.LLOYD_MAX:
        return design_lloyd_max(params, cfg, n_levels=n_levels)
    _require_distinct(params)

    coarse = design_multibit(params, n_levels // 2, criterion, cfg, N, R)
    cb = np.asarray(coarse.quantizer.boundaries)
    outer_lo = params.mu0 - 8 * params.sigma0
    outer_hi = params.mu1 + 8 * params.sigma1
    edges = np.concatenate([[min(outer_lo, cb[0] - 2 * params.sigma0)], cb,
                            [max(outer_hi, cb[-1] + 2 * params.sigma1)]])
    b = np.empty(n_levels - 1)
    b[0::2] = 0.5 * (edges[:-1] + edges[1:])
    b[1::2] = cb
    outer_lo, outer_hi = edges[0], edges[-1]

    current = _score(params, b, criterion, R)
    history = [current]
    gs_tol = max(cfg.tol_a, 1e-8 * (params.mu1 - params.mu0))
    evals = 0
    for sweep in range(1, cfg.max_iter + 1):
        start = current
        for j in range(len(b)):
            left = b[j - 1] if j > 0 else outer_lo
            right = b[j + 1] if j < len(b) - 1 else outer_hi
            if right - left < 3 * cfg.tol_a:
                raise DegenerateQuantizerError(
                    f"boundaries {j - 1} and {j + 1} collapsed: interval {right - left!r}")
            lo, hi = left + cfg.tol_a, right - cfg.tol_a

            def f(x, j=j):
                trial = b.copy()
                trial[j] = x
                return _score(params, trial, criterion, R)

            x, fx, n = golden_section_max(f, lo, hi, gs_tol)
            evals += n
            if fx > current:
                b[j], current = x, fx
        history.append(current)
        if current - start < 1e-12:
            break
    else:
        raise ConvergenceError(f"coordinate ascent did not settle in {cfg.max_iter} sweeps")

    q = Quantizer(b)
    diag = {"sweeps": sweep, "history": history, "evaluations": evals,
            "initial": coarse.quantizer.boundaries}
    return DesignResult(q, evaluate_objective(params, q, criterion, N, R), criterion, sweep, diag)
