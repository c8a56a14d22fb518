"""Monte Carlo sampling of the quantized channel.

Randomness is counter based: sample ``k`` belongs to block ``k // BLOCK``
and every block owns an independent Philox stream keyed by ``(seed, block)``.
Any split of the blocks across shards therefore produces the same samples.
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .channel import ChannelParams, crossover_probs, transition_matrix, _boundaries
from .errors import ValidationError
from .numerics import inv_q_function

__all__ = [
    "McConfig",
    "McReport",
    "EntryCheck",
    "ValidationSummary",
    "sample_channel",
    "sample_block",
    "estimate_matrix",
    "compare_to_analytic",
    "export_samples",
    "EXPORT_HEADER",
]

BLOCK = 1 << 16
EXPORT_HEADER = ("sample_index", "x", "symbol", "resistance_kohm")
_HALF_ULP = 2.0 ** -54


@dataclass(frozen=True)
class McConfig:
    seed: int = 1
    num_samples: int = 1_000_000
    shards: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.num_samples < 1:
            raise ValidationError("num_samples must be at least 1")
        if self.shards < 1:
            raise ValidationError("shards must be at least 1")


@dataclass(frozen=True)
class McReport:
    """Empirical transition statistics.

    ``counts[i, j]`` is the number of samples with input ``i`` read as
    symbol ``j``. ``raw_ber`` is the error rate of the MAP hard decision
    implied by the analytic matrix, with a 95% normal-approximation
    half-width.
    """

    counts: np.ndarray
    frequencies: np.ndarray
    raw_ber: float
    raw_ber_halfwidth: float
    samples_drawn: int

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def _draw(params: ChannelParams, b: np.ndarray, x: np.ndarray, u_flip, u_noise):
    c = crossover_probs(params)
    flip_prob = np.where(x == 0, c.p0, c.p1)
    xhat = np.where(u_flip < flip_prob, 1 - x, x)
    z = inv_q_function(u_noise + _HALF_ULP)
    mu = np.where(xhat == 0, params.mu0, params.mu1)
    sigma = np.where(xhat == 0, params.sigma0, params.sigma1)
    y = mu + sigma * z
    return np.searchsorted(b, y, side="left"), y


def sample_channel(params: ChannelParams, quantizer, x: int, rng: np.random.Generator) -> int:
    """One quantized read of a cell written with bit ``x``."""
    if x not in (0, 1):
        raise ValidationError(f"x must be 0 or 1, got {x!r}")
    b = _boundaries(quantizer)
    u = rng.random(2)
    sym, _ = _draw(params, b, np.array([x]), u[:1], u[1:])
    return int(sym[0])


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_block(params: ChannelParams, quantizer, seed: int, block: int, size: int = BLOCK):
    """Samples ``block*BLOCK ... block*BLOCK+size-1``; returns ``(x, symbol, y)``."""
    b = _boundaries(quantizer)
    u = _block_rng(seed, block).random((3, BLOCK))[:, :size]
    x = (u[0] < 0.5).astype(np.int64)
    sym, y = _draw(params, b, x, u[1], u[2])
    return x, sym, y


def _blocks(num_samples: int):
    full, rest = divmod(num_samples, BLOCK)
    out = [(k, BLOCK) for k in range(full)]
    if rest:
        out.append((full, rest))
    return out


def estimate_matrix(params: ChannelParams, quantizer, cfg: McConfig = McConfig()) -> McReport:
    """Empirical transition matrix from ``cfg.num_samples`` equiprobable inputs."""
    b = _boundaries(quantizer)
    n = len(b) + 1
    blocks = _blocks(cfg.num_samples)

    def run_shard(s):
        counts = np.zeros((2, n), dtype=np.int64)
        for block, size in blocks[s::cfg.shards]:
            x, sym, _ = sample_block(params, b, cfg.seed, block, size)
            np.add.at(counts, (x, sym), 1)
        return counts

    if cfg.shards == 1:
        counts = run_shard(0)
    else:
        with ThreadPoolExecutor(max_workers=cfg.shards) as pool:
            counts = sum(pool.map(run_shard, range(cfg.shards)))

    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = np.where(rows > 0, counts / np.maximum(rows, 1), 0.0)

    W = transition_matrix(params, b)
    decision = np.argmax(W, axis=0)  # ties resolve to x = 0
    errors = int(sum(counts[1 - decision[j], j] for j in range(n)))
    total = int(counts.sum())
    ber = errors / total
    half = 1.959963984540054 * math.sqrt(ber * (1 - ber) / total)
    return McReport(counts, freq, ber, half, total)


@dataclass(frozen=True)
class EntryCheck:
    x: int
    symbol: int
    analytic: float
    empirical: float
    count: int
    expected: float
    z: float
    passed: bool


@dataclass(frozen=True)
class ValidationSummary:
    entries: list
    chi2: float
    dof: int
    p_value: float
    chi2_passed: bool

    @property
    def passed(self) -> bool:
        return self.chi2_passed and all(e.passed for e in self.entries)


def compare_to_analytic(report: McReport, matrix, z_limit: float = 4.0,
                        alpha: float = 1e-3) -> ValidationSummary:
    """Per-entry binomial z-scores and a chi-square goodness-of-fit test."""
    W = np.asarray(matrix, dtype=float)
    if W.shape != report.counts.shape:
        raise ValidationError(f"matrix shape {W.shape} does not match counts {report.counts.shape}")
    entries = []
    chi2, dof = 0.0, 0
    for i in (0, 1):
        n_i = int(report.counts[i].sum())
        for j in range(W.shape[1]):
            p = W[i, j]
            obs = int(report.counts[i, j])
            exp = n_i * p
            var = n_i * p * (1 - p)
            if var > 0:
                z = (obs - exp) / math.sqrt(var)
            else:
                z = 0.0 if obs == exp else math.inf
            entries.append(EntryCheck(i, j, float(p), float(report.frequencies[i, j]), obs,
                                      exp, z, abs(z) <= z_limit))
            if exp > 0:
                chi2 += (obs - exp) ** 2 / exp
            elif obs > 0:
                chi2 = math.inf
        dof += W.shape[1] - 1
    p_value = float(stats.chi2.sf(chi2, dof)) if math.isfinite(chi2) else 0.0
    return ValidationSummary(entries, chi2, dof, p_value, p_value >= alpha)


def export_samples(params: ChannelParams, quantizer, cfg: McConfig, path,
                   include_resistance: bool = True) -> int:
    """Write samples as CSV; returns the number of data rows.

    The file appears atomically: rows go to a temporary file in the target
    directory that is renamed on success.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".samples-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(EXPORT_HEADER) + "\n")
            for block, size in _blocks(cfg.num_samples):
                x, sym, y = sample_block(params, quantizer, cfg.seed, block, size)
                base = block * BLOCK
                if include_resistance:
                    lines = [f"{base + k},{x[k]},{sym[k]},{y[k]:.9g}\n" for k in range(size)]
                else:
                    lines = [f"{base + k},{x[k]},{sym[k]},\n" for k in range(size)]
                fh.writelines(lines)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return cfg.num_samples
