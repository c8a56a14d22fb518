"""Flat ``key = value`` configuration files.

One key per line, ``#`` starts a comment, blank lines are ignored. Lists
are comma separated. ``P0`` and ``Pr`` have no defaults and must be given.

Keys
----
P0, Pr              required write-error (1->0) and read-disturb rates
P1                  write-error rate 0->1 (default 2e-4)
mu0, mu1            mean resistances in kOhm (default 1, 2)
spread_mode         ``relative``: sigma_i = ratio * mu_i (default);
                    ``equal``: sigma0 = sigma1 = ratio * mu0
sigma_ratio         sigma0/mu0 for single-point commands (default 0.12)
sigma0, sigma1      absolute spreads in kOhm; override sigma_ratio when both set
sigma_ratio_grid    sweep grid for ``bounds`` (default 0.08,0.09,...,0.14)
criteria            designers for ``bounds``/``design`` (default: all four)
criterion           designer for ``validate``/``export-samples`` (default capacity)
boundaries          fixed quantizer boundaries, kOhm (optional)
N, R                blocklength and rate of the finite-length criterion
                    (default 128, 110/128)
levels              quantizer levels, power of two (default 2)
a1_points           grid size of ``derivatives`` (default 201)
seed, samples, shards   Monte Carlo settings (default 1, 1000000, 1)
z_limit, alpha      validation thresholds (default 4, 1e-3)
workers             processes used by ``bounds`` sweeps (default 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .channel import ChannelParams
from .design import DEFAULT_N, DEFAULT_R, Criterion
from .errors import ConfigError, ValidationError

DEFAULT_GRID = (0.08, 0.09, 0.10, 0.11, 0.12, 0.13, 0.14)


@dataclass
class RunConfig:
    P0: float
    Pr: float
    P1: float = 2e-4
    mu0: float = 1.0
    mu1: float = 2.0
    spread_mode: str = "relative"
    sigma_ratio: float = 0.12
    sigma0: Optional[float] = None
    sigma1: Optional[float] = None
    sigma_ratio_grid: tuple = DEFAULT_GRID
    criteria: tuple = tuple(Criterion)
    criterion: Criterion = Criterion.CAPACITY
    boundaries: Optional[tuple] = None
    N: int = DEFAULT_N
    R: float = DEFAULT_R
    levels: int = 2
    a1_points: int = 201
    seed: int = 1
    samples: int = 1_000_000
    shards: int = 1
    z_limit: float = 4.0
    alpha: float = 1e-3
    workers: int = 1

    def params_for_ratio(self, ratio: float) -> ChannelParams:
        if self.spread_mode == "equal":
            s0 = s1 = ratio * self.mu0
        else:
            s0, s1 = ratio * self.mu0, ratio * self.mu1
        return ChannelParams(self.P0, self.P1, self.Pr, self.mu0, self.mu1, s0, s1)

    def params(self) -> ChannelParams:
        """Single-point channel: absolute spreads if given, else ``sigma_ratio``."""
        if self.sigma0 is not None:
            return ChannelParams(self.P0, self.P1, self.Pr, self.mu0, self.mu1,
                                 self.sigma0, self.sigma1)
        return self.params_for_ratio(self.sigma_ratio)


def _float(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not a finite number")
    return x


def _int(v):
    try:
        return int(v)
    except ValueError:
        x = float(v)
        if x != int(x):
            raise ValueError("not an integer") from None
        return int(x)


def _floats(v):
    return tuple(_float(s) for s in v.split(",") if s.strip())


def _criteria(v):
    return tuple(Criterion(s.strip()) for s in v.split(",") if s.strip())


def _spread(v):
    if v not in ("relative", "equal"):
        raise ValueError("expected 'relative' or 'equal'")
    return v


_PARSERS = {
    "P0": _float, "Pr": _float, "P1": _float, "mu0": _float, "mu1": _float,
    "spread_mode": _spread, "sigma_ratio": _float, "sigma0": _float, "sigma1": _float,
    "sigma_ratio_grid": _floats, "criteria": _criteria, "criterion": Criterion,
    "boundaries": _floats, "N": _int, "R": _float, "levels": _int, "a1_points": _int,
    "seed": _int, "samples": _int, "shards": _int, "z_limit": _float, "alpha": _float,
    "workers": _int,
}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse config text; every problem raises a one-line :class:`ConfigError`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: invalid value for {key!r}: {value!r} ({exc})") from None
    for key in ("P0", "Pr"):
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")
    cfg = RunConfig(**values)
    _validate(cfg, source)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config(text, str(path))


def _validate(cfg: RunConfig, source: str) -> None:
    def fail(key, msg):
        raise ConfigError(f"{source}: invalid value for {key!r}: {msg}")

    grid = cfg.sigma_ratio_grid
    if not grid:
        fail("sigma_ratio_grid", "empty grid")
    if any(not 0 < g < 0.5 for g in grid):
        fail("sigma_ratio_grid", "values must lie in (0, 0.5)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        fail("sigma_ratio_grid", "values must be strictly increasing")
    if not 0 < cfg.sigma_ratio < 0.5:
        fail("sigma_ratio", "must lie in (0, 0.5)")
    if (cfg.sigma0 is None) != (cfg.sigma1 is None):
        fail("sigma0" if cfg.sigma0 is None else "sigma1", "sigma0 and sigma1 must be given together")
    if not cfg.criteria:
        fail("criteria", "empty list")
    if not 0 < cfg.R < 1:
        fail("R", "must lie in (0, 1)")
    if cfg.N < 1:
        fail("N", "must be a positive integer")
    if cfg.levels < 2 or cfg.levels & (cfg.levels - 1):
        fail("levels", "must be a power of two >= 2")
    if cfg.a1_points < 2:
        fail("a1_points", "must be at least 2")
    if not 0 <= cfg.seed < 2 ** 64:
        fail("seed", "must be an unsigned 64-bit integer")
    for key in ("samples", "shards", "workers"):
        if getattr(cfg, key) < 1:
            fail(key, "must be at least 1")
    if cfg.z_limit <= 0:
        fail("z_limit", "must be positive")
    if not 0 < cfg.alpha < 1:
        fail("alpha", "must lie in (0, 1)")
    try:
        cfg.params()
        for g in grid:
            cfg.params_for_ratio(g)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid channel parameters: {exc}") from None
    if cfg.boundaries is not None:
        if not cfg.boundaries or any(b <= a for a, b in zip(cfg.boundaries, cfg.boundaries[1:])):
            fail("boundaries", "must be a non-empty strictly increasing list")
