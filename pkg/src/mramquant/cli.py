"""Command-line front end.

Subcommands: bounds, design, derivatives, validate, export-samples. All
read a flat key-value config (see :mod:`mramquant.config`) and write CSV.

Exit status: 0 success, 1 Monte Carlo validation failed, 2 usage or config
error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import bounds
from .bounds import capacity, cutoff_rate, dispersion, normal_approx_blep
from .channel import Quantizer, transition_matrix
from .config import RunConfig, load_config
from .design import Criterion, OptimizerConfig, design_quantizer, surrogate_curve
from .errors import ConfigError, NumericError, ValidationError
from .simulate import McConfig, compare_to_analytic, estimate_matrix, export_samples

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

BOUNDS_HEADER = ("sigma_ratio", "criterion", "a1", "capacity", "cutoff_rate", "dispersion", "ppv_blep")
DESIGN_HEADER = ("criterion", "boundaries", "objective", "capacity", "cutoff_rate", "dispersion",
                 "ppv_blep", "iterations", "residual_derivative")
DERIV_HEADER = ("a1", "d_capacity", "d_cutoff_rate", "d_ppv_surrogate")


def fmt(x) -> str:
    """12 significant digits, locale independent."""
    return f"{float(x):.12g}"


def _fmt_boundaries(b) -> str:
    return ";".join(fmt(v) for v in b)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _emit(text: str, out) -> None:
    """Write to ``out`` atomically, or to stdout when ``out`` is None."""
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".out-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metrics(params, b, N, R):
    W = transition_matrix(params, b)
    cq, r0, vq = capacity(W), cutoff_rate(W), dispersion(W)
    return cq, r0, vq, normal_approx_blep(cq, vq, N, R)


def _bounds_rows(args):
    cfg, ratio = args
    params = cfg.params_for_ratio(ratio)
    rows = []
    for crit in cfg.criteria:
        res = design_quantizer(params, crit, OptimizerConfig(), cfg.levels, cfg.N, cfg.R)
        b = res.quantizer.boundaries
        cq, r0, vq, pb = _metrics(params, b, cfg.N, cfg.R)
        rows.append([fmt(ratio), Criterion(crit).value, _fmt_boundaries(b),
                     fmt(cq), fmt(r0), fmt(vq), fmt(pb)])
    return rows


def cmd_bounds(cfg: RunConfig) -> str:
    jobs = [(cfg, r) for r in cfg.sigma_ratio_grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_bounds_rows, jobs))
    else:
        chunks = [_bounds_rows(j) for j in jobs]
    header = BOUNDS_HEADER if cfg.levels == 2 else BOUNDS_HEADER[:2] + ("boundaries",) + BOUNDS_HEADER[3:]
    return _csv([row for chunk in chunks for row in chunk], header)


def cmd_design(cfg: RunConfig) -> str:
    params = cfg.params()
    rows = []
    for crit in cfg.criteria:
        res = design_quantizer(params, crit, OptimizerConfig(), cfg.levels, cfg.N, cfg.R)
        b = res.quantizer.boundaries
        cq, r0, vq, pb = _metrics(params, b, cfg.N, cfg.R)
        resid = res.diagnostics.get("residual_derivative", res.diagnostics.get("last_step", 0.0))
        rows.append([res.criterion.value, _fmt_boundaries(b), fmt(res.objective_value),
                     fmt(cq), fmt(r0), fmt(vq), fmt(pb), str(res.iterations), fmt(resid)])
    if cfg.boundaries is not None:
        cq, r0, vq, pb = _metrics(params, cfg.boundaries, cfg.N, cfg.R)
        rows.append(["fixed", _fmt_boundaries(cfg.boundaries), fmt(cq), fmt(cq), fmt(r0),
                     fmt(vq), fmt(pb), "0", "0"])
    return _csv(rows, DESIGN_HEADER)


def cmd_derivatives(cfg: RunConfig) -> str:
    params = cfg.params()
    opt = OptimizerConfig().resolve(params)
    a = np.linspace(params.mu0, params.mu1, cfg.a1_points)
    dc = bounds.capacity_derivative(params, a)
    dr = bounds.cutoff_rate_derivative(params, a)
    g = surrogate_curve(params, cfg.R)
    h = opt.fd_step
    dg = (g(a + h) - g(a - h)) / (2 * h)
    rows = [[fmt(x), fmt(u), fmt(v), fmt(w)] for x, u, v, w in zip(a, dc, dr, dg)]
    return _csv(rows, DERIV_HEADER)


def _quantizer_for(cfg: RunConfig, params) -> Quantizer:
    if cfg.boundaries is not None:
        return Quantizer(cfg.boundaries)
    return design_quantizer(params, cfg.criterion, OptimizerConfig(), cfg.levels, cfg.N, cfg.R).quantizer


def cmd_validate(cfg: RunConfig):
    """Returns ``(report_text, passed)``."""
    params = cfg.params()
    q = _quantizer_for(cfg, params)
    mc = McConfig(seed=cfg.seed, num_samples=cfg.samples, shards=cfg.shards)
    report = estimate_matrix(params, q, mc)
    summary = compare_to_analytic(report, transition_matrix(params, q), cfg.z_limit, cfg.alpha)
    lines = [
        f"# seed={cfg.seed} samples={cfg.samples} boundaries={_fmt_boundaries(q.boundaries)}",
        "x,symbol,analytic,empirical,count,expected,z,status",
    ]
    for e in summary.entries:
        lines.append(",".join([str(e.x), str(e.symbol), fmt(e.analytic), fmt(e.empirical),
                               str(e.count), fmt(e.expected), fmt(e.z),
                               "PASS" if e.passed else "FAIL"]))
    lines.append(f"chi2={fmt(summary.chi2)} dof={summary.dof} p_value={fmt(summary.p_value)} "
                 f"{'PASS' if summary.chi2_passed else 'FAIL'}")
    lines.append(f"raw_ber={fmt(report.raw_ber)} halfwidth95={fmt(report.raw_ber_halfwidth)}")
    lines.append(f"overall={'PASS' if summary.passed else 'FAIL'}")
    return "\n".join(lines) + "\n", summary.passed


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mramquant",
                                 description="Quantizer design for the STT-MRAM read channel.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("bounds", "sweep sigma0/mu0 and tabulate bounds for each designer"),
        ("design", "optimal thresholds for one parameter set"),
        ("derivatives", "derivative curves over the threshold"),
        ("validate", "Monte Carlo check of the analytic transition matrix"),
        ("export-samples", "write channel samples as CSV"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", help="output path (default stdout)", required=name == "export-samples")
        p.add_argument("--seed", type=int, help="Monte Carlo seed (overrides config)")
        p.add_argument("--samples", type=int, help="Monte Carlo sample count (overrides config)")
        p.add_argument("--levels", type=int, help="quantizer levels (overrides config)")
    return ap


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    over = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("invalid value for '--seed': must be an unsigned 64-bit integer")
        over["seed"] = args.seed
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("invalid value for '--samples': must be at least 1")
        over["samples"] = args.samples
    if args.levels is not None:
        if args.levels < 2 or args.levels & (args.levels - 1):
            raise ConfigError("invalid value for '--levels': must be a power of two >= 2")
        over["levels"] = args.levels
    return replace(cfg, **over)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "bounds":
            _emit(cmd_bounds(cfg), args.out)
        elif args.command == "design":
            _emit(cmd_design(cfg), args.out)
        elif args.command == "derivatives":
            _emit(cmd_derivatives(cfg), args.out)
        elif args.command == "validate":
            text, passed = cmd_validate(cfg)
            _emit(text, args.out)
            return EXIT_OK if passed else EXIT_FAIL
        else:
            params = cfg.params()
            q = _quantizer_for(cfg, params)
            n = export_samples(params, q, McConfig(cfg.seed, cfg.samples, cfg.shards), args.out)
            print(f"wrote {n} samples to {args.out}", file=sys.stderr)
    except (ConfigError, ValidationError) as exc:
        print(f"mramquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"mramquant: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"mramquant: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
