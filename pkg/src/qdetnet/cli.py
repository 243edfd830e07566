"""Command-line front end: sweeps, single-point reports, verification, probe
optimization.

Output is a pure function of the command line, the optional config file and
the seed; numeric fields are printed with 17 significant digits so repeated
runs are byte-identical.

Exit codes: 0 success, 1 verification failure, 2 usage/parameter error,
3 I/O error.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from . import strategies
from .network import PhaseChannel, minimize_two_detector_overlap
from .strategies import DiscriminationReport, guessing_baseline
from .verify import GRID_PRESETS, probe_search, run_verification_suite

CONFIG_ENV_VAR = "QDETNET_CONFIG"

SWEEP_FIELDS = ("strategy", "N", "k", "theta", "p", "probe",
                "closed_form_success", "numeric_success", "failure_prob",
                "error_prob", "abs_diff", "guessing_baseline", "degenerate")

STRATEGY_CHOICES = ("min_error", "unambiguous", "one_or_none", "pgm", "pgm_null")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, str)):
        return str(value)
    return f"{value:.17g}"


def _load_config() -> dict[str, str]:
    """Flat key = value file named by the environment, flags take precedence."""
    path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    config: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, value = line.split("=", 1)
                config[key.strip()] = value.strip()
    except OSError as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    return config


def _merge(flag_value, config: dict[str, str], key: str, fallback):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return fallback


def _parse_values(spec: str, name: str, degrees: bool = False) -> list[float]:
    """Comma lists or an inclusive start:stop:count range."""
    spec = str(spec).strip()
    if not spec:
        return []
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError("range must be start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("range count must be >= 1")
            values = [start] if count == 1 else list(np.linspace(start, stop, count))
        else:
            values = [float(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise click.UsageError(f"invalid {name} specification {spec!r}: {exc}")
    if degrees:
        values = [v * math.pi / 180.0 for v in values]
    return values


def _parse_ints(spec: str, name: str) -> list[int]:
    try:
        return [int(tok) for tok in str(spec).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise click.UsageError(f"invalid {name} specification {spec!r}: {exc}")


def _open_out(path: str):
    if path in ("-", ""):
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        click.echo(f"cannot write {path}: {exc}", err=True)
        sys.exit(3)


def _strategy_row(strategy: str, n: int, k: int | None, theta: float,
                  p: float | None, probe: str) -> dict:
    """One sweep row; raises click.UsageError on invalid parameters."""
    try:
        if strategy == "min_error":
            if n != 2:
                raise ValueError("min_error is a two-detector strategy")
            report, _ = strategies.min_error_two_detector(theta)
            baseline = guessing_baseline(2)
        elif strategy == "unambiguous":
            if n == 2:
                report, _ = strategies.unambiguous_two_detector(theta)
            else:
                report, _ = strategies.unambiguous_symmetric(n, theta)
            baseline = guessing_baseline(n)
        elif strategy == "one_or_none":
            if n != 2:
                raise ValueError("one_or_none is a two-detector strategy")
            if p is None:
                raise ValueError("one_or_none needs a prior p (probability that no detector fired)")
            report, _ = strategies.one_or_none(p, theta)
            baseline = guessing_baseline(1, p)
        elif strategy == "pgm":
            report, _ = strategies.pgm_symmetric(n, theta, probe_kind=probe, k=k)
            baseline = guessing_baseline(n)
        elif strategy == "pgm_null":
            if p is None:
                raise ValueError("pgm_null needs the null prior p")
            report, _ = strategies.pgm_with_null(n, theta, p)
            baseline = guessing_baseline(n, p)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
    except ValueError as exc:
        raise click.UsageError(str(exc))
    return _row_from_report(report, probe if strategy == "pgm" else "", baseline)


def _row_from_report(report: DiscriminationReport, probe: str, baseline: float) -> dict:
    return {
        "strategy": report.strategy,
        "N": report.params.n,
        "k": report.params.k,
        "theta": report.params.theta,
        "p": report.params.p,
        "probe": probe,
        "closed_form_success": report.closed_form_success,
        "numeric_success": report.numeric_success,
        "failure_prob": report.failure_prob,
        "error_prob": report.error_prob,
        "abs_diff": report.abs_diff,
        "guessing_baseline": baseline,
        "degenerate": report.degenerate,
    }


def _emit_rows(rows: list[dict], fmt: str, out_path: str) -> None:
    rows.sort(key=lambda r: (r["strategy"], r["N"], r["theta"],
                             -1.0 if r["p"] is None else r["p"]))
    stream, should_close = _open_out(out_path)
    try:
        if fmt == "csv":
            stream.write(",".join(SWEEP_FIELDS) + "\n")
            for row in rows:
                stream.write(",".join(_fmt(row[f]) for f in SWEEP_FIELDS) + "\n")
        else:
            payload = []
            for row in rows:
                entry = dict(row)
                entry["degenerate"] = bool(entry["degenerate"])
                payload.append(entry)
            stream.write(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        click.echo(f"write failed: {exc}", err=True)
        sys.exit(3)
    finally:
        if should_close:
            stream.close()


def _sweep_impl(strategy, n_spec, k, theta_spec, p_spec, probe, fmt, out, degrees):
    config = _load_config()
    strategy = _merge(strategy, config, "strategy", None)
    if strategy is None:
        raise click.UsageError("missing --strategy")
    if strategy not in STRATEGY_CHOICES:
        raise click.UsageError(f"unknown strategy {strategy!r}; choose from {STRATEGY_CHOICES}")
    n_spec = _merge(n_spec, config, "n", "2")
    theta_spec = _merge(theta_spec, config, "theta", None)
    if theta_spec is None:
        raise click.UsageError("missing --theta")
    p_spec = _merge(p_spec, config, "p", "")
    probe = _merge(probe, config, "probe", "entangled")
    fmt = _merge(fmt, config, "format", "csv")
    out = _merge(out, config, "out", "-")
    if probe not in ("entangled", "separable"):
        raise click.UsageError(f"unknown probe {probe!r}")
    if fmt not in ("csv", "json"):
        raise click.UsageError(f"unknown format {fmt!r}")

    n_values = _parse_ints(n_spec, "n")
    theta_values = _parse_values(theta_spec, "theta", degrees=degrees)
    p_values = _parse_values(p_spec, "p")
    if not n_values:
        raise click.UsageError("no detector counts given")
    if not theta_values:
        raise click.UsageError("no phase values given")
    for n in n_values:
        if n < 2:
            raise click.UsageError(f"detector count n={n} must be >= 2")
    for theta in theta_values:
        if abs(theta) > math.pi / 4 + 1e-12:
            raise click.UsageError(f"theta={theta!r} outside [-pi/4, pi/4]")
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise click.UsageError(f"p={p!r} outside [0, 1]")

    uses_p = strategy in ("one_or_none", "pgm_null")
    if uses_p and not p_values:
        raise click.UsageError(f"{strategy} needs at least one --p value")
    p_grid: list[float | None] = list(p_values) if uses_p else [None]

    rows = []
    for n in n_values:
        for theta in theta_values:
            for p in p_grid:
                rows.append(_strategy_row(strategy, n, k, theta, p, probe))
    _emit_rows(rows, fmt, out)
    return 0


@click.group()
def main() -> None:
    """Detector-network discrimination toolkit."""


@main.command()
@click.option("--strategy", default=None, help=f"one of {', '.join(STRATEGY_CHOICES)}")
@click.option("--n", "n_spec", default=None, help="detector counts, comma separated")
@click.option("--k", type=int, default=None, help="probe excitation count (pgm only)")
@click.option("--theta", "theta_spec", default=None,
              help="phases: comma list or inclusive start:stop:count")
@click.option("--p", "p_spec", default=None, help="priors, comma separated")
@click.option("--probe", default=None, help="entangled or separable (pgm only)")
@click.option("--format", "fmt", default=None, help="csv or json")
@click.option("--out", default=None, help="output path, - for stdout")
@click.option("--degrees", is_flag=True, help="interpret theta values as degrees")
def sweep(strategy, n_spec, k, theta_spec, p_spec, probe, fmt, out, degrees):
    """Evaluate a strategy over a parameter grid and emit a table."""
    _sweep_impl(strategy, n_spec, k, theta_spec, p_spec, probe, fmt, out, degrees)


@main.command()
@click.option("--strategy", default=None)
@click.option("--n", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--p", type=float, default=None)
@click.option("--probe", default=None)
@click.option("--format", "fmt", default=None)
@click.option("--out", default=None)
@click.option("--degrees", is_flag=True)
def report(strategy, n, k, theta, p, probe, fmt, out, degrees):
    """Single-point variant of sweep: one parameter tuple, one row."""
    _sweep_impl(strategy,
                None if n is None else str(n),
                k,
                None if theta is None else repr(theta),
                None if p is None else repr(p),
                probe, fmt, out, degrees)


@main.command()
@click.option("--preset", default="default", help="quick, default or deep")
@click.option("--tolerance", type=float, default=None,
              help="override the closed-form comparison tolerance")
@click.option("--out", default="-")
def verify(preset, tolerance, out):
    """Run the verification suite and report PASS/FAIL per record."""
    if preset not in GRID_PRESETS:
        raise click.UsageError(f"unknown preset {preset!r}; choose from {sorted(GRID_PRESETS)}")
    records = run_verification_suite(GRID_PRESETS[preset], comparison_tol=tolerance)
    stream, should_close = _open_out(out)
    try:
        passed = 0
        for rec in records:
            status = "SKIP" if rec.skipped else ("PASS" if rec.passed else "FAIL")
            if rec.passed:
                passed += 1
            line = (f"{status} {rec.check_name} [{rec.param_str()}] "
                    f"expected={_fmt(rec.expected)} observed={_fmt(rec.observed)} "
                    f"tol={_fmt(rec.tolerance)}")
            if rec.note:
                line += f" ({rec.note})"
            stream.write(line + "\n")
        stream.write(f"PASS {passed}/{len(records)}\n")
    except OSError as exc:
        click.echo(f"write failed: {exc}", err=True)
        sys.exit(3)
    finally:
        if should_close:
            stream.close()
    if passed != len(records):
        sys.exit(1)


@main.command()
@click.option("--n", type=int, default=2)
@click.option("--theta", type=float, required=True)
@click.option("--objective", default="min_overlap",
              help="min_overlap, which_detector or one_or_none")
@click.option("--restarts", type=int, default=200)
@click.option("--seed", type=int, default=20240601)
@click.option("--degrees", is_flag=True)
def optimize(n, theta, objective, restarts, seed, degrees):
    """Search probe space; for two detectors, compare against the analytic optimum."""
    if degrees:
        theta = theta * math.pi / 180.0
    if not 2 <= n <= 6:
        raise click.UsageError(f"unsupported detector count n={n}; choose 2..6")
    if objective == "min_overlap":
        if n != 2:
            raise click.UsageError("min_overlap is defined for n=2")
        try:
            coeffs = minimize_two_detector_overlap(PhaseChannel(theta),
                                                   restarts=restarts, seed=seed)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        click.echo(f"objective=min_overlap n=2 theta={_fmt(theta)} seed={seed} restarts={restarts}")
        click.echo(f"min_abs_overlap={_fmt(abs(coeffs.z))}")
        click.echo(f"analytic_reference={_fmt(abs(math.cos(2.0 * theta)))}")
        for name, c in (("c_pp", coeffs.c_pp), ("c_pm", coeffs.c_pm),
                        ("c_mp", coeffs.c_mp), ("c_mm", coeffs.c_mm)):
            click.echo(f"{name}={_fmt(c.real)}{'+' if c.imag >= 0 else '-'}{_fmt(abs(c.imag))}j")
        return
    if objective not in ("which_detector", "one_or_none"):
        raise click.UsageError(f"unknown objective {objective!r}")
    key = "which_detector_pairwise" if objective == "which_detector" else "one_or_none_overlap"
    try:
        record = probe_search(n, theta, key, budget=restarts, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"objective={objective} n={n} theta={_fmt(theta)} seed={seed} restarts={restarts}")
    click.echo(f"expected={_fmt(record.expected)} observed={_fmt(record.observed)} "
               f"tol={_fmt(record.tolerance)} passed={record.passed}")
    if record.note:
        click.echo(record.note)
    if not record.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
