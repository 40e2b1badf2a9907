"""Command-line driver.

Subcommands: `experiment1` and `experiment2` reproduce the builtin sweeps,
`sweep` runs a user-defined rho sweep from a config file, `bounds` tabulates
the closed-form detection boundary, and `verify` runs the Monte Carlo lemma
checkers. Exit codes: 0 success, 2 invalid spec/config, 3 I/O failure,
4 verifier violation.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import click

from . import __version__
from .experiments import (
    DEFAULT_ROOT_SEED,
    ConfigError,
    builtin_experiment_1,
    builtin_experiment_2,
    emit_bounds_table,
    parse_sweep_config,
    run_experiment,
    with_overrides,
)
from .rng import derive_stream
from .verify import verify_chernoff, verify_chisq_dominance, verify_subgaussian_tail

EXIT_INVALID_SPEC = 2
EXIT_IO = 3
EXIT_VERIFY_FAILED = 4


def _run_specs(specs, out, workers) -> None:
    for spec in specs:
        try:
            path = run_experiment(spec, Path(out), workers)
        except OSError as exc:
            click.echo(f"error: cannot write results for {spec.name}: {exc}", err=True)
            sys.exit(EXIT_IO)
        click.echo(f"{spec.name}: wrote {path}")


def _common_options(fn):
    fn = click.option("--seed", type=int, default=None, help="Root seed (64-bit unsigned).")(fn)
    fn = click.option("--replications", type=int, default=None, help="Replications per grid point.")(fn)
    fn = click.option("--workers", type=int, default=1, show_default=True, help="Worker processes.")(fn)
    fn = click.option("--out", type=click.Path(), default="results", show_default=True, help="Output directory.")(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="distdetect")
def main() -> None:
    """Monte Carlo harness for one-bit distributed signal detection."""


@main.command("experiment1")
@_common_options
def experiment1(seed, replications, workers, out) -> None:
    """TPR vs signal norm on the (m=50, d=500) and (m=5000, d=5) setups."""
    specs = [with_overrides(s, seed, replications) for s in builtin_experiment_1()]
    _run_specs(specs, out, workers)


@main.command("experiment2")
@_common_options
def experiment2(seed, replications, workers, out) -> None:
    """TPR vs budget n under the growing-dimension and growing-machines rules."""
    specs = [with_overrides(s, seed, replications) for s in builtin_experiment_2()]
    _run_specs(specs, out, workers)


@main.command("sweep")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@_common_options
def sweep(config_path, seed, replications, workers, out) -> None:
    """Run a rho sweep described by a flat key=value config file."""
    try:
        spec = parse_sweep_config(Path(config_path).read_text(encoding="utf-8"))
    except OSError as exc:
        click.echo(f"error: cannot read config: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ConfigError as exc:
        click.echo(f"error: invalid config: {exc}", err=True)
        sys.exit(EXIT_INVALID_SPEC)
    _run_specs([with_overrides(spec, seed, replications)], out, workers)


@main.command("bounds")
@click.option("--n", type=int, default=10_000, show_default=True)
@click.option("--d", "dims", default="5,50,500", show_default=True, help="Comma-separated dimensions.")
@click.option("--m-points", type=int, default=25, show_default=True, help="Machine-count grid size.")
@click.option("--out", type=click.Path(), default="bounds.csv", show_default=True)
def bounds(n, dims, m_points, out) -> None:
    """Tabulate the detection boundary over a machine-count grid."""
    try:
        d_values = [int(v) for v in dims.split(",") if v.strip()]
        if not d_values or n < 1 or m_points < 2:
            raise ValueError("need n >= 1, m-points >= 2 and at least one dimension")
    except ValueError as exc:
        click.echo(f"error: invalid grid: {exc}", err=True)
        sys.exit(EXIT_INVALID_SPEC)
    import numpy as np

    m_values = sorted(
        {int(round(v)) for v in np.geomspace(1, n, m_points)} | set(d_values)
    )
    grid = [(n, m, d) for d in d_values for m in m_values if m <= n]
    try:
        path = emit_bounds_table(grid, Path(out))
    except OSError as exc:
        click.echo(f"error: cannot write bounds table: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"wrote {path}")


_DOMINANCE_DIMS = (100, 400, 1000)
_CHERNOFF_GRID = tuple(
    (k, p, delta) for k in (10, 100, 1000) for p in (0.1, 0.5) for delta in (0.1, 0.3, 0.9)
)
_SUBGAUSSIAN_CONFIGS = ((100, 0.05, 1.0), (500, 0.0447, 1.0), (20, 0.3, 1.0))


def run_verifier_suite(replications: int, root_seed: int, echo=click.echo) -> bool:
    """Run all lemma verifiers; report one line per check. True iff all hold."""
    ok = True

    echo("noncentral dominance: Pr(V >= U) vs 1/2 + min(delta/sqrt(d), 1/2)/40")
    idx = 0
    for d in _DOMINANCE_DIMS:
        for delta in (1.0, math.sqrt(d) / 4.0, math.sqrt(d) / 2.0, 10.0 * math.sqrt(d)):
            res = verify_chisq_dominance(
                d, delta, replications, derive_stream(root_seed, "verify:dominance", idx)
            )
            idx += 1
            good = res.empirical >= res.bound - 3.0 * res.stderr
            ok &= good
            echo(
                f"  d={d:<5d} delta={delta:<9.4g} empirical={res.empirical:.5f} "
                f"bound={res.bound:.5f} {'ok' if good else 'VIOLATED'}"
            )

    echo("binomial deviation: empirical tail vs 2 exp(-delta^2 k p / 3)")
    for i, (k, p, delta) in enumerate(_CHERNOFF_GRID):
        res = verify_chernoff(p, k, delta, replications, derive_stream(root_seed, "verify:chernoff", i))
        good = res.vacuous or res.empirical <= res.bound + 3.0 * res.stderr
        ok &= good
        label = "vacuous" if res.vacuous else ("ok" if good else "VIOLATED")
        echo(
            f"  k={k:<5d} p={p:<4.2g} delta={delta:<4.2g} empirical={res.empirical:.5f} "
            f"bound={res.bound:.5f} {label}"
        )

    echo("likelihood-ratio tails: empirical vs 12 exp(-s^2/(2 beta))")
    for i, (d, eps, sigma) in enumerate(_SUBGAUSSIAN_CONFIGS):
        rep = verify_subgaussian_tail(
            d, eps, sigma, replications, derive_stream(root_seed, "verify:subgaussian", i)
        )
        ok &= rep.passed
        worst = min(
            (pt.bound + 3.0 * pt.stderr - pt.empirical for pt in rep.points if not pt.vacuous),
            default=math.inf,
        )
        echo(
            f"  d={d:<5d} eps={eps:<7.4g} beta={rep.beta:.5g} "
            f"min-slack={worst:.4g} {'ok' if rep.passed else 'VIOLATED'}"
        )
    return ok


@main.command("verify")
@click.option("--replications", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_ROOT_SEED, show_default=True)
def verify(replications, seed) -> None:
    """Monte Carlo checks of the quantitative lemmas behind the bounds."""
    if replications < 1000:
        click.echo("error: need at least 1000 replications for meaningful checks", err=True)
        sys.exit(EXIT_INVALID_SPEC)
    if not run_verifier_suite(replications, seed):
        click.echo("verifier FAILED", err=True)
        sys.exit(EXIT_VERIFY_FAILED)
    click.echo("all verifiers passed")


if __name__ == "__main__":
    main()
