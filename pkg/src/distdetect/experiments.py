"""Builtin experiment sweeps, user sweeps, CSV emission and run metadata.

An experiment is a grid sweep: either the signal norm rho varies on a fixed
problem instance, or the budget n varies and (m, d, rho) follow a named
scaling rule. Each sweep writes one CSV (one row per grid point per test
kind, ascending in grid value, ties broken by test kind name) plus a sibling
key=value metadata file. Output bytes are a pure function of (spec, seed):
reruns and any worker count produce identical CSV digests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .protocol import CALIBRATED_RULE, THEORY_RULE, THRESHOLD_RULES, ProblemInstance, TestKind
from .simulate import AlternativeSpec, make_task, run_tasks
from .theory import BoundInputs, detection_threshold, risk_lower_bound, theory_constants

DEFAULT_ROOT_SEED = 20260816

CSV_FIELDS = (
    "experiment",
    "test_kind",
    "grid_value",
    "n",
    "m",
    "d",
    "rho",
    "type1",
    "type2",
    "tpr",
    "stderr_tpr",
    "replications",
    "seed",
)

FIXED_INSTANCE = "fixed-instance"
GROWING_DIMENSION = "growing-dimension"
GROWING_MACHINES = "growing-machines"
INSTANCE_RULES = (FIXED_INSTANCE, GROWING_DIMENSION, GROWING_MACHINES)


@dataclass(frozen=True)
class RhoGrid:
    lo: float
    hi: float
    points: int

    def __post_init__(self) -> None:
        if self.points < 1 or self.lo < 0 or self.hi < self.lo:
            raise ValueError("rho grid needs 0 <= lo <= hi and points >= 1")

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.lo, self.hi, self.points)]


@dataclass(frozen=True)
class NGrid:
    lo: int
    hi: int
    points: int

    def __post_init__(self) -> None:
        if self.points < 1 or self.lo < 1 or self.hi < self.lo:
            raise ValueError("n grid needs 1 <= lo <= hi and points >= 1")

    def values(self) -> list[int]:
        vals = [int(round(v)) for v in np.geomspace(self.lo, self.hi, self.points)]
        if len(set(vals)) != len(vals):
            raise ValueError("n grid rounds to duplicate integers; use fewer points")
        return vals


@dataclass(frozen=True)
class ExperimentSpec:
    """A complete, reproducible sweep description."""

    name: str
    sweep: RhoGrid | NGrid
    instance_rule: str
    tests: tuple[str, ...]
    replications: int
    alpha: float = 0.05
    root_seed: int = DEFAULT_ROOT_SEED
    threshold_rule: str = THEORY_RULE
    n: int | None = None
    m: int | None = None
    d: int | None = None

    def __post_init__(self) -> None:
        if self.instance_rule not in INSTANCE_RULES:
            raise ValueError(f"unknown instance rule {self.instance_rule!r}")
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ValueError(f"unknown threshold rule {self.threshold_rule!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.tests:
            raise ValueError("at least one test kind required")
        for t in self.tests:
            TestKind(t)
        if self.instance_rule == FIXED_INSTANCE:
            if not isinstance(self.sweep, RhoGrid):
                raise ValueError("fixed-instance experiments sweep rho")
            if None in (self.n, self.m, self.d):
                raise ValueError("fixed-instance experiments need n, m, d")
        elif not isinstance(self.sweep, NGrid):
            raise ValueError(f"{self.instance_rule} experiments sweep n")


@dataclass(frozen=True)
class GridPoint:
    index: int
    grid_value: float | int
    inst: ProblemInstance
    rho: float


def instance_for(spec: ExperimentSpec, index: int, grid_value: float | int) -> GridPoint | str:
    """Resolve one grid value to a problem instance, or a skip note."""
    if spec.instance_rule == FIXED_INSTANCE:
        inst = ProblemInstance(spec.n, spec.m, spec.d, spec.alpha)
        return GridPoint(index, grid_value, inst, float(grid_value))
    n = int(grid_value)
    if spec.instance_rule == GROWING_DIMENSION:
        d = max(1, round(n ** (2.0 / 3.0)))
        m = 500
        rho = math.log(d) * (d * m) ** 0.25 / math.sqrt(n)
    else:
        m = round(n / 10.0)
        d = 5
        rho = 2.0 * math.log(m) * math.sqrt(d / n) if m >= 1 else 0.0
    if m < 1:
        return f"n={n}: skipped (machine count {m} < 1)"
    if m > n:
        return f"n={n}: skipped (machine count {m} exceeds n)"
    return GridPoint(index, n, ProblemInstance(n, m, d, spec.alpha), rho)


def builtin_experiment_1(
    root_seed: int = DEFAULT_ROOT_SEED, replications: int = 100
) -> list[ExperimentSpec]:
    """TPR against the signal norm on the two reference configurations.

    Calibrated counting thresholds: the closed-form constants leave the
    chi-square counting test unable to reject at all for m = 50, so the
    level is set by exact binomial calibration instead.
    """
    common = dict(
        sweep=RhoGrid(0.0, 1.0, 101),
        instance_rule=FIXED_INSTANCE,
        tests=(TestKind.CHI_SQ_COUNT.value, TestKind.SIGN_COUNT.value),
        replications=replications,
        alpha=0.05,
        root_seed=root_seed,
        threshold_rule=CALIBRATED_RULE,
        n=10_000,
    )
    return [
        ExperimentSpec(name="fig1-m50-d500", m=50, d=500, **common),
        ExperimentSpec(name="fig1-m5000-d5", m=5000, d=5, **common),
    ]


def builtin_experiment_2(
    root_seed: int = DEFAULT_ROOT_SEED, replications: int = 100
) -> list[ExperimentSpec]:
    """TPR against the budget n under two scaling regimes.

    Scenario 1 grows the dimension (d = n^(2/3), m = 500) with rho on the
    detection boundary up to a log factor; scenario 2 grows the machine count
    (m = n/10, d = 5). Closed-form ("theory") thresholds.
    """
    common = dict(
        sweep=NGrid(100, 30_000, 60),
        tests=(TestKind.CHI_SQ_COUNT.value, TestKind.SIGN_COUNT.value),
        replications=replications,
        alpha=0.05,
        root_seed=root_seed,
        threshold_rule=THEORY_RULE,
    )
    return [
        ExperimentSpec(name="fig2-growing-dimension", instance_rule=GROWING_DIMENSION, **common),
        ExperimentSpec(name="fig2-growing-machines", instance_rule=GROWING_MACHINES, **common),
    ]


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise TypeError("no boolean CSV fields")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


@dataclass(frozen=True)
class CsvRow:
    experiment: str
    test_kind: str
    grid_value: float | int
    n: int
    m: int
    d: int
    rho: float
    type1: float
    type2: float
    tpr: float
    stderr_tpr: float
    replications: int
    seed: int

    def line(self) -> str:
        return ",".join(
            [self.experiment, self.test_kind]
            + [_fmt(getattr(self, f)) for f in CSV_FIELDS[2:]]
        )


def compute_rows(spec: ExperimentSpec, workers: int = 1) -> tuple[list[CsvRow], list[str]]:
    """All CSV rows for one sweep, plus skip notes for unusable grid points."""
    points: list[GridPoint] = []
    notes: list[str] = []
    for i, gv in enumerate(spec.sweep.values()):
        resolved = instance_for(spec, i, gv)
        if isinstance(resolved, str):
            notes.append(resolved)
        else:
            points.append(resolved)

    tasks = []
    keys = []
    for p in points:
        for kind in spec.tests:
            alt = AlternativeSpec(rho=p.rho, prior="rademacher")
            for alt_spec in (None, alt):
                tasks.append(
                    make_task(
                        kind,
                        p.inst,
                        alt_spec,
                        spec.replications,
                        spec.root_seed,
                        p.index,
                        spec.threshold_rule,
                    )
                )
                keys.append((p, kind, alt_spec is not None))
    counts = run_tasks(tasks, workers)

    partial: dict[tuple[int, str], dict[bool, int]] = {}
    by_key: dict[tuple[int, str], GridPoint] = {}
    for (p, kind, is_alt), count in zip(keys, counts):
        partial.setdefault((p.index, kind), {})[is_alt] = count
        by_key[(p.index, kind)] = p

    rows = []
    for (index, kind), phases in partial.items():
        p = by_key[(index, kind)]
        reps = spec.replications
        type1 = phases[False] / reps
        tpr = phases[True] / reps
        rows.append(
            CsvRow(
                experiment=spec.name,
                test_kind=kind,
                grid_value=p.grid_value,
                n=p.inst.n,
                m=p.inst.m,
                d=p.inst.d,
                rho=p.rho,
                type1=type1,
                type2=1.0 - tpr,
                tpr=tpr,
                stderr_tpr=math.sqrt(tpr * (1.0 - tpr) / reps),
                replications=reps,
                seed=spec.root_seed,
            )
        )
    rows.sort(key=lambda r: (r.grid_value, r.test_kind))
    return rows, notes


def write_csv(path: Path, rows: list[CsvRow]) -> None:
    body = "\n".join([",".join(CSV_FIELDS)] + [r.line() for r in rows]) + "\n"
    path.write_text(body, encoding="utf-8", newline="\n")


def _sweep_echo(sweep: RhoGrid | NGrid) -> str:
    tag = "rho" if isinstance(sweep, RhoGrid) else "n"
    return f"{tag}:{_fmt(sweep.lo)}:{_fmt(sweep.hi)}:{sweep.points}"


def write_metadata(path: Path, spec: ExperimentSpec, notes: list[str], csv_name: str) -> None:
    lines = [
        f"experiment={spec.name}",
        f"csv={csv_name}",
        f"sweep={_sweep_echo(spec.sweep)}",
        f"instance_rule={spec.instance_rule}",
        f"tests={','.join(spec.tests)}",
        f"replications={spec.replications}",
        f"alpha={_fmt(spec.alpha)}",
        f"threshold_rule={spec.threshold_rule}",
        f"root_seed={spec.root_seed}",
        f"version={__version__}",
        f"timestamp={datetime.now(timezone.utc).isoformat()}",
    ]
    for name in ("n", "m", "d"):
        value = getattr(spec, name)
        if value is not None:
            lines.append(f"{name}={value}")
    for note in notes:
        lines.append(f"skipped={note}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def csv_filename(spec: ExperimentSpec) -> str:
    return spec.name.replace("-", "_") + ".csv"


def run_experiment(spec: ExperimentSpec, out_dir: Path, workers: int = 1) -> Path:
    """Compute a sweep and write its CSV + metadata under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, notes = compute_rows(spec, workers)
    csv_path = out_dir / csv_filename(spec)
    write_csv(csv_path, rows)
    write_metadata(csv_path.with_suffix(".meta"), spec, notes, csv_path.name)
    return csv_path


BOUNDS_FIELDS = (
    "n",
    "m",
    "d",
    "rho_dist",
    "rho_sq_level",
    "risk_bound_at_level",
    "risk_bound_at_half_level",
)


def emit_bounds_table(
    grid: list[tuple[int, int, int]], out_path: Path, alpha: float = 0.05
) -> Path:
    """Detection boundary and risk lower bound over a grid of (n, m, d).

    rho_sq_level = c_alpha sqrt(d (m ^ d)) / n is the scaled boundary; the
    risk lower bound is evaluated at that signal strength and at half of it.
    """
    if not grid:
        raise ValueError("bounds grid must be nonempty")
    consts = theory_constants(alpha)
    lines = [",".join(BOUNDS_FIELDS)]
    for n, m, d in sorted(set(grid)):
        rho_sq = consts.c_alpha * math.sqrt(d * min(m, d)) / n
        fields = (
            n,
            m,
            d,
            detection_threshold(BoundInputs(n, m, d, 0.0, alpha)),
            rho_sq,
            risk_lower_bound(BoundInputs(n, m, d, math.sqrt(rho_sq), alpha)),
            risk_lower_bound(BoundInputs(n, m, d, math.sqrt(rho_sq / 2.0), alpha)),
        )
        lines.append(",".join(_fmt(v) for v in fields))
    out_path = Path(out_path)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out_path


class ConfigError(ValueError):
    """A sweep configuration file failed validation."""


_CONFIG_KEYS = {
    "name": str,
    "n": int,
    "m": int,
    "d": int,
    "rho_lo": float,
    "rho_hi": float,
    "rho_points": int,
    "replications": int,
    "alpha": float,
    "seed": int,
    "tests": str,
    "threshold_rule": str,
}

_CONFIG_REQUIRED = ("name", "n", "m", "d")


def parse_sweep_config(text: str) -> ExperimentSpec:
    """Parse a flat key=value sweep description (rho sweep on a fixed instance).

    Unknown keys, duplicate keys, missing required keys and malformed values
    all raise ConfigError.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    for key in _CONFIG_REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    parsed: dict = {}
    for key, value in raw.items():
        caster = _CONFIG_KEYS[key]
        try:
            parsed[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {value!r} as {caster.__name__}") from exc

    tests = tuple(t.strip() for t in parsed.get("tests", "ChiSqCount,SignCount").split(",") if t.strip())
    try:
        return ExperimentSpec(
            name=parsed["name"],
            sweep=RhoGrid(
                parsed.get("rho_lo", 0.0), parsed.get("rho_hi", 1.0), parsed.get("rho_points", 101)
            ),
            instance_rule=FIXED_INSTANCE,
            tests=tests,
            replications=parsed.get("replications", 100),
            alpha=parsed.get("alpha", 0.05),
            root_seed=parsed.get("seed", DEFAULT_ROOT_SEED),
            threshold_rule=parsed.get("threshold_rule", THEORY_RULE),
            n=parsed["n"],
            m=parsed["m"],
            d=parsed["d"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(
    spec: ExperimentSpec,
    root_seed: int | None = None,
    replications: int | None = None,
) -> ExperimentSpec:
    """Spec with CLI-level overrides applied (None keeps the spec's value)."""
    changes = {}
    if root_seed is not None:
        changes["root_seed"] = root_seed
    if replications is not None:
        changes["replications"] = replications
    return replace(spec, **changes) if changes else spec
