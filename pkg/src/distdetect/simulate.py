"""Monte Carlo risk estimation for the one-bit distributed tests.

Every replication is a pure function of (root_seed, grid_index,
replication_index): the signal, the observation noise, the public coin and
the randomized bits each come from their own derived stream. Replications
can therefore be sharded across any number of worker processes in any order
and still produce bit-identical results — rejection totals are integer sums.

Within one replication the m x d observation matrix is drawn in a single
call (machine j is row j) and the local tests are evaluated with vectorized
numpy/scipy; across test kinds the observation streams are shared, so at a
fixed seed every kind is evaluated on the same simulated datasets.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .protocol import (
    THEORY_RULE,
    THRESHOLD_RULES,
    LocalObservation,
    ProblemInstance,
    TestKind,
    Thresholds,
    count_threshold,
)
from .rng import RngStream, derive_stream, gaussian_vector, rademacher_vector


@dataclass(frozen=True)
class FixedVector:
    """A pinned alternative signal for worst-case probing."""

    mu: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or mu.size < 1:
            raise ValueError("mu must be a non-empty vector")
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class AlternativeSpec:
    """Alternative hypothesis: signals of norm at least rho.

    prior "rademacher" redraws mu = (rho/sqrt(d)) R each replication with
    independent +-1 coordinates (norm exactly rho); a FixedVector prior keeps
    one concrete mu, which must satisfy ||mu|| >= rho.
    """

    rho: float
    prior: str | FixedVector = "rademacher"

    def __post_init__(self) -> None:
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if isinstance(self.prior, FixedVector):
            norm = float(np.linalg.norm(self.prior.mu))
            if norm < self.rho * (1.0 - 1e-12):
                raise ValueError("fixed mu lies outside the alternative: ||mu|| < rho")
        elif self.prior != "rademacher":
            raise ValueError("prior must be 'rademacher' or a FixedVector")


@dataclass(frozen=True)
class RiskEstimate:
    """Empirical error rates of one test at one operating point."""

    type1: float
    type2: float
    tpr: float
    replications: int
    std_err_type1: float
    std_err_type2: float

    def __post_init__(self) -> None:
        for name in ("type1", "type2", "tpr"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")

    @property
    def risk(self) -> float:
        return self.type1 + self.type2


def rademacher_signal(stream: RngStream, d: int, rho: float) -> np.ndarray:
    """mu = (rho/sqrt(d)) R; its norm is exactly rho."""
    return (rho / math.sqrt(d)) * rademacher_vector(stream, d)


def generate_observations(
    mu: np.ndarray, inst: ProblemInstance, streams: list[RngStream]
) -> list[LocalObservation]:
    """m observations x_j = mu + sqrt(m/n) z_j, one rng stream per machine."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (inst.d,):
        raise ValueError(f"mu has shape {mu.shape}, expected ({inst.d},)")
    if len(streams) != inst.m:
        raise ValueError(f"expected {inst.m} streams, got {len(streams)}")
    scale = inst.noise_scale
    return [LocalObservation(mu + scale * gaussian_vector(s, inst.d)) for s in streams]


# ---------------------------------------------------------------------------
# Replication engine. One task = one contiguous replication range; the task
# function is module-level so worker processes can unpickle it.

def _signal_for_rep(
    prior_mu: np.ndarray | None, rho: float, d: int, root_seed: int, grid_index: int, rep: int
) -> np.ndarray:
    if prior_mu is not None:
        return prior_mu
    stream = derive_stream(root_seed, "alt:signal", grid_index, rep)
    return rademacher_signal(stream, d, rho)


def _count_rejections(task: tuple) -> int:
    (
        kind,
        n,
        m,
        d,
        rho,
        prior_mu,
        alt,
        rep_lo,
        rep_hi,
        grid_index,
        root_seed,
        margin,
        kappa,
    ) = task
    phase = "alt" if alt else "null"
    scale = math.sqrt(m / n)
    half_m = m / 2.0
    shape = d / 2.0
    root_d = math.sqrt(d)
    rejections = 0
    for rep in range(rep_lo, rep_hi):
        noise_gen = derive_stream(root_seed, f"{phase}:noise", grid_index, rep).generator()
        if kind == TestKind.SINGLE_MACHINE.value:
            x = scale * noise_gen.standard_normal(d)
            if alt:
                x = x + _signal_for_rep(prior_mu, rho, d, root_seed, grid_index, rep)
            stat = n / (root_d * m) * float(np.dot(x, x)) - root_d
            rejections += stat >= kappa
            continue
        x = scale * noise_gen.standard_normal((m, d))
        if alt:
            x = x + _signal_for_rep(prior_mu, rho, d, root_seed, grid_index, rep)[None, :]
        if kind == TestKind.CHI_SQ_COUNT.value:
            stats = (n / m) * np.einsum("ij,ij->i", x, x)
            p = gammainc(shape, 0.5 * stats)
            u = derive_stream(root_seed, f"{phase}:bits", grid_index, rep).generator().random(m)
            count = int((u < p).sum())
        else:
            coin = derive_stream(root_seed, f"{phase}:coin", grid_index, rep).generator()
            count = int((x @ coin.standard_normal(d) >= 0.0).sum())
        rejections += abs(count - half_m) >= margin
    return rejections


def _run_phase(
    kind: TestKind,
    inst: ProblemInstance,
    alt_spec: AlternativeSpec | None,
    replications: int,
    root_seed: int,
    grid_index: int,
    margin: float,
    kappa: float,
    workers: int,
) -> int:
    alt = alt_spec is not None
    rho = alt_spec.rho if alt else 0.0
    prior_mu = None
    if alt and isinstance(alt_spec.prior, FixedVector):
        prior_mu = alt_spec.prior.mu
    base = (kind.value, inst.n, inst.m, inst.d, rho, prior_mu, alt)
    tail = (grid_index, root_seed, margin, kappa)
    if workers <= 1:
        return _count_rejections(base + (0, replications) + tail)
    chunk = max(1, math.ceil(replications / (workers * 4)))
    tasks = [
        base + (lo, min(lo + chunk, replications)) + tail
        for lo in range(0, replications, chunk)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(_count_rejections, tasks))


def make_task(
    kind: TestKind | str,
    inst: ProblemInstance,
    alt_spec: AlternativeSpec | None,
    replications: int,
    root_seed: int,
    grid_index: int,
    threshold_rule: str = THEORY_RULE,
) -> tuple:
    """Build one picklable replication task (whole range, one phase).

    `alt_spec=None` means the null phase. Experiment drivers batch many such
    tasks through `run_tasks` with a single worker pool.
    """
    kind = TestKind(kind)
    margin, kappa = _run_thresholds(kind, inst, threshold_rule)
    alt = alt_spec is not None
    rho = alt_spec.rho if alt else 0.0
    prior_mu = None
    if alt and isinstance(alt_spec.prior, FixedVector):
        prior_mu = alt_spec.prior.mu
    return (
        kind.value,
        inst.n,
        inst.m,
        inst.d,
        rho,
        prior_mu,
        alt,
        0,
        replications,
        grid_index,
        root_seed,
        margin,
        kappa,
    )


def run_tasks(tasks: list[tuple], workers: int = 1) -> list[int]:
    """Rejection count per task; result order always matches task order."""
    if workers <= 1:
        return [_count_rejections(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_count_rejections, tasks))


def _run_thresholds(kind: TestKind, inst: ProblemInstance, rule: str) -> tuple[float, float]:
    """(count margin, single-machine cut) — whichever the kind needs."""
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"unknown threshold rule {rule!r}")
    kappa = Thresholds.for_level(inst.alpha).kappa
    if kind == TestKind.SINGLE_MACHINE:
        return math.inf, kappa
    return count_threshold(kind, inst, rule), kappa


def _stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


def estimate_risk(
    kind: TestKind | str,
    inst: ProblemInstance,
    alt: AlternativeSpec,
    replications: int,
    root_seed: int,
    *,
    threshold_rule: str = THEORY_RULE,
    workers: int = 1,
    grid_index: int = 0,
) -> RiskEstimate:
    """Estimate type-I/type-II error of one test by paired null/alternative runs.

    Deterministic given (root_seed, grid_index) for any worker count; the
    alternative redraws its signal (and the public coin) every replication.
    """
    kind = TestKind(kind)
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if isinstance(alt.prior, FixedVector) and alt.prior.mu.shape != (inst.d,):
        raise ValueError("fixed mu dimension does not match the instance")
    margin, kappa = _run_thresholds(kind, inst, threshold_rule)
    null_rej = _run_phase(kind, inst, None, replications, root_seed, grid_index, margin, kappa, workers)
    alt_rej = _run_phase(kind, inst, alt, replications, root_seed, grid_index, margin, kappa, workers)
    type1 = null_rej / replications
    tpr = alt_rej / replications
    return RiskEstimate(
        type1=type1,
        type2=1.0 - tpr,
        tpr=tpr,
        replications=replications,
        std_err_type1=_stderr(type1, replications),
        std_err_type2=_stderr(tpr, replications),
    )


def estimate_level(
    kind: TestKind | str,
    inst: ProblemInstance,
    replications: int,
    root_seed: int,
    *,
    threshold_rule: str = THEORY_RULE,
    workers: int = 1,
    grid_index: int = 0,
) -> tuple[float, float]:
    """Null rejection rate and its standard error (no alternative arm)."""
    kind = TestKind(kind)
    if replications < 1:
        raise ValueError("replications must be >= 1")
    margin, kappa = _run_thresholds(kind, inst, threshold_rule)
    rej = _run_phase(kind, inst, None, replications, root_seed, grid_index, margin, kappa, workers)
    level = rej / replications
    return level, _stderr(level, replications)


def tpr_curve(
    kind: TestKind | str,
    inst: ProblemInstance,
    rho_grid: list[float],
    replications: int,
    root_seed: int,
    *,
    prior: str | FixedVector = "rademacher",
    threshold_rule: str = THEORY_RULE,
    workers: int = 1,
) -> list[tuple[float, RiskEstimate]]:
    """One RiskEstimate per grid point; streams incorporate the grid index,
    so no two points reuse random numbers."""
    if len(rho_grid) == 0:
        raise ValueError("rho grid must be nonempty")
    if any(b < a for a, b in zip(rho_grid, rho_grid[1:])):
        raise ValueError("rho grid must be sorted ascending")
    out = []
    for i, rho in enumerate(rho_grid):
        est = estimate_risk(
            kind,
            inst,
            AlternativeSpec(rho=rho, prior=prior),
            replications,
            root_seed,
            threshold_rule=threshold_rule,
            workers=workers,
            grid_index=i,
        )
        out.append((float(rho), est))
    return out
