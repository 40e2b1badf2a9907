"""Monte Carlo verifiers for the numerically checkable inequalities.

Each verifier estimates the left side of an inequality by simulation and
returns it next to the claimed bound, with enough standard-error context for
a caller to judge the comparison. A bound that exceeds 1 says nothing about
a probability; such points are flagged vacuous and count as passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream
from .theory import log_likelihood_ratio_rows

_BLOCK = 262_144


def _blocks(total: int) -> list[int]:
    sizes = [_BLOCK] * (total // _BLOCK)
    if total % _BLOCK:
        sizes.append(total % _BLOCK)
    return sizes


@dataclass(frozen=True)
class DominanceResult:
    """Paired comparison of a noncentral vs a central chi-square draw."""

    empirical: float
    bound: float
    stderr: float
    replications: int

    @property
    def holds_within(self) -> float:
        """How many standard errors the empirical probability clears the bound by."""
        return (self.empirical - self.bound) / self.stderr if self.stderr else math.inf


def verify_chisq_dominance(
    d: int, delta: float, replications: int, stream: RngStream
) -> DominanceResult:
    """Estimate Pr(V >= U) for independent V ~ chi2_d(delta), U ~ chi2_d.

    The claimed lower bound is 1/2 + (1/40) min(delta/sqrt(d), 1/2): adding
    signal pushes the statistic up often enough to win a coin flip by a
    quantified margin.
    """
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ValueError("d must be an integer (bound calculators take reals, verifiers do not)")
    if d < 1 or delta <= 0 or replications < 1:
        raise ValueError("need d >= 1, delta > 0, replications >= 1")
    g = stream.generator()
    root = math.sqrt(delta)
    wins = 0
    for size in _blocks(replications):
        v = (g.standard_normal(size) + root) ** 2
        if d > 1:
            v += g.chisquare(d - 1, size)
        u = g.chisquare(d, size)
        wins += int((v >= u).sum())
    p = wins / replications
    return DominanceResult(
        empirical=p,
        bound=0.5 + min(delta / math.sqrt(d), 0.5) / 40.0,
        stderr=math.sqrt(p * (1.0 - p) / replications),
        replications=replications,
    )


@dataclass(frozen=True)
class ChernoffResult:
    """Two-sided binomial deviation probability vs its Chernoff bound."""

    empirical: float
    bound: float
    stderr: float
    replications: int
    vacuous: bool


def verify_chernoff(
    p: float, k: int, delta: float, replications: int, stream: RngStream
) -> ChernoffResult:
    """Estimate Pr(|sum B_i - k p| >= delta k p) for i.i.d. Ber(p).

    The sum of k independent Ber(p) is Binomial(k, p), sampled as one draw
    per replication. Bound: 2 exp(-delta^2 k p / 3).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ValueError("k must be an integer")
    if k < 1 or not 0.0 < delta < 1.0 or replications < 1:
        raise ValueError("need k >= 1, delta in (0, 1), replications >= 1")
    g = stream.generator()
    hits = 0
    cut = delta * k * p
    for size in _blocks(replications):
        sums = g.binomial(k, p, size)
        hits += int((np.abs(sums - k * p) >= cut).sum())
    emp = hits / replications
    bound = 2.0 * math.exp(-(delta**2) * k * p / 3.0)
    return ChernoffResult(
        empirical=emp,
        bound=bound,
        stderr=math.sqrt(emp * (1.0 - emp) / replications),
        replications=replications,
        vacuous=bound >= 1.0,
    )


def subgaussian_beta(d: int, epsilon: float, sigma: float) -> float:
    """Variance proxy of the likelihood-ratio tail: d eps^4/sigma^4 in the
    high-dimension regime sigma^2/eps^2 < d/2, else 2 eps^2/sigma^2."""
    if d < 1 or epsilon < 0 or sigma <= 0:
        raise ValueError("need d >= 1, epsilon >= 0, sigma > 0")
    if epsilon == 0.0:
        return 0.0
    if sigma**2 / epsilon**2 < d / 2.0:
        return d * epsilon**4 / sigma**4
    return 2.0 * epsilon**2 / sigma**2


@dataclass(frozen=True)
class SubgaussianPoint:
    s: float
    empirical: float
    bound: float
    stderr: float
    vacuous: bool
    ok: bool


@dataclass(frozen=True)
class SubgaussianReport:
    d: int
    epsilon: float
    sigma: float
    beta: float
    replications: int
    points: tuple[SubgaussianPoint, ...]
    passed: bool


_S_GRID = tuple(i / 21.0 for i in range(1, 21))


def verify_subgaussian_tail(
    d: int, epsilon: float, sigma: float, replications: int, stream: RngStream
) -> SubgaussianReport:
    """Check the tail bound P(|L_v - 1| >= s) <= 12 exp(-s^2 / (2 beta)).

    v is a fair coin choosing null (X ~ N(0, sigma^2 I_d)) or the +-epsilon
    prior (X ~ N(epsilon R, sigma^2 I_d)); L_0 = 2/(1+L) and L_1 = 2L/(1+L)
    are the component densities relative to their mixture, both with mean 1.
    A grid point fails when the empirical tail exceeds the bound by more than
    3 standard errors; bounds >= 1 are vacuous and auto-pass.
    """
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ValueError("d must be an integer")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    beta = subgaussian_beta(d, epsilon, sigma)
    g = stream.generator()
    grid = np.array(_S_GRID)
    exceed = np.zeros(grid.size, dtype=np.int64)
    block = max(1, _BLOCK // max(1, d))
    done = 0
    while done < replications:
        size = min(block, replications - done)
        alt = g.random(size) < 0.5
        x = sigma * g.standard_normal((size, d))
        if alt.any():
            signs = g.integers(0, 2, size=(int(alt.sum()), d)) * 2 - 1
            x[alt] += epsilon * signs
        ll = log_likelihood_ratio_rows(x, epsilon, sigma)
        # |L_0 - 1| and |L_1 - 1| both equal |tanh(log(L)/2)|, so the drawn
        # component only matters through the law of X, already mixed above.
        dev = np.abs(np.tanh(ll / 2.0))
        exceed += (dev[:, None] >= grid[None, :]).sum(axis=0)
        done += size
    points = []
    all_ok = True
    for s, hits in zip(grid, exceed):
        emp = hits / replications
        bound = 12.0 * math.exp(-(s**2) / (2.0 * beta)) if beta > 0 else 0.0
        if epsilon == 0.0:
            bound = 0.0  # L is identically 1; every tail is empty
        stderr = math.sqrt(emp * (1.0 - emp) / replications)
        vacuous = bound >= 1.0
        ok = vacuous or emp <= bound + 3.0 * stderr
        all_ok &= ok
        points.append(
            SubgaussianPoint(
                s=float(s), empirical=emp, bound=bound, stderr=stderr, vacuous=vacuous, ok=ok
            )
        )
    return SubgaussianReport(
        d=d,
        epsilon=epsilon,
        sigma=sigma,
        beta=beta,
        replications=replications,
        points=tuple(points),
        passed=all_ok,
    )
