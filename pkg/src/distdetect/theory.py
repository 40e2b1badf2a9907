"""Closed-form detection-boundary calculators and likelihood-ratio tools.

Everything here is a pure function of the problem sizes. The calculators
accept real-valued machine counts and dimensions so callers can draw smooth
curves; the Monte Carlo verifiers (verify module) require integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocol import Thresholds


@dataclass(frozen=True)
class BoundInputs:
    """Problem sizes plus the derived per-coordinate and per-machine signal.

    epsilon = rho / sqrt(d) is the per-coordinate signal magnitude under the
    +-epsilon prior; delta = (n/m) rho^2 is the noncentrality a single
    machine's chi-square statistic sees at ||mu||^2 = rho^2.
    """

    n: float
    m: float
    d: float
    rho: float
    alpha: float = 0.05

    def __post_init__(self) -> None:
        for name in ("n", "m", "d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def epsilon(self) -> float:
        return self.rho / math.sqrt(self.d)

    @property
    def delta(self) -> float:
        return self.n * self.rho**2 / self.m


@dataclass(frozen=True)
class TheoryConstants:
    """Level-dependent constants of the detection boundary."""

    c_alpha: float
    M_alpha: float
    C_alpha: float
    D_bar: float


def theory_constants(alpha: float, D_bar: float = 100.0) -> TheoryConstants:
    """Evaluate the boundary constants exactly as defined.

    c_alpha = (1-alpha)^2 / 384 scales the lower-bound threshold; M_alpha and
    C_alpha are the (huge, unoptimized) machine-count and threshold constants
    of the guarantee for the one-bit tests. D_bar is the free dimension
    constant, configurable because only its existence is pinned down.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if D_bar < 1:
        raise ValueError("D_bar must be >= 1")
    thr = Thresholds.for_level(alpha)
    kb, kt, k = thr.kappa_bar, thr.kappa_tilde, thr.kappa
    M_alpha = max(
        (2**5 * 5 * kb) ** 2,
        D_bar,
        36.0 * kt**2,
        4.0 * math.e**2 * math.pi * kt**2 * math.sqrt(alpha),
    )
    C_alpha = max(
        2**4 * M_alpha**2 * k**2,
        2.0 * (1.0 + math.sqrt(2.0)) * k * M_alpha,
        80.0 * kb,
        2**12 * math.e**2 * kt**2 * alpha**-2.5,
    )
    return TheoryConstants(
        c_alpha=(1.0 - alpha) ** 2 / 384.0,
        M_alpha=M_alpha,
        C_alpha=C_alpha,
        D_bar=D_bar,
    )


def detection_threshold(inputs: BoundInputs) -> float:
    """Unit-constant detection boundary rho_* = sqrt(min(sqrt(d m)/n, d/n)).

    Increasing the machine count m tightens the local noise and helps until
    m reaches d; past that point the boundary is flat in m (the elbow).
    """
    n, m, d = inputs.n, inputs.m, inputs.d
    return math.sqrt(min(math.sqrt(d * m) / n, d / n))


def sdpi_beta(inputs: BoundInputs) -> float:
    """Contraction coefficient of the one-bit channel at signal rho.

    Piecewise in the per-machine noncentrality: n^2 rho^4 / (d m^2) in the
    small-signal regime m/(n rho^2) < 1/2, else 2 n rho^2 / (d m); the two
    branches agree (both 4/d) on the boundary m = n rho^2 / 2.
    """
    if not inputs.rho > 0:
        raise ValueError("sdpi_beta requires rho > 0")
    n, m, d, rho = inputs.n, inputs.m, inputs.d, inputs.rho
    if m / (n * rho**2) < 0.5:
        return n**2 * rho**4 / (d * m**2)
    return 2.0 * n * rho**2 / (d * m)


def risk_lower_bound(inputs: BoundInputs) -> float:
    """Minimax testing-risk lower bound, clamped to [0, 1].

    max{0, 1 - 4 sqrt(6 (n rho^2/d) (max{n rho^2/m, 2} + 8/3))}; a negative
    raw value carries no information, hence the clamp.
    """
    n, m, d, rho = inputs.n, inputs.m, inputs.d, inputs.rho
    s = n * rho**2
    raw = 1.0 - 4.0 * math.sqrt(6.0 * (s / d) * (max(s / m, 2.0) + 8.0 / 3.0))
    return max(0.0, raw)


def _log_cosh(t: np.ndarray) -> np.ndarray:
    """Numerically safe log(cosh(t)) = |t| + log1p(exp(-2|t|)) - log 2."""
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def log_likelihood_ratio_rows(x: np.ndarray, epsilon: float, sigma: float) -> np.ndarray:
    """Row-wise log likelihood ratio of the +-epsilon prior mixture vs null.

    For each row x in R^d: sum_i log cosh(x_i epsilon / sigma^2)
    - d epsilon^2 / (2 sigma^2). Vectorized workhorse for the verifiers.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    return _log_cosh(x * (epsilon / sigma**2)).sum(axis=1) - d * epsilon**2 / (2.0 * sigma**2)


def log_likelihood_ratio(x: np.ndarray, epsilon: float, sigma: float) -> float:
    """Log of `likelihood_ratio` (always finite for finite inputs)."""
    return float(log_likelihood_ratio_rows(np.asarray(x, dtype=float), epsilon, sigma)[0])


def likelihood_ratio(x: np.ndarray, epsilon: float, sigma: float) -> float:
    """prod_i exp(-epsilon^2/(2 sigma^2)) cosh(x_i epsilon / sigma^2).

    Evaluated through the log to avoid intermediate overflow; the final
    exponential may still be infinite for extreme inputs, which is the
    mathematically correct limit at double precision.
    """
    ll = log_likelihood_ratio(x, epsilon, sigma)
    if ll > _EXP_OVERFLOW:
        return math.inf
    return math.exp(ll)


_EXP_OVERFLOW = 709.0
