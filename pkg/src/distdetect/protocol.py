"""One-bit distributed tests: local statistics, local tests, aggregation.

Data sits on m machines; machine j observes x = mu + sqrt(m/n) * z with
standard normal noise z in R^d. Each machine sends a single bit to the
aggregator, which decides between "no signal" (mu = 0) and "signal present"
(||mu|| >= rho). Three tests are implemented:

* ChiSqCount — each machine draws a Bernoulli bit with success probability
  F_chi2_d((n/m) ||x||^2) and the center counts bits (suited to m <= d);
* SignCount — all machines share one public random direction u and send the
  sign bit of u.x; the center counts bits (suited to m > d);
* SingleMachine — the classical chi-square test on machine 1's data alone.

The counting tests reject when |sum_j(bit_j - 1/2)| >= t. Two threshold
policies are provided for t: the closed-form constants ("theory",
t = sqrt(m)*kappa) and an exact binomial calibration ("calibrated", the
smallest count threshold whose null rejection probability is <= alpha).
The closed-form constants are conservative enough that for small m the
counting test cannot reject at all; the calibrated rule is what a practical
deployment would use, so both are first-class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.stats import binom as _binom

from .chisq import chi_square_cdf
from .rng import RngStream, bernoulli, gaussian_vector

THEORY_RULE = "theory"
CALIBRATED_RULE = "calibrated"
THRESHOLD_RULES = (THEORY_RULE, CALIBRATED_RULE)


class TestKind(str, Enum):
    CHI_SQ_COUNT = "ChiSqCount"
    SIGN_COUNT = "SignCount"
    SINGLE_MACHINE = "SingleMachine"


@dataclass(frozen=True)
class ProblemInstance:
    """Problem sizes: signal-to-noise budget n, machines m, dimension d."""

    n: int
    m: int
    d: int
    alpha: float = 0.05

    def __post_init__(self) -> None:
        for name in ("n", "m", "d"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.m > self.n:
            raise ValueError("m must not exceed n (one observation unit per machine)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def noise_scale(self) -> float:
        """Per-coordinate noise standard deviation sqrt(m/n)."""
        return math.sqrt(self.m / self.n)


@dataclass(frozen=True)
class Thresholds:
    """Rejection constants for the three tests at a fixed level alpha."""

    kappa_bar: float
    kappa_tilde: float
    kappa: float

    @classmethod
    def for_level(cls, alpha: float) -> "Thresholds":
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        return cls(
            kappa_bar=math.sqrt(3.0 * math.log(4.0 / alpha)),
            kappa_tilde=math.sqrt(math.log(16.0 / alpha) / 3.0),
            kappa=2.0 / math.sqrt(alpha),
        )


@dataclass(frozen=True)
class PublicCoin:
    """A random direction shared by every machine within one protocol round."""

    u: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise ValueError("public coin must be a non-empty vector")
        object.__setattr__(self, "u", u)


def draw_public_coin(stream: RngStream, dim: int) -> PublicCoin:
    return PublicCoin(gaussian_vector(stream, dim))


@dataclass(frozen=True)
class LocalObservation:
    """One machine's data vector x = mu + sqrt(m/n) * z."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ValueError("observation must be a non-empty vector")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class TranscriptVector:
    """The m single bits sent to the aggregator."""

    bits: np.ndarray
    coin_used: bool = False

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.int64)
        if bits.ndim != 1:
            raise ValueError("transcript bits must form a vector")
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("transcript entries must be single bits")
        object.__setattr__(self, "bits", bits)


@dataclass(frozen=True)
class ProtocolRun:
    transcript: TranscriptVector
    decision: int
    warnings: tuple[str, ...] = ()


def _check_dim(x: np.ndarray, d: int, what: str) -> None:
    if x.shape != (d,):
        raise ValueError(f"{what} has length {x.shape[0] if x.ndim == 1 else x.shape}, expected {d}")


def local_stat_chisq(obs: LocalObservation, inst: ProblemInstance) -> float:
    """Local chi-square statistic (n/m) ||x||^2 (chi2_d distributed under the null)."""
    _check_dim(obs.x, inst.d, "observation")
    return float(inst.n / inst.m * np.dot(obs.x, obs.x))


def local_test_chisq(stat: float, inst: ProblemInstance, stream: RngStream) -> int:
    """Randomized one-bit test: Bernoulli(F_chi2_d(stat)).

    The probability integral transform makes the bit fair under the null and
    biased towards 1 under any alternative.
    """
    if stat < 0:
        raise ValueError("chi-square statistic must be non-negative")
    return bernoulli(stream, chi_square_cdf(stat, inst.d))


def local_test_sign(obs: LocalObservation, coin: PublicCoin, inst: ProblemInstance) -> int:
    """One-bit sign test: 1 iff sqrt(n/(m d)) <u, x> >= 0."""
    _check_dim(obs.x, inst.d, "observation")
    _check_dim(coin.u, inst.d, "public coin")
    stat = math.sqrt(inst.n / (inst.m * inst.d)) * float(np.dot(coin.u, obs.x))
    return int(stat >= 0.0)


def aggregate_counting(transcripts: TranscriptVector, threshold: float) -> int:
    """Reject (1) iff the bit count deviates from m/2 by at least `threshold`."""
    m = transcripts.bits.size
    if m == 0:
        raise ValueError("empty transcript vector")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    deviation = abs(float(transcripts.bits.sum()) - m / 2.0)
    return int(deviation >= threshold)


def test_single_machine(obs: LocalObservation, inst: ProblemInstance, thr: Thresholds) -> int:
    """Classical test on machine 1: (n/(sqrt(d) m)) ||x||^2 - sqrt(d) >= kappa."""
    _check_dim(obs.x, inst.d, "observation")
    root_d = math.sqrt(inst.d)
    stat = inst.n / (root_d * inst.m) * float(np.dot(obs.x, obs.x)) - root_d
    return int(stat >= thr.kappa)


@dataclass(frozen=True)
class CalibratedCount:
    """Exact binomial count threshold: reject iff |count - m/2| >= margin.

    `cutoff` is the smallest integer c > m/2 with
    P(Bin(m,1/2) >= c) + P(Bin(m,1/2) <= m-c) <= alpha, `margin` = c - m/2 and
    `level` the attained null rejection probability. For very small m no such
    c exists; the test then never rejects (margin = inf, level 0).
    """

    cutoff: int | None
    margin: float
    level: float


@lru_cache(maxsize=4096)
def calibrate_count_threshold(m: int, alpha: float) -> CalibratedCount:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    start = m // 2 + 1
    for c in range(start, m + 1):
        level = float(_binom.sf(c - 1, m, 0.5) + _binom.cdf(m - c, m, 0.5))
        if level <= alpha:
            return CalibratedCount(cutoff=c, margin=c - m / 2.0, level=level)
    return CalibratedCount(cutoff=None, margin=math.inf, level=0.0)


def count_threshold(
    kind: TestKind, inst: ProblemInstance, rule: str = THEORY_RULE
) -> float:
    """Aggregation threshold for a counting test under the chosen policy."""
    if rule not in THRESHOLD_RULES:
        raise ValueError(f"unknown threshold rule {rule!r}")
    if kind == TestKind.SINGLE_MACHINE:
        raise ValueError("SingleMachine does not aggregate counts")
    if rule == CALIBRATED_RULE:
        return calibrate_count_threshold(inst.m, inst.alpha).margin
    thr = Thresholds.for_level(inst.alpha)
    kappa = thr.kappa_bar if kind == TestKind.CHI_SQ_COUNT else thr.kappa_tilde
    return math.sqrt(inst.m) * kappa


def select_regime(inst: ProblemInstance) -> TestKind:
    """Practical test choice: counting by chi-square bits for 1 < m <= d,
    sign bits for m > d, the plain chi-square test when only one machine."""
    if inst.m == 1:
        return TestKind.SINGLE_MACHINE
    if inst.m <= inst.d:
        return TestKind.CHI_SQ_COUNT
    return TestKind.SIGN_COUNT


def run_protocol(
    kind: TestKind,
    observations: list[LocalObservation],
    coin: PublicCoin | None,
    inst: ProblemInstance,
    streams: list[RngStream] | None = None,
    threshold_rule: str = THEORY_RULE,
) -> ProtocolRun:
    """Execute one protocol round and aggregate the transcript.

    Each local test sees only its own observation (plus the shared coin for
    SignCount); `streams` supplies one stream per machine for the randomized
    chi-square bits. A coin passed to a test that cannot use one is ignored
    with a warning recorded on the result.
    """
    kind = TestKind(kind)
    if len(observations) != inst.m:
        raise ValueError(f"expected {inst.m} observations, got {len(observations)}")
    warnings: tuple[str, ...] = ()

    if kind == TestKind.SIGN_COUNT:
        if coin is None:
            raise ValueError("SignCount requires a public coin")
    elif coin is not None:
        warnings = (f"public coin ignored by {kind.value}",)

    if kind == TestKind.CHI_SQ_COUNT:
        if streams is None or len(streams) != inst.m:
            raise ValueError("ChiSqCount needs one rng stream per machine")
        bits = np.fromiter(
            (
                local_test_chisq(local_stat_chisq(obs, inst), inst, stream)
                for obs, stream in zip(observations, streams)
            ),
            dtype=np.int64,
            count=inst.m,
        )
        transcript = TranscriptVector(bits, coin_used=False)
        decision = aggregate_counting(transcript, count_threshold(kind, inst, threshold_rule))
    elif kind == TestKind.SIGN_COUNT:
        bits = np.fromiter(
            (local_test_sign(obs, coin, inst) for obs in observations),
            dtype=np.int64,
            count=inst.m,
        )
        transcript = TranscriptVector(bits, coin_used=True)
        decision = aggregate_counting(transcript, count_threshold(kind, inst, threshold_rule))
    else:
        bit = test_single_machine(observations[0], inst, Thresholds.for_level(inst.alpha))
        transcript = TranscriptVector(np.array([bit]), coin_used=False)
        decision = bit

    return ProtocolRun(transcript=transcript, decision=decision, warnings=warnings)
