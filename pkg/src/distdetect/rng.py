"""Deterministic, splittable random streams and the basic samplers.

A stream is identified by a 64-bit root seed plus a 64-bit stream id. Stream
ids are derived by hashing a short purpose tag (a string such as
``"alt:noise"``) together with integer indices (grid point, replication), so
any worker can reconstruct exactly the stream it needs without coordination.
The underlying generator is numpy's counter-based Philox keyed by
``(root_seed, stream_id)``: equal keys reproduce identical sequences on any
machine and under any parallel schedule, distinct keys give independent
streams by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _splitmix64(x: int) -> int:
    """One round of the splitmix64 mixing function (64-bit)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_id_for(purpose: str, *indices: int) -> int:
    """Map a purpose tag plus integer indices to a 64-bit stream id.

    The tag is absorbed with FNV-1a, then each index is folded in through a
    splitmix64 round. Collisions between distinct (purpose, indices) tuples
    are as unlikely as 64-bit hash collisions get; what matters for
    reproducibility is that the map is pure and platform-independent.
    """
    h = _FNV_OFFSET
    for b in purpose.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    for ix in indices:
        if ix < 0:
            raise ValueError("stream indices must be non-negative")
        h = _splitmix64(h ^ (ix & _MASK64))
    return _splitmix64(h)


@dataclass(frozen=True)
class RngStream:
    """Value-type handle on one reproducible random stream.

    Two streams with equal (root_seed, stream_id) produce identical draws;
    each sampler call below opens a fresh generator at the start of the
    stream, so a sampler applied twice to the same stream is a pure function.
    """

    root_seed: int
    stream_id: int

    def __post_init__(self) -> None:
        for name in ("root_seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.root_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_stream(root_seed: int, purpose: str, *indices: int) -> RngStream:
    """Build the stream for (purpose, indices) under a given root seed."""
    return RngStream(root_seed, stream_id_for(purpose, *indices))


@dataclass(frozen=True)
class ChiSquareParams:
    """Degrees of freedom and noncentrality of a (non)central chi-square."""

    dof: int
    noncentrality: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.dof, int) or self.dof < 1:
            raise ValueError("dof must be a positive integer")
        if self.noncentrality < 0:
            raise ValueError("noncentrality must be non-negative")


def gaussian_vector(stream: RngStream, dim: int) -> np.ndarray:
    """dim i.i.d. standard normal draws, deterministic given the stream."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return stream.generator().standard_normal(dim)


def rademacher_vector(stream: RngStream, dim: int) -> np.ndarray:
    """dim independent uniform ±1 entries."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return stream.generator().integers(0, 2, size=dim) * 2 - 1


def bernoulli(stream: RngStream, p: float, size: int | None = None):
    """Bernoulli(p) draw: one bit, or an int array when size is given."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if size is None:
        return int(stream.generator().random() < p)
    return (stream.generator().random(size) < p).astype(np.int64)


def noncentral_chi_square_sample(
    stream: RngStream, params: ChiSquareParams, size: int | None = None
):
    """Sample Sum_i (Z_i + mu_i)^2 with the whole noncentrality on coordinate 1.

    The first coordinate contributes (Z + sqrt(delta))^2; the remaining
    dof - 1 coordinates enter only through their summed squares, drawn as one
    central chi-square (equal in law to the explicit sum, O(1) per draw).
    """
    g = stream.generator()
    root = math.sqrt(params.noncentrality)
    n = 1 if size is None else size
    first = (g.standard_normal(n) + root) ** 2
    if params.dof > 1:
        first = first + g.chisquare(params.dof - 1, n)
    return float(first[0]) if size is None else first
