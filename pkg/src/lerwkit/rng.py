"""Deterministic counter-based randomness.

Every sampled walk owns an independent splitmix64 stream derived from
(seed, stream_id, walk_index), consuming one 53-bit uniform per step.  The
derivation is pure integer arithmetic, so identical (seed, stream_id)
reproduce identical trajectories bit-for-bit regardless of worker count,
scheduling, or whether the compiled or the pure-Python walker ran.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class RngStream:
    """Named randomness source: (seed, stream_id) keys a family of per-walk
    splitmix64 sequences."""

    seed: int
    stream_id: int = 0

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def _mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def walk_seed(seed: int, stream_id: int, walk_index: int) -> int:
    s = _mix((seed + GOLDEN) & MASK64)
    s = _mix((s ^ ((stream_id + GOLDEN) & MASK64)) & MASK64)
    return _mix((s ^ ((walk_index + GOLDEN) & MASK64)) & MASK64)


class SplitMix:
    """Scalar splitmix64 generator; mirrors the compiled kernel exactly."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_uniform(self) -> float:
        self.state = (self.state + GOLDEN) & MASK64
        z = _mix(self.state)
        return (z >> 11) * (1.0 / 9007199254740992.0)

    def choose(self, n: int) -> int:
        return min(int(self.next_uniform() * n), n - 1)
