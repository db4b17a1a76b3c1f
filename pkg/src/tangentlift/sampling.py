"""Reproducible sampling of base and bundle points.

The generator is a 64-bit linear congruential generator (Knuth's MMIX
constants), chosen so that any implementation can reproduce the sample
sequence exactly:

    state_0     = seed mod 2^64
    state_{k+1} = (6364136223846793005 * state_k + 1442695040888963407) mod 2^64
    u_k         = (state_k >> 11) * 2^-53          for k >= 1

A base point consumes one ``u`` per coordinate, in coordinate order, mapped
to ``lo + (hi - lo) * u``; a bundle point then consumes one ``u`` per fiber
coordinate from the fiber interval.
"""

from __future__ import annotations

import numpy as np

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK = (1 << 64) - 1


class LCG64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (MULTIPLIER * self.state + INCREMENT) & MASK
        return self.state

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def _draw(rng: LCG64, lo: float, hi: float) -> float:
    return lo + (hi - lo) * rng.uniform()


def sample_base_points(spec, count: int, seed: int) -> list[np.ndarray]:
    rng = LCG64(seed)
    return [np.array([_draw(rng, lo, hi) for lo, hi in spec.domain]) for _ in range(count)]


def sample_bundle_points(spec, count: int, seed: int):
    from .bundle import BundlePoint

    rng = LCG64(seed)
    flo, fhi = spec.fiber
    points = []
    for _ in range(count):
        x = [_draw(rng, lo, hi) for lo, hi in spec.domain]
        y = [_draw(rng, flo, fhi) for _ in spec.domain]
        points.append(BundlePoint(np.array(x), np.array(y)))
    return points
