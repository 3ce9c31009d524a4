"""Monte Carlo check of the mean value identity for planar unimodular lattices.

Averaged over the invariant probability measure on the space of covolume-one
lattices in R^2, the number of nonzero lattice points in a disc equals the
disc's area.  The sampler draws the shape parameters (x, y) from the
standard fundamental domain {|x| <= 1/2, x^2 + y^2 >= 1} with density
proportional to y^(-2), which is exactly samplable: x uniform, y by inverse
CDF of the y-marginal, rejection against the unit circle.  The rotation
fiber is omitted; with radial test functions (discs and annuli) that is
exact, and only radial counts are offered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PlanarLattice",
    "SiegelReport",
    "sample_modular_lattice",
    "count_in_disc",
    "siegel_mc_check",
]

Y_MIN = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class PlanarLattice:
    """Covolume-one lattice spanned by y^(-1/2)*(1, 0) and y^(-1/2)*(x, y)."""

    x: float
    y: float
    basis: tuple[tuple[float, float], tuple[float, float]]

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.basis
        return a * d - b * c


def _make_lattice(x: float, y: float) -> PlanarLattice:
    r = 1.0 / math.sqrt(y)
    return PlanarLattice(x=x, y=y, basis=((r, 0.0), (r * x, r * y)))


def sample_modular_lattice(rng: np.random.Generator) -> PlanarLattice:
    """One draw from the invariant measure on the shape parameters.

    The y-marginal of the proposal has density proportional to y^(-2) on
    [sqrt(3)/2, infinity), inverted in closed form; acceptance is the
    circle condition, rejected with probability about 0.093.
    """
    while True:
        x = rng.uniform(-0.5, 0.5)
        y = Y_MIN / (1.0 - rng.uniform(0.0, 1.0))
        if x * x + y * y >= 1.0:
            return _make_lattice(x, y)


def count_in_disc(lattice: PlanarLattice, radius: float) -> int:
    """Number of nonzero lattice vectors with Euclidean norm <= radius.

    A vector a*b1 + c*b2 has squared norm ((a + c x)^2 + (c y)^2) / y, so c
    is bounded by radius * sqrt(y) / y and a ranges over an interval per c.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    x, y = lattice.x, lattice.y
    r2y = radius * radius * y
    c_cap = math.floor(math.sqrt(r2y) / y)
    total = 0
    for c in range(-c_cap, c_cap + 1):
        rem = r2y - (c * y) ** 2
        if rem < 0.0:
            continue
        half = math.sqrt(rem)
        lo = math.ceil(-c * x - half)
        hi = math.floor(-c * x + half)
        if hi >= lo:
            total += hi - lo + 1
    return total - 1  # remove the origin, always inside


@dataclass(frozen=True)
class SiegelReport:
    mean_count: float
    std_error: float
    target_area: float
    samples: int


def siegel_mc_check(radius: float, samples: int, seed: int = 0) -> SiegelReport:
    """Sample mean of nonzero-point counts in a disc against the disc area.

    The sample budget is split into shards with independent seed-derived
    streams; shard results merge by plain accumulation, so the estimate
    does not depend on how the shards are scheduled.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    n_shards = min(16, samples)
    streams = np.random.SeedSequence(seed).spawn(n_shards)
    base, extra = divmod(samples, n_shards)
    total = 0.0
    total_sq = 0.0
    for i in range(n_shards):
        rng = np.random.default_rng(streams[i])
        for _ in range(base + (1 if i < extra else 0)):
            c = count_in_disc(sample_modular_lattice(rng), radius)
            total += c
            total_sq += c * c
    mean = total / samples
    if samples > 1:
        var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
        std_error = math.sqrt(var / samples)
    else:
        std_error = math.inf
    return SiegelReport(
        mean_count=mean,
        std_error=std_error,
        target_area=math.pi * radius * radius,
        samples=samples,
    )
