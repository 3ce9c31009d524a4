"""Exact enumeration of congruence-constrained approximation solutions.

Counts pairs (p, q) of algebraic integer vectors with

    ||theta*q + p||_inf^m <= psi(||q||_inf^n),
    1 <= ||q||_inf^n < T,
    (p, q) = v (mod I),

for a complex m x n matrix theta.  Sup norms of ring elements are exact
integers, so the shell condition is decided exactly.  The disc condition
mixes a floating-point matrix with exact lattice points; comparisons within
a relative guard band of 1e-9 of the boundary are re-decided with 50-digit
arithmetic so that ties are deterministic.

The main enumerator walks q directly over the ideal-translate lattice
(striding by the HNF basis) and, per admissible q, counts translated ideal
points coordinatewise in the disc of radius psi(u)^(1/(2m)) around
-(theta q)_i, multiplying the per-coordinate counts.  A deliberately
unsophisticated double loop over integer coordinate boxes serves as an
independent oracle.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator, Sequence

from mpmath import mp

from .numberfield import (
    FieldSpec,
    IdealRep,
    QuadInt,
    embed,
    ideal_contains,
    norm_inf,
    reduce_mod,
)
from .regions import PsiSpec, RegionKind, RegionSpec, adelic_volume, psi_eval, psi_eval_mp

__all__ = [
    "NumericFailure",
    "Theta",
    "ProblemSpec",
    "CountReport",
    "GridCount",
    "count_solutions",
    "count_for_grid",
    "count_brute_force",
    "disc_lattice_count",
]

_BAND = 1e-9
_RETEST_DPS = 50


class NumericFailure(ArithmeticError):
    """Non-finite values entered a computation that must stay exact."""


@dataclass(frozen=True)
class Theta:
    """Complex m x n matrix of approximation targets, double precision."""

    entries: tuple[tuple[complex, ...], ...]

    def __post_init__(self) -> None:
        for row in self.entries:
            for z in row:
                if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                    raise NumericFailure(f"non-finite theta entry {z!r}")

    @classmethod
    def zero(cls, m: int, n: int) -> "Theta":
        return cls(tuple(tuple(0j for _ in range(n)) for _ in range(m)))

    @classmethod
    def from_flat(cls, values: Sequence[float], m: int, n: int) -> "Theta":
        """Build from 2*m*n reals, row-major, (re, im) interleaved."""
        if len(values) != 2 * m * n:
            raise ValueError(f"theta needs {2 * m * n} reals, got {len(values)}")
        it = iter(values)
        rows = []
        for _ in range(m):
            rows.append(tuple(complex(next(it), next(it)) for _ in range(n)))
        return cls(tuple(rows))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0])


@dataclass(frozen=True)
class ProblemSpec:
    """One counting problem instance; T may stay None for grid experiments."""

    field: FieldSpec
    m: int
    n: int
    psi: PsiSpec
    v: tuple[QuadInt, ...]
    ideal: IdealRep
    T: float | None = None
    allow_dim2: bool = False

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        d = self.m + self.n
        if d < 3 and not self.allow_dim2:
            raise ValueError("m + n >= 3 required (set allow_dim2 to explore d = 2)")
        if len(self.v) != d:
            raise ValueError(f"residue vector must have length {d}")
        if self.T is not None and self.T <= 1:
            raise ValueError("T must be > 1")

    @property
    def d(self) -> int:
        return self.m + self.n

    @property
    def theorem_backed(self) -> bool:
        return self.d >= 3


@dataclass(frozen=True)
class CountReport:
    count: int
    T: float
    predicted: float
    ratio: float
    q_enumerated: int
    wall_time: float
    theorem_backed: bool = True


@dataclass(frozen=True)
class GridCount:
    T: float
    count: int
    q_enumerated: int


# ---------------------------------------------------------------------------
# guarded disc predicate


def _accept_disc(dist2: float, bound: float, exact: Callable[[], bool] | None) -> bool:
    """dist2 <= bound, closed, with boundary ties settled in high precision."""
    band = _BAND * max(1.0, abs(bound))
    if dist2 > bound + band:
        return False
    if dist2 < bound - band:
        return True
    if exact is None:
        return dist2 <= bound
    return exact()


def _omega_mp(f: FieldSpec):
    root = mp.sqrt(f.D)
    if f.omega_half:
        return mp.mpc(mp.mpf(1) / 2, root / 2)
    return mp.mpc(0, root)


def _exact_x_test(
    f: FieldSpec,
    psi: PsiSpec,
    u: int,
    m: int,
    theta_row: Sequence[complex],
    qs: Sequence[QuadInt],
    w: QuadInt,
) -> bool:
    """Decide |sum_j theta_j q_j + w|^2 <= psi(u)^(1/m) at 50 digits."""
    with mp.workdps(_RETEST_DPS):
        om = _omega_mp(f)
        z = mp.mpc(0)
        for th, qj in zip(theta_row, qs):
            z += mp.mpc(th) * (qj.a + qj.b * om)
        z += w.a + w.b * om
        d2 = mp.re(z) ** 2 + mp.im(z) ** 2
        bound = psi_eval_mp(psi, u) ** (mp.mpf(1) / m)
        return d2 <= bound


def _exact_disc_test(f: FieldSpec, center: complex, radius: float, w: QuadInt) -> bool:
    with mp.workdps(_RETEST_DPS):
        om = _omega_mp(f)
        z = (w.a + w.b * om) - mp.mpc(center)
        return mp.re(z) ** 2 + mp.im(z) ** 2 <= mp.mpf(radius) ** 2


# ---------------------------------------------------------------------------
# translated ideal lattice points in a disc


def _disc_candidates(
    f: FieldSpec,
    ideal: IdealRep,
    translate: QuadInt,
    center: complex,
    radius: float,
) -> Iterator[QuadInt]:
    """Candidate points of translate + I whose embedding may lie in the disc.

    Covers the disc with columns of the HNF basis parallelogram; ranges are
    expanded by a small slack, so callers must apply their own exact test.
    """
    (a1, b1), (_, d1) = ideal.basis
    om = f.omega_complex
    e1 = complex(a1) + b1 * om
    e2 = d1 * om
    c_rel = center - (translate.a + translate.b * om)
    det = e1.real * e2.imag - e1.imag * e2.real
    # first column of the inverse basis matrix: the alpha coordinate functional
    ua_x = e2.imag / det
    ua_y = -e2.real / det
    r_eff = radius * (1.0 + 1e-9) + 1e-9
    alpha0 = c_rel.real * ua_x + c_rel.imag * ua_y
    spread = r_eff * math.hypot(ua_x, ua_y)
    n2 = e2.real * e2.real + e2.imag * e2.imag
    for alpha in range(math.ceil(alpha0 - spread), math.floor(alpha0 + spread) + 1):
        z_x = c_rel.real - alpha * e1.real
        z_y = c_rel.imag - alpha * e1.imag
        ip = z_x * e2.real + z_y * e2.imag
        disc = ip * ip - n2 * (z_x * z_x + z_y * z_y - r_eff * r_eff)
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        for beta in range(math.ceil((ip - sq) / n2), math.floor((ip + sq) / n2) + 1):
            yield QuadInt(
                translate.a + alpha * a1,
                translate.b + alpha * b1 + beta * d1,
            )


def disc_lattice_count(
    f: FieldSpec,
    ideal: IdealRep,
    translate: QuadInt,
    center: complex,
    radius: float,
) -> int:
    """Number of points of translate + I in the closed disc around center."""
    if not (math.isfinite(radius) and radius >= 0.0):
        raise ValueError("radius must be finite and nonnegative")
    if not (math.isfinite(center.real) and math.isfinite(center.imag)):
        raise NumericFailure("disc center must be finite")
    r2 = radius * radius
    count = 0
    for w in _disc_candidates(f, ideal, translate, center, radius):
        z = embed(f, w) - center
        d2 = z.real * z.real + z.imag * z.imag
        if _accept_disc(d2, r2, lambda w=w: _exact_disc_test(f, center, radius, w)):
            count += 1
    return count


def _count_coordinate(
    f: FieldSpec,
    ideal: IdealRep,
    translate: QuadInt,
    center: complex,
    bound_pow: float,
    radius: float,
    exact_factory: Callable[[QuadInt], Callable[[], bool]],
) -> int:
    """Points of translate + I with |embed - center|^2 <= bound_pow."""
    count = 0
    for w in _disc_candidates(f, ideal, translate, center, radius):
        z = embed(f, w) - center
        d2 = z.real * z.real + z.imag * z.imag
        if _accept_disc(d2, bound_pow, exact_factory(w)):
            count += 1
    return count


# ---------------------------------------------------------------------------
# main enumerator


def _validate(spec: ProblemSpec, theta: Theta) -> None:
    if theta.m != spec.m or theta.n != spec.n:
        raise ValueError(
            f"theta shape {theta.m}x{theta.n} does not match problem {spec.m}x{spec.n}"
        )


def _q_candidates(spec: ProblemSpec, t_max: float) -> list[list[tuple[QuadInt, int, complex]]]:
    """Per q coordinate: points of the translate lattice with norm^n below t_max.

    Each entry carries the exact norm and the complex embedding.  The
    enumeration radius has float slack; the norm filter is exact.
    """
    f, n = spec.field, spec.n
    radius = t_max ** (1.0 / (2.0 * n)) * (1.0 + 1e-9) + 1e-9
    out = []
    for j in range(n):
        translate = reduce_mod(spec.ideal, spec.v[spec.m + j])
        pts = []
        for w in _disc_candidates(f, spec.ideal, translate, 0j, radius):
            nw = norm_inf(f, w)
            if nw ** n < t_max:
                pts.append((w, nw, embed(f, w)))
        out.append(pts)
    return out


def _grid_shard(
    spec: ProblemSpec,
    theta: Theta,
    t_grid: tuple[float, ...],
    shard: int,
    n_shards: int,
) -> tuple[list[int], list[int]]:
    """Process first-coordinate candidates with index = shard (mod n_shards).

    Returns per-grid-slot buckets (counts, admissible q) indexed by the
    position of the smallest grid cutoff exceeding the shell value; prefix
    sums over slots give the counts at each cutoff.
    """
    f, m, n, psi, ideal = spec.field, spec.m, spec.n, spec.psi, spec.ideal
    t_max = t_grid[-1]
    cands = _q_candidates(spec, t_max)
    p_translates = [reduce_mod(ideal, spec.v[i]) for i in range(m)]
    theta_rows = [list(row) for row in theta.entries]
    buckets = [0] * len(t_grid)
    q_buckets = [0] * len(t_grid)
    radius_cache: dict[int, tuple[float, float]] = {}
    rest = cands[1:]
    for first_idx in range(shard, len(cands[0]), n_shards):
        first = cands[0][first_idx]
        for tail in product(*rest):
            qt = (first,) + tail
            m_norm = max(item[1] for item in qt)
            if m_norm < 1:
                continue
            u = m_norm ** n
            slot = bisect_right(t_grid, u)
            if slot == len(t_grid):
                continue
            cached = radius_cache.get(u)
            if cached is None:
                bound_pow = psi_eval(psi, u) ** (1.0 / m)
                cached = (bound_pow, math.sqrt(bound_pow))
                radius_cache[u] = cached
            bound_pow, radius = cached
            qs = tuple(item[0] for item in qt)
            embeds = [item[2] for item in qt]
            prod_count = 1
            for i in range(m):
                row = theta_rows[i]
                center = -sum(row[j] * embeds[j] for j in range(n))

                def factory(w: QuadInt, row=row, qs=qs) -> Callable[[], bool]:
                    return lambda: _exact_x_test(f, psi, u, m, row, qs, w)

                cnt = _count_coordinate(
                    f, ideal, p_translates[i], center, bound_pow, radius, factory
                )
                if cnt == 0:
                    prod_count = 0
                    break
                prod_count *= cnt
            q_buckets[slot] += 1
            if prod_count:
                buckets[slot] += prod_count
    return buckets, q_buckets


def count_for_grid(
    spec: ProblemSpec,
    theta: Theta,
    t_grid: Sequence[float],
    threads: int = 1,
) -> list[GridCount]:
    """Counts at every cutoff of an increasing grid from a single enumeration.

    The admissible q set and the per-q disc radius depend only on the shell
    value, never on T, so one pass at the largest cutoff serves the whole
    grid.
    """
    _validate(spec, theta)
    grid = tuple(float(t) for t in t_grid)
    if not grid:
        raise ValueError("empty cutoff grid")
    if any(t2 <= t1 for t1, t2 in zip(grid, grid[1:])):
        raise ValueError("cutoff grid must be strictly increasing")
    if grid[0] <= 1:
        raise ValueError("cutoffs must be > 1")
    n_shards = max(1, threads)
    if n_shards == 1:
        buckets, q_buckets = _grid_shard(spec, theta, grid, 0, 1)
    else:
        buckets = [0] * len(grid)
        q_buckets = [0] * len(grid)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_grid_shard, spec, theta, grid, s, n_shards)
                for s in range(n_shards)
            ]
            for fut in futures:
                b, qb = fut.result()
                buckets = [x + y for x, y in zip(buckets, b)]
                q_buckets = [x + y for x, y in zip(q_buckets, qb)]
    out = []
    running = running_q = 0
    for t_val, b, qb in zip(grid, buckets, q_buckets):
        running += b
        running_q += qb
        out.append(GridCount(T=t_val, count=running, q_enumerated=running_q))
    return out


def count_solutions(spec: ProblemSpec, theta: Theta, threads: int = 1) -> CountReport:
    """Count solutions at the problem's cutoff and compare with the predicted volume."""
    if spec.T is None:
        raise ValueError("spec.T must be set for a single count")
    start = time.perf_counter()
    grid = count_for_grid(spec, theta, (spec.T,), threads=threads)
    wall = time.perf_counter() - start
    region = RegionSpec(RegionKind.E_T, spec.m, spec.n, spec.psi, spec.T)
    predicted = adelic_volume(region, spec.field, spec.ideal)
    count = grid[0].count
    ratio = count / predicted if predicted > 0 else math.nan
    return CountReport(
        count=count,
        T=spec.T,
        predicted=predicted,
        ratio=ratio,
        q_enumerated=grid[0].q_enumerated,
        wall_time=wall,
        theorem_backed=spec.theorem_backed,
    )


# ---------------------------------------------------------------------------
# independent brute-force oracle


def _box_coordinates(f: FieldSpec, norm_cap: float) -> list[QuadInt]:
    """All ring elements with field norm <= norm_cap, via plain coordinate boxes."""
    s = f.trace_omega
    im_om = f.omega_complex.imag
    r = math.sqrt(max(norm_cap, 0.0)) * (1.0 + 1e-9) + 1e-9
    b_max = math.floor(r / im_om) + 1
    out = []
    for b in range(-b_max, b_max + 1):
        rad2 = r * r - (im_om * b) ** 2
        if rad2 < 0.0:
            continue
        half = math.sqrt(rad2)
        mid = -s * b / 2.0
        for a in range(math.ceil(mid - half) - 1, math.floor(mid + half) + 2):
            w = QuadInt(a, b)
            if norm_inf(f, w) <= norm_cap:
                out.append(w)
    return out


def count_brute_force(spec: ProblemSpec, theta: Theta) -> int:
    """Same count via direct double loops with exact congruence and norm tests.

    Kept structurally independent of the main enumerator: q runs over
    integer coordinate boxes of the whole ring and is filtered by
    congruence, and p runs over a coordinate box of radius psi(1)^(1/(2m))
    around each disc center.
    """
    _validate(spec, theta)
    if spec.T is None:
        raise ValueError("spec.T must be set")
    if spec.T > 1e4:
        raise ValueError("T too large for the brute-force oracle")
    f, m, n, psi, ideal = spec.field, spec.m, spec.n, spec.psi, spec.ideal
    t_val = spec.T

    q_lists: list[list[QuadInt]] = []
    for j in range(n):
        v_q = spec.v[m + j]
        coords = [
            w
            for w in _box_coordinates(f, t_val ** (1.0 / n))
            if norm_inf(f, w) ** n < t_val and ideal_contains(ideal, w - v_q)
        ]
        q_lists.append(coords)

    p_box_radius = psi_eval(psi, 1.0) ** (1.0 / (2.0 * m))
    s = f.trace_omega
    re_om = f.omega_complex.real
    im_om = f.omega_complex.imag

    total = 0
    for q in product(*q_lists):
        u = max(norm_inf(f, qj) for qj in q) ** n
        if u < 1:
            continue
        bound_pow = psi_eval(psi, u) ** (1.0 / m)
        prod_count = 1
        for i in range(m):
            center = -sum(theta.entries[i][j] * embed(f, q[j]) for j in range(n))
            v_p = spec.v[i]
            r_box = p_box_radius * (1.0 + 1e-9) + 1e-9
            b_lo = math.ceil((center.imag - r_box) / im_om) - 1
            b_hi = math.floor((center.imag + r_box) / im_om) + 1
            cnt = 0
            for b in range(b_lo, b_hi + 1):
                a_mid = center.real - b * re_om
                for a in range(math.ceil(a_mid - r_box) - 1, math.floor(a_mid + r_box) + 2):
                    w = QuadInt(a, b)
                    if not ideal_contains(ideal, w - v_p):
                        continue
                    z = embed(f, w) - center
                    d2 = z.real * z.real + z.imag * z.imag
                    if _accept_disc(
                        d2,
                        bound_pow,
                        lambda w=w, i=i, q=q: _exact_x_test(
                            f, psi, u, m, theta.entries[i], q, w
                        ),
                    ):
                        cnt += 1
            if cnt == 0:
                prod_count = 0
                break
            prod_count *= cnt
        total += prod_count
    return total
