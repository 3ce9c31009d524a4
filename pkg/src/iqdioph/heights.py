"""Echelon forms, lattice saturation, and subspace height machinery.

Row-reduced echelon forms of full row rank with no zero columns index the
correction terms of the k-fold mean value identity; this module enumerates
them over Q or over an imaginary quadratic field with bounded entries,
checks the underlying factorization of integer matrices through them, and
measures the associated saturated lattices.

The height of a rational line through a primitive integer vector w is the
Euclidean norm |w|; over the field, a form D is flattened to a rational
matrix via the regular representation of its entries, and the height is
the covolume of the integral saturation of that row span.  Dyadic block
sums of height^(-d) over lines exhibit the 2^((k-d)j) decay that makes the
correction series converge for k < d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, Sequence, Union

import numpy as np

from .linalg import gram_det, rref, saturate_rows
from .numberfield import FieldSpec, QuadRat, regular_representation_rat

__all__ = [
    "EchelonForm",
    "LatticeBasis",
    "DecompositionReport",
    "TailBlock",
    "TailReport",
    "echelon_enumerate",
    "validate_echelon",
    "decomposition_check",
    "lattice_saturation",
    "lattice_determinant",
    "subspace_height",
    "subspace_count",
    "tail_sum",
]

Entry = Union[Fraction, QuadRat]

_ENUM_GUARD = 1000.0  # cap on the height bound for line enumeration


@dataclass(frozen=True)
class EchelonForm:
    """Rank-m row-reduced echelon matrix, m x k, with no zero columns.

    Pivot columns are 0-indexed.  Entries are Fractions over Q or QuadRat
    over an imaginary quadratic field.
    """

    m: int
    k: int
    pivots: tuple[int, ...]
    entries: tuple[tuple[Entry, ...], ...]


def _is_zero(entry: Entry) -> bool:
    if isinstance(entry, QuadRat):
        return entry.is_zero()
    return entry == 0


def _is_one(entry: Entry) -> bool:
    if isinstance(entry, QuadRat):
        return entry.a == 1 and entry.b == 0
    return entry == 1


def validate_echelon(form: EchelonForm) -> None:
    """Raise ValueError unless the form satisfies all echelon invariants."""
    m, k, pivots = form.m, form.k, form.pivots
    if len(pivots) != m or any(p2 <= p1 for p1, p2 in zip(pivots, pivots[1:])):
        raise ValueError("pivots must be strictly increasing of size m")
    if pivots and (pivots[0] < 0 or pivots[-1] >= k):
        raise ValueError("pivot out of range")
    for i, row in enumerate(form.entries):
        if len(row) != k:
            raise ValueError("row length mismatch")
        if not _is_one(row[pivots[i]]):
            raise ValueError("pivot entry must be 1")
        for j in range(pivots[i]):
            if not _is_zero(row[j]):
                raise ValueError("nonzero entry left of pivot")
        for i2 in range(m):
            if i2 != i and not _is_zero(form.entries[i2][pivots[i]]):
                raise ValueError("pivot column must vanish off the pivot row")
    for j in range(k):
        if all(_is_zero(row[j]) for row in form.entries):
            raise ValueError("zero column")


def _bounded_fractions(bound: int) -> list[Fraction]:
    vals = {Fraction(0)}
    for den in range(1, bound + 1):
        for num in range(1, bound + 1):
            if math.gcd(num, den) == 1:
                vals.add(Fraction(num, den))
                vals.add(Fraction(-num, den))
    return sorted(vals)


def echelon_enumerate(
    m: int, k: int, bound: int, field: FieldSpec | None = None
) -> list[EchelonForm]:
    """All rank-m, no-zero-column echelon forms with bounded free entries.

    Free entries range over rationals with numerator and denominator at most
    `bound` in absolute value; over a field, both coordinates of each entry
    do.  The first column must contain a pivot (anything else forces it to
    vanish), so pivot sets start at column 0.  Order is deterministic:
    pivot sets lexicographically, then free entries in value order.
    """
    if not 1 <= m <= k:
        raise ValueError("need 1 <= m <= k")
    if bound < 1:
        raise ValueError("bound must be >= 1")
    qvals = _bounded_fractions(bound)
    values: list[Entry]
    if field is None:
        values = list(qvals)
        zero: Entry = Fraction(0)
        one: Entry = Fraction(1)
    else:
        values = [QuadRat(r, s) for r in qvals for s in qvals]
        values.sort(key=lambda q: (q.a, q.b))
        zero = QuadRat(Fraction(0), Fraction(0))
        one = QuadRat(Fraction(1), Fraction(0))
    forms = []
    for pivots in combinations(range(k), m):
        if pivots[0] != 0:
            continue
        pivot_set = set(pivots)
        free_pos = [
            (i, j)
            for i in range(m)
            for j in range(k)
            if j not in pivot_set and j > pivots[i]
        ]
        for assignment in product(values, repeat=len(free_pos)):
            rows = [[zero] * k for _ in range(m)]
            for i, p in enumerate(pivots):
                rows[i][p] = one
            for (i, j), val in zip(free_pos, assignment):
                rows[i][j] = val
            ok = True
            for j in range(k):
                if j in pivot_set:
                    continue
                if all(_is_zero(rows[i][j]) for i in range(m)):
                    ok = False
                    break
            if ok:
                forms.append(
                    EchelonForm(
                        m=m,
                        k=k,
                        pivots=pivots,
                        entries=tuple(tuple(r) for r in rows),
                    )
                )
    return forms


# ---------------------------------------------------------------------------
# factorization through echelon forms


@dataclass(frozen=True)
class DecompositionReport:
    checked: int
    failures: tuple[str, ...]


def _matmul_frac(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    return [
        [sum(x * y for x, y in zip(row, col)) for col in zip(*b)]
        for row in a
    ]


def _check_one(x_rows: list[list[int]], d: int, k: int) -> str | None:
    r_rows, pivots = rref(x_rows)
    m = len(r_rows)
    form = EchelonForm(
        m=m,
        k=k,
        pivots=tuple(pivots),
        entries=tuple(tuple(row) for row in r_rows),
    )
    try:
        validate_echelon(form)
    except ValueError as exc:
        return f"echelon invariant failed: {exc} for X={x_rows}"
    x_prime = [[Fraction(x_rows[i][p]) for p in pivots] for i in range(d)]
    xp_rank = len(rref(x_prime)[0])
    if xp_rank != m:
        return f"left factor rank {xp_rank} != {m} for X={x_rows}"
    rebuilt = _matmul_frac(x_prime, r_rows)
    if rebuilt != [[Fraction(v) for v in row] for row in x_rows]:
        return f"X' D  !=  X for X={x_rows}"
    # uniqueness: any row basis of the row space must reduce to the same D
    variants = [list(reversed(x_rows))]
    variants.append([[v * (i + 2) for v in row] for i, row in enumerate(x_rows)])
    if d >= 2:
        sheared = [list(row) for row in x_rows]
        sheared[0] = [a + 3 * b for a, b in zip(sheared[0], sheared[-1])]
        variants.append(sheared)
    for var in variants:
        alt_rows, alt_pivots = rref(var)
        if alt_rows != r_rows or alt_pivots != pivots:
            return f"canonical form not unique for X={x_rows}"
    return None


def decomposition_check(d: int, k: int, grid_bound: int) -> DecompositionReport:
    """Exhaustively verify X = X' D factorization on a small integer grid.

    For every d x k integer matrix with entries in [-grid_bound, grid_bound]
    and no zero column: the reduced echelon form D of its row space has no
    zero columns, the pivot columns of X give a full-column-rank X' with
    X' D = X exactly, and D is independent of the row basis used to derive
    it.
    """
    if not 1 <= k < d:
        raise ValueError("need 1 <= k < d")
    if grid_bound < 1 or grid_bound > 3:
        raise ValueError("grid_bound must be in 1..3")
    vals = range(-grid_bound, grid_bound + 1)
    checked = 0
    failures: list[str] = []
    for flat in product(vals, repeat=d * k):
        x_rows = [list(flat[i * k : (i + 1) * k]) for i in range(d)]
        if any(all(x_rows[i][j] == 0 for i in range(d)) for j in range(k)):
            continue
        checked += 1
        err = _check_one(x_rows, d, k)
        if err is not None and len(failures) < 32:
            failures.append(err)
    return DecompositionReport(checked=checked, failures=tuple(failures))


# ---------------------------------------------------------------------------
# saturated lattices and heights


@dataclass(frozen=True)
class LatticeBasis:
    rows: tuple[tuple[int, ...], ...]
    saturated: bool


def lattice_saturation(span_rows: Sequence[Sequence[Fraction | int]]) -> LatticeBasis:
    """Basis of (rational row span) intersected with Z^N; rows must be independent."""
    sat = saturate_rows(span_rows)
    return LatticeBasis(rows=tuple(tuple(r) for r in sat), saturated=True)


def lattice_determinant(basis: LatticeBasis) -> float:
    """Covolume sqrt(det(B B^T)) of the row lattice."""
    g = gram_det(basis.rows)
    if g <= 0:
        raise ValueError("basis rows must be linearly independent")
    return math.sqrt(float(g))


def _field_flatten(form: EchelonForm, field: FieldSpec) -> list[list[Fraction]]:
    """Replace each entry by its 2x2 regular representation block."""
    rows: list[list[Fraction]] = []
    for row in form.entries:
        top: list[Fraction] = []
        bot: list[Fraction] = []
        for entry in row:
            q = entry if isinstance(entry, QuadRat) else QuadRat(Fraction(entry), Fraction(0))
            rep = regular_representation_rat(field, q)
            top.extend(rep[0])
            bot.extend(rep[1])
        rows.append(top)
        rows.append(bot)
    return rows


def subspace_height(form: EchelonForm, field: FieldSpec | None = None) -> float:
    """Covolume of the integral saturation of the subspace the form spans.

    Over Q this is the determinant of (row span) intersect Z^k.  Over a
    field, rows are flattened through the coordinate map into Q^(2k) first,
    and the saturated lattice has rank 2m.  The value agrees with the
    classical subspace height up to a bounded field-dependent factor.
    """
    if field is None:
        rows = [[Fraction(v) if not isinstance(v, QuadRat) else v for v in row] for row in form.entries]
        for row in rows:
            if any(isinstance(v, QuadRat) for v in row):
                raise ValueError("field entries require the field argument")
        basis = lattice_saturation(rows)
    else:
        basis = lattice_saturation(_field_flatten(form, field))
    return lattice_determinant(basis)


# ---------------------------------------------------------------------------
# lines of bounded height


def _norm2_counts_k2(bound2: float) -> np.ndarray:
    size = int(math.ceil(bound2)) + 1
    bins = np.zeros(size, dtype=np.int64)
    if 1 < bound2:
        bins[1] += 1  # the line through (0, 1)
    a = 1
    while a * a < bound2:
        b_cap = math.isqrt(int(math.ceil(bound2 - a * a)))
        for b in range(-b_cap, b_cap + 1):
            n2 = a * a + b * b
            if n2 < bound2 and math.gcd(a, abs(b)) == 1:
                bins[n2] += 1
        a += 1
    return bins


def _norm2_counts_k3(bound2: float) -> np.ndarray:
    size = int(math.ceil(bound2)) + 1
    bins = np.zeros(size, dtype=np.int64)
    # leading coordinate zero: reduces to the k = 2 pattern
    bins += _norm2_counts_k2(bound2)
    # leading coordinate positive: numpy slices over the remaining plane
    a = 1
    while a * a < bound2:
        rem = bound2 - a * a
        c_cap = math.isqrt(int(math.ceil(rem)))
        c = np.arange(-c_cap, c_cap + 1)
        for b_sign_half in (0, 1):
            if b_sign_half == 0:
                b = np.zeros(1, dtype=np.int64)
                weight = 1
            else:
                b = np.arange(1, c_cap + 1)
                weight = 2  # b and -b are symmetric
            bb, cc = np.meshgrid(b, c, indexing="ij")
            n2 = bb * bb + cc * cc
            mask = n2 < rem
            if not mask.any():
                continue
            g = np.gcd(np.gcd(a, np.abs(bb[mask])), np.abs(cc[mask]))
            prim = g == 1
            vals = (n2[mask][prim] + a * a).astype(np.int64)
            bins += weight * np.bincount(vals, minlength=size)[:size]
        a += 1
    return bins


def _iter_primitive_norm2(k: int, bound2: float) -> Iterator[int]:
    """Squared norms of canonical primitive vectors (first nonzero positive)."""

    def rec(prefix_norm2: int, prefix_gcd: int, coords_left: int, started: bool) -> Iterator[int]:
        if coords_left == 0:
            if started and prefix_gcd == 1:
                yield prefix_norm2
            return
        cap = math.isqrt(int(math.ceil(bound2 - prefix_norm2)))
        lo = 0 if not started else -cap
        for c in range(lo, cap + 1):
            n2 = prefix_norm2 + c * c
            if n2 >= bound2 and c != 0:
                continue
            yield from rec(
                n2,
                math.gcd(prefix_gcd, abs(c)),
                coords_left - 1,
                started or c > 0,
            )

    yield from rec(0, 0, k, False)


def _primitive_norm2_counts(k: int, bound2: float) -> np.ndarray:
    if k == 2:
        return _norm2_counts_k2(bound2)
    if k == 3:
        return _norm2_counts_k3(bound2)
    size = int(math.ceil(bound2)) + 1
    bins = np.zeros(size, dtype=np.int64)
    for n2 in _iter_primitive_norm2(k, bound2):
        bins[n2] += 1
    return bins


def subspace_count(k: int, x: float) -> int:
    """Number of lines in Q^k of height below x, one primitive vector per line."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if x > _ENUM_GUARD:
        raise ValueError(f"x must be <= {_ENUM_GUARD:g}")
    if x <= 1:
        return 0
    bins = _primitive_norm2_counts(k, x * x)
    return int(bins.sum())


@dataclass(frozen=True)
class TailBlock:
    j: int
    count: int
    total: float


@dataclass(frozen=True)
class TailReport:
    k: int
    d: int
    x_max: float
    blocks: tuple[TailBlock, ...]
    partial_sums: tuple[float, ...]
    c_fit: float

    def bound(self, j: int) -> float:
        return self.c_fit * 2.0 ** ((self.k - self.d) * j)


def tail_sum(k: int, d: int, x_max: float) -> TailReport:
    """Partial sums of height^(-d) over lines in Q^k, blocked dyadically.

    Block j collects lines with height in [2^j, 2^(j+1)), truncated at
    x_max; convergence requires k < d, which is enforced.  The fitted
    constant is the smallest C with S_j <= C * 2^((k-d)j) over all blocks.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= d:
        raise ValueError("tail sums converge only for k < d")
    if x_max < 1 or x_max > _ENUM_GUARD:
        raise ValueError(f"x_max must be in [1, {_ENUM_GUARD:g}]")
    if k == 1:
        blocks = (TailBlock(j=0, count=1, total=1.0),)
        return TailReport(k=k, d=d, x_max=x_max, blocks=blocks, partial_sums=(1.0,), c_fit=1.0)
    bins = _primitive_norm2_counts(k, x_max * x_max)
    n2_vals = np.nonzero(bins)[0]
    blocks: list[TailBlock] = []
    j = 0
    while 2.0 ** j < x_max:
        lo2, hi2 = 4 ** j, 4 ** (j + 1)
        sel = n2_vals[(n2_vals >= lo2) & (n2_vals < hi2)]
        total = float(np.sum(bins[sel] * np.power(sel.astype(float), -d / 2.0))) if sel.size else 0.0
        blocks.append(TailBlock(j=j, count=int(bins[sel].sum()), total=total))
        j += 1
    partial = np.cumsum([b.total for b in blocks])
    c_fit = max(b.total * 2.0 ** ((d - k) * b.j) for b in blocks)
    return TailReport(
        k=k,
        d=d,
        x_max=x_max,
        blocks=tuple(blocks),
        partial_sums=tuple(float(v) for v in partial),
        c_fit=c_fit,
    )
