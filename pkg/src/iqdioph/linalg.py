"""Exact integer and rational linear algebra helpers.

Row-style Hermite normal form with transformation tracking, integer kernels,
saturation of rational row spans, reduced row echelon form over the
fractions, and exact Gram determinants.  Everything here works on plain
Python ints and Fractions; sizes stay small (desk scale), so the textbook
algorithms are the right tool.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b == g == gcd(a, b), g >= 0."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def transpose(rows: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*rows)]


def hnf_with_transform(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row Hermite normal form with unimodular transform.

    Returns (H, U) where U is a unimodular r x r integer matrix,
    U @ A has the nonzero rows of H on top followed by zero rows, pivots
    strictly to the right as the row index grows, pivot entries positive,
    and entries above each pivot reduced into [0, pivot).
    """
    m = [list(map(int, row)) for row in rows]
    r = len(m)
    n = len(m[0]) if r else 0
    u = [[int(i == j) for j in range(r)] for i in range(r)]
    row = 0
    pivots: list[tuple[int, int]] = []
    for col in range(n):
        piv = None
        for i in range(row, r):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != row:
            m[row], m[piv] = m[piv], m[row]
            u[row], u[piv] = u[piv], u[row]
        for i in range(row + 1, r):
            if m[i][col] == 0:
                continue
            a, b = m[row][col], m[i][col]
            g, x, y = xgcd(a, b)
            p, q = a // g, b // g
            m[row], m[i] = (
                [x * ra + y * rb for ra, rb in zip(m[row], m[i])],
                [-q * ra + p * rb for ra, rb in zip(m[row], m[i])],
            )
            u[row], u[i] = (
                [x * ra + y * rb for ra, rb in zip(u[row], u[i])],
                [-q * ra + p * rb for ra, rb in zip(u[row], u[i])],
            )
        if m[row][col] < 0:
            m[row] = [-v for v in m[row]]
            u[row] = [-v for v in u[row]]
        pivots.append((row, col))
        row += 1
    # reduce entries above each pivot
    for prow, pcol in pivots:
        pval = m[prow][pcol]
        for i in range(prow):
            q = m[i][pcol] // pval
            if q:
                m[i] = [vi - q * vp for vi, vp in zip(m[i], m[prow])]
                u[i] = [vi - q * vp for vi, vp in zip(u[i], u[prow])]
    return m[:row], u


def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Canonical row Hermite normal form (nonzero rows only)."""
    h, _ = hnf_with_transform(rows)
    return h


def left_kernel(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of {x in Z^r : x @ A == 0}; the basis is saturated."""
    h, u = hnf_with_transform(rows)
    return [list(r) for r in u[len(h):]]


def right_kernel(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of {x in Z^n : A @ x == 0}, returned as rows; saturated."""
    return left_kernel(transpose(rows))


def clear_denominators(rows: Sequence[Sequence[Fraction | int]]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators; row span is unchanged."""
    out = []
    for row in rows:
        fr = [Fraction(v) for v in row]
        scale = lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * scale) for f in fr])
    return out


def saturate_rows(rows: Sequence[Sequence[Fraction | int]]) -> list[list[int]]:
    """Basis of (Q-row-span of `rows`) intersected with Z^n, in HNF.

    Rows must be linearly independent over Q.
    """
    int_rows = clear_denominators(rows)
    n = len(int_rows[0])
    h, _ = hnf_with_transform(int_rows)
    if len(h) != len(int_rows):
        raise ValueError("rows are linearly dependent")
    kern = right_kernel(int_rows)
    if not kern:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    sat = right_kernel(kern)
    return hnf(sat)


def rref(rows: Sequence[Sequence[Fraction | int]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q: (nonzero rows, pivot column indices)."""
    m = [[Fraction(v) for v in row] for row in rows]
    r = len(m)
    n = len(m[0]) if r else 0
    row = 0
    pivots: list[int] = []
    for col in range(n):
        piv = None
        for i in range(row, r):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        m[row] = [v * inv for v in m[row]]
        for i in range(r):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [vi - f * vp for vi, vp in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    return m[:row], pivots


def det_fraction(rows: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """Exact determinant of a square matrix via fraction Gaussian elimination."""
    m = [[Fraction(v) for v in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for i in range(col, n):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for i in range(col + 1, n):
            if m[i][col] != 0:
                f = m[i][col] * inv
                m[i] = [vi - f * vp for vi, vp in zip(m[i], m[col])]
    return det


def gram_det(rows: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """Exact determinant of the Gram matrix B @ B^T for the given basis rows."""
    fr = [[Fraction(v) for v in row] for row in rows]
    gram = [[sum(a * b for a, b in zip(u, v)) for v in fr] for u in fr]
    return det_fraction(gram)
