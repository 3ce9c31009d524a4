"""Exact arithmetic in imaginary quadratic rings of integers.

Elements of O, the ring of integers of F = Q(sqrt(-D)), are integer
coordinate pairs in the basis {1, omega}, where omega = sqrt(-D) for
D = 1, 2 (mod 4) and omega = (1 + sqrt(-D))/2 for D = 3 (mod 4).  Since
omega satisfies omega^2 = Tr(omega) * omega - N(omega), all ring products
stay in integer coordinates.  The squared complex modulus of an algebraic
integer equals its field norm, so sup-norm shell tests are exact integer
comparisons; the floating-point embedding is needed only where a genuinely
transcendental quantity (a random matrix entry) enters.

Ideals are nonzero O-submodules represented by a 2x2 integer basis matrix
in Hermite normal form; the ideal norm is the determinant of that basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .linalg import hnf

__all__ = [
    "FieldSpec",
    "QuadInt",
    "QuadRat",
    "IdealRep",
    "ZERO",
    "ONE",
    "OMEGA",
    "field_new",
    "mul",
    "embed",
    "norm_inf",
    "regular_representation",
    "ideal_from_generators",
    "unit_ideal",
    "ideal_contains",
    "reduce_mod",
    "residues",
    "congruent",
    "mul_rat",
    "regular_representation_rat",
]


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The field Q(sqrt(-D)) together with its integral basis {1, omega}."""

    D: int
    omega_half: bool  # True iff omega = (1 + sqrt(-D)) / 2, i.e. D = 3 (mod 4)
    discriminant: int

    @property
    def trace_omega(self) -> int:
        return 1 if self.omega_half else 0

    @property
    def norm_omega(self) -> int:
        return (self.D + 1) // 4 if self.omega_half else self.D

    @property
    def omega_complex(self) -> complex:
        root = math.sqrt(self.D)
        if self.omega_half:
            return complex(0.5, 0.5 * root)
        return complex(0.0, root)


def field_new(D: int) -> FieldSpec:
    """Construct Q(sqrt(-D)) for a squarefree integer D >= 1."""
    if D < 1:
        raise ValueError(f"D must be a positive integer, got {D}")
    if not _is_squarefree(D):
        raise ValueError(f"D must be squarefree, got {D}")
    omega_half = D % 4 == 3
    discriminant = -D if omega_half else -4 * D
    return FieldSpec(D=D, omega_half=omega_half, discriminant=discriminant)


@dataclass(frozen=True)
class QuadInt:
    """a + b*omega with integer coordinates.

    Addition is basis-independent; products need the field and live in
    :func:`mul`.
    """

    a: int
    b: int

    def __add__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


ZERO = QuadInt(0, 0)
ONE = QuadInt(1, 0)
OMEGA = QuadInt(0, 1)


def mul(f: FieldSpec, x: QuadInt, y: QuadInt) -> QuadInt:
    # omega^2 = s*omega - t with s = Tr(omega), t = N(omega)
    s, t = f.trace_omega, f.norm_omega
    return QuadInt(
        x.a * y.a - t * x.b * y.b,
        x.a * y.b + x.b * y.a + s * x.b * y.b,
    )


def embed(f: FieldSpec, x: QuadInt) -> complex:
    """Complex embedding a + b*omega -> a + b*omega_C."""
    return x.a + x.b * f.omega_complex


def norm_inf(f: FieldSpec, x: QuadInt) -> int:
    """The squared complex modulus |embed(x)|^2, computed exactly.

    For an algebraic integer this equals the field norm
    a^2 + a*b*Tr(omega) + b^2*N(omega), a nonnegative integer.
    """
    return x.a * x.a + x.a * x.b * f.trace_omega + x.b * x.b * f.norm_omega


def regular_representation(f: FieldSpec, y: QuadInt) -> tuple[tuple[int, int], tuple[int, int]]:
    """2x2 integer matrix y~ acting on row coordinate vectors: [x*y] = [x] @ y~."""
    s, t = f.trace_omega, f.norm_omega
    return ((y.a, y.b), (-t * y.b, y.a + s * y.b))


@dataclass(frozen=True)
class IdealRep:
    """Nonzero ideal of O: HNF basis rows ((a, b), (0, d)) and norm a*d."""

    basis: tuple[tuple[int, int], tuple[int, int]]
    norm: int


def ideal_from_generators(f: FieldSpec, gens: Sequence[QuadInt]) -> IdealRep:
    """HNF basis of the Z-module generated by {g, g*omega : g in gens}."""
    if not gens or all(g.is_zero() for g in gens):
        raise ValueError("ideal requires at least one nonzero generator")
    rows = []
    for g in gens:
        gw = mul(f, g, OMEGA)
        rows.append([g.a, g.b])
        rows.append([gw.a, gw.b])
    h = hnf(rows)
    basis = ((h[0][0], h[0][1]), (h[1][0], h[1][1]))
    return IdealRep(basis=basis, norm=basis[0][0] * basis[1][1])


def unit_ideal(f: FieldSpec) -> IdealRep:
    return ideal_from_generators(f, [ONE])


def ideal_contains(ideal: IdealRep, x: QuadInt) -> bool:
    """Solve the triangular 2x2 integer system against the HNF basis."""
    (a, b), (_, d) = ideal.basis
    if x.a % a:
        return False
    k = x.a // a
    return (x.b - k * b) % d == 0


def reduce_mod(ideal: IdealRep, x: QuadInt) -> QuadInt:
    """Canonical coset representative with coordinates in [0, a) x [0, d)."""
    (a, b), (_, d) = ideal.basis
    k = x.a // a
    return QuadInt(x.a - k * a, (x.b - k * b) % d)


def residues(ideal: IdealRep) -> Iterator[QuadInt]:
    """The norm-many canonical coset representatives of O modulo the ideal."""
    (a, _), (_, d) = ideal.basis
    for i in range(a):
        for j in range(d):
            yield QuadInt(i, j)


def congruent(z: Sequence[QuadInt], v: Sequence[QuadInt], ideal: IdealRep) -> bool:
    """True iff every component of z - v lies in the ideal."""
    if len(z) != len(v):
        raise ValueError(f"length mismatch: {len(z)} != {len(v)}")
    return all(ideal_contains(ideal, zi - vi) for zi, vi in zip(z, v))


@dataclass(frozen=True)
class QuadRat:
    """Field element a + b*omega with rational coordinates."""

    a: Fraction
    b: Fraction

    @classmethod
    def from_quadint(cls, x: QuadInt) -> "QuadRat":
        return cls(Fraction(x.a), Fraction(x.b))

    def __add__(self, other: "QuadRat") -> "QuadRat":
        return QuadRat(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QuadRat") -> "QuadRat":
        return QuadRat(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "QuadRat":
        return QuadRat(-self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


def mul_rat(f: FieldSpec, x: QuadRat, y: QuadRat) -> QuadRat:
    s, t = f.trace_omega, f.norm_omega
    return QuadRat(
        x.a * y.a - t * x.b * y.b,
        x.a * y.b + x.b * y.a + s * x.b * y.b,
    )


def regular_representation_rat(
    f: FieldSpec, y: QuadRat
) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """Rational regular representation, same action convention as the integral one."""
    s, t = f.trace_omega, f.norm_omega
    return ((y.a, y.b), (-t * y.b, y.a + s * y.b))
