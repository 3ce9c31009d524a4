"""Cutoff regions in C^d and their exact and Monte Carlo volumes.

A region couples an approximation function psi with a shell condition on
the last n coordinates.  Throughout, ||z||_inf on C^k is the supremum of
the squared moduli of the coordinates.  The base region at cutoff T is

    { (x, y) in C^m x C^n : ||x||_inf^m <= psi(||y||_inf^n),
                            1 <= ||y||_inf^n < T }.

The squeeze regions shrink or inflate both the psi bound and the shell by
a factor (1 + eps), with a fixed cap box over the shell [1/2, 3/2] glued
onto the inflated region.

Volumes use the fact that the pushforward of Lebesgue measure on C^n under
y -> (max_j |y_j|^2)^n is pi^n du on [0, infinity), which reduces every
region volume to a one-dimensional integral of psi; for the supported psi
families that integral has a closed form.  The Monte Carlo estimator,
kept as an independent check, does rejection sampling in a bounding
polydisc, stratified along the shell variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from mpmath import mp

from .numberfield import FieldSpec, IdealRep

__all__ = [
    "ConstantPsi",
    "PowerPsi",
    "StepPsi",
    "PsiSpec",
    "RegionKind",
    "RegionSpec",
    "psi_eval",
    "psi_eval_array",
    "psi_eval_mp",
    "psi_integral",
    "psi_integral_range",
    "membership",
    "volume_archimedean",
    "adelic_volume",
    "MCVolume",
    "volume_monte_carlo",
    "SandwichReport",
    "sandwich_check",
]


# ---------------------------------------------------------------------------
# psi families


@dataclass(frozen=True)
class ConstantPsi:
    c: Fraction

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("constant psi must be positive")


@dataclass(frozen=True)
class PowerPsi:
    """psi(t) = c * t^(-s) with 0 < s <= 1."""

    c: Fraction
    s: Fraction

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("power psi needs c > 0")
        if not 0 < self.s <= 1:
            raise ValueError("power psi needs 0 < s <= 1")


@dataclass(frozen=True)
class StepPsi:
    """Decreasing step function: value breaks[i][1] on [breaks[i][0], breaks[i+1][0]).

    The first breakpoint must be t = 1; the last value persists on
    [breaks[-1][0], infinity).
    """

    breaks: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        if not self.breaks or self.breaks[0][0] != 1:
            raise ValueError("step psi must start at t = 1")
        ts = [t for t, _ in self.breaks]
        cs = [c for _, c in self.breaks]
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("step psi breakpoints must be strictly increasing")
        if any(c <= 0 for c in cs):
            raise ValueError("step psi values must be positive")
        if any(c1 < c2 for c1, c2 in zip(cs, cs[1:])):
            raise ValueError("step psi values must be nonincreasing")


PsiSpec = Union[ConstantPsi, PowerPsi, StepPsi]


def psi_eval(psi: PsiSpec, t: float) -> float:
    """psi(t), with the extension psi(t) = 0 for 0 <= t < 1."""
    if t < 0:
        raise ValueError("psi is defined for t >= 0")
    if t < 1:
        return 0.0
    if isinstance(psi, ConstantPsi):
        return float(psi.c)
    if isinstance(psi, PowerPsi):
        return float(psi.c) * float(t) ** (-float(psi.s))
    for tb, cb in reversed(psi.breaks):
        if t >= tb:
            return float(cb)
    return 0.0  # unreachable: breaks start at 1


def psi_eval_array(psi: PsiSpec, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    live = t >= 1.0
    if isinstance(psi, ConstantPsi):
        out[live] = float(psi.c)
    elif isinstance(psi, PowerPsi):
        out[live] = float(psi.c) * np.power(t[live], -float(psi.s))
    else:
        ts = np.array([float(tb) for tb, _ in psi.breaks])
        cs = np.array([float(cb) for _, cb in psi.breaks])
        idx = np.searchsorted(ts, t[live], side="right") - 1
        out[live] = cs[idx]
    return out


def psi_eval_mp(psi: PsiSpec, t) -> "mp.mpf":
    """High-precision psi(t) for boundary re-tests; uses the ambient mp context."""
    tv = mp.mpf(t)
    if tv < 1:
        return mp.mpf(0)
    if isinstance(psi, ConstantPsi):
        return mp.mpf(psi.c.numerator) / psi.c.denominator
    if isinstance(psi, PowerPsi):
        c = mp.mpf(psi.c.numerator) / psi.c.denominator
        s = mp.mpf(psi.s.numerator) / psi.s.denominator
        return c * tv ** (-s)
    value = psi.breaks[0][1]
    for tb, cb in psi.breaks:
        if tv >= mp.mpf(tb.numerator) / tb.denominator:
            value = cb
    return mp.mpf(value.numerator) / value.denominator


def psi_integral_range(psi: PsiSpec, a: float, b: float) -> float:
    """Integral of psi over [a, b], with psi = 0 below 1.  Closed form per family."""
    if b <= a:
        return 0.0
    a = max(a, 1.0)
    if b <= a:
        return 0.0
    if isinstance(psi, ConstantPsi):
        return float(psi.c) * (b - a)
    if isinstance(psi, PowerPsi):
        c, s = float(psi.c), float(psi.s)
        if psi.s == 1:
            return c * math.log(b / a)
        return c * (b ** (1.0 - s) - a ** (1.0 - s)) / (1.0 - s)
    total = 0.0
    ts = [float(tb) for tb, _ in psi.breaks] + [math.inf]
    for (tb, cb), t_next in zip(psi.breaks, ts[1:]):
        lo = max(a, float(tb))
        hi = min(b, t_next)
        if hi > lo:
            total += float(cb) * (hi - lo)
    return total


def psi_integral(psi: PsiSpec, T: float) -> float:
    """Psi(T) = integral of psi over [1, T]."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return psi_integral_range(psi, 1.0, T)


# ---------------------------------------------------------------------------
# regions


class RegionKind(Enum):
    E_T = "E_T"
    E_MINUS = "E_T_eps_minus"
    E_PLUS = "E_T_eps_plus"
    C0 = "C0"


@dataclass(frozen=True)
class RegionSpec:
    """Archimedean region in C^d, d = m + n.

    eps is required for the squeeze kinds and ignored otherwise.
    """

    kind: RegionKind
    m: int
    n: int
    psi: PsiSpec
    T: float
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.kind in (RegionKind.E_MINUS, RegionKind.E_PLUS):
            if self.eps is None or not 0 < self.eps < 0.5:
                raise ValueError("squeeze regions need eps in (0, 1/2)")

    @property
    def d(self) -> int:
        return self.m + self.n


def _shell(region: RegionSpec) -> tuple[float, float, bool, bool]:
    """Shell bounds (lo, hi, lo_closed, hi_closed) for u = ||y||_inf^n."""
    kind, T, eps = region.kind, region.T, region.eps
    if kind is RegionKind.E_T:
        return 1.0, T, True, False
    if kind is RegionKind.E_MINUS:
        return 1.5, T / (1.0 + eps), True, False
    if kind is RegionKind.E_PLUS:
        return 0.5, (1.0 + eps) * T, True, True
    return 0.5, 1.5, True, True


def _slice_bound(region: RegionSpec, u: float) -> float:
    """The psi bound on ||x||_inf^m at shell value u, ignoring the shell itself.

    Nonincreasing in u on the shell for every kind, which is what lets the
    Monte Carlo strata cap their bounding polydisc at the left edge.
    """
    kind, psi, eps = region.kind, region.psi, region.eps
    if kind is RegionKind.E_T:
        return psi_eval(psi, u)
    if kind is RegionKind.E_MINUS:
        return psi_eval(psi, (1.0 + eps) * u) / (1.0 + eps)
    if kind is RegionKind.C0:
        return 2.0 * psi_eval(psi, 1.0)
    bound = 0.0
    if u <= 1.5:
        bound = 2.0 * psi_eval(psi, 1.0)
    if u >= 1.5:
        bound = max(bound, (1.0 + eps) * psi_eval(psi, u / (1.0 + eps)))
    return bound


def _slice_bound_array(region: RegionSpec, u: np.ndarray) -> np.ndarray:
    kind, psi, eps = region.kind, region.psi, region.eps
    if kind is RegionKind.E_T:
        return psi_eval_array(psi, u)
    if kind is RegionKind.E_MINUS:
        return psi_eval_array(psi, (1.0 + eps) * u) / (1.0 + eps)
    if kind is RegionKind.C0:
        return np.full_like(u, 2.0 * psi_eval(psi, 1.0))
    bound = np.where(u <= 1.5, 2.0 * psi_eval(psi, 1.0), 0.0)
    upper = (1.0 + eps) * psi_eval_array(psi, u / (1.0 + eps))
    return np.maximum(bound, np.where(u >= 1.5, upper, 0.0))


def _x_bound(region: RegionSpec, u: float) -> float:
    """Supremum of admissible ||x||_inf^m at shell value u (0 outside the shell)."""
    lo, hi, lo_closed, hi_closed = _shell(region)
    inside = (lo <= u if lo_closed else lo < u) and (u <= hi if hi_closed else u < hi)
    return _slice_bound(region, u) if inside else 0.0


def _split_point(region: RegionSpec, point: Sequence[complex]) -> tuple[float, float]:
    if len(point) != region.d:
        raise ValueError(f"point has length {len(point)}, expected {region.d}")
    x_sup = max(abs(z) ** 2 for z in point[: region.m])
    y_sup = max(abs(z) ** 2 for z in point[region.m:])
    return x_sup ** region.m, y_sup ** region.n


def membership(region: RegionSpec, point: Sequence[complex]) -> bool:
    """Archimedean membership test per the region's defining inequalities."""
    x_pow, u = _split_point(region, point)
    lo, hi, lo_closed, hi_closed = _shell(region)
    inside = (lo <= u if lo_closed else lo < u) and (u <= hi if hi_closed else u < hi)
    return inside and x_pow <= _x_bound(region, u)


def volume_archimedean(region: RegionSpec) -> float:
    """Standard 2d-dimensional volume of the region; exact closed form.

    For the base region this is pi^d * Psi(T).  The squeeze regions follow
    from the same shell change of variables with substituted bounds, and
    the cap box contributes 2*psi(1)*pi^d.
    """
    d = region.d
    kind, psi, T, eps = region.kind, region.psi, region.T, region.eps
    pi_d = math.pi ** d
    if kind is RegionKind.E_T:
        return pi_d * psi_integral(psi, T)
    if kind is RegionKind.C0:
        return pi_d * 2.0 * psi_eval(psi, 1.0)
    if kind is RegionKind.E_MINUS:
        # substitute w = (1+eps)*u in the shell integral
        scale = (1.0 + eps) ** -2
        lo = 1.5 * (1.0 + eps)
        return pi_d * scale * psi_integral_range(psi, lo, max(T, lo))
    # E_PLUS = inflated region glued with the cap box (overlap has measure zero)
    scale = (1.0 + eps) ** 2
    lo = 1.5 / (1.0 + eps)
    inflated = pi_d * scale * psi_integral_range(psi, lo, max(T, lo))
    return inflated + pi_d * 2.0 * psi_eval(psi, 1.0)


def adelic_volume(region: RegionSpec, f: FieldSpec, ideal: IdealRep) -> float:
    """Volume in the product measure over all completions.

    The congruence component contributes N(ideal)^(-d); the archimedean
    coordinate measure is twice Lebesgue measure per complex coordinate,
    whence the 2^d, and the discriminant normalizes the product to give
    2^d * |disc|^(-d/2) * N(ideal)^(-d) * vol.
    """
    d = region.d
    return (
        2.0 ** d
        * abs(f.discriminant) ** (-d / 2.0)
        * float(ideal.norm) ** (-d)
        * volume_archimedean(region)
    )


# ---------------------------------------------------------------------------
# Monte Carlo volume


@dataclass(frozen=True)
class MCVolume:
    estimate: float
    std_error: float
    samples: int
    strata: int


def _sample_stratum(
    region: RegionSpec,
    u0: float,
    u1: float,
    count: int,
    rng: np.random.Generator,
) -> tuple[int, float]:
    """Rejection sampling on the bounding polydisc over one shell stratum.

    Returns (hits, box_volume).  The box caps the x polydisc at the
    stratum's left edge, where the slice bound is largest.  Only the radial
    variables are drawn: |x_i|^2 is uniform on [0, r^2] for a point uniform
    in a disc of radius r, and the shell variable u is uniform because the
    pushforward of Lebesgue measure under y -> (max_j |y_j|^2)^n is pi^n du.
    """
    m, n = region.m, region.n
    x_cap = _slice_bound(region, u0)
    box = math.pi ** (m + n) * x_cap * (u1 - u0)
    if count == 0:
        return 0, box
    u = rng.uniform(u0, u1, size=count)
    t_x = rng.uniform(0.0, 1.0, size=(count, m)) * x_cap ** (1.0 / m)
    x_pow = np.max(t_x, axis=1) ** m
    hits = int(np.count_nonzero(x_pow <= _slice_bound_array(region, u)))
    return hits, box


def volume_monte_carlo(
    region: RegionSpec, samples: int, seed: int, strata: int | None = None
) -> MCVolume:
    """Stratified rejection-sampling estimate of the archimedean volume.

    The shell range is partitioned into equal slices of the variable
    u = ||y||_inf^n (each slice carries equal y-volume), points are drawn
    uniformly in the per-slice bounding polydisc, and per-slice estimates
    box * hit-rate are summed.  Phases never enter: membership depends only
    on squared moduli, so only the radial variables are sampled.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lo, hi, _, _ = _shell(region)
    if hi <= lo:
        return MCVolume(0.0, 0.0, samples, 0)
    if strata is None:
        strata = min(64, max(8, samples // 4096))
    strata = max(1, min(strata, samples))
    edges = np.linspace(lo, hi, strata + 1)
    base, extra = divmod(samples, strata)
    ss = np.random.SeedSequence(seed)
    streams = ss.spawn(strata)
    total = 0.0
    var = 0.0
    for i in range(strata):
        n_i = base + (1 if i < extra else 0)
        rng = np.random.default_rng(streams[i])
        hits, box = _sample_stratum(region, float(edges[i]), float(edges[i + 1]), n_i, rng)
        if n_i == 0:
            continue
        p = hits / n_i
        total += box * p
        var += box * box * p * (1.0 - p) / n_i
    return MCVolume(estimate=total, std_error=math.sqrt(var), samples=samples, strata=strata)


# ---------------------------------------------------------------------------
# squeeze sandwich check


@dataclass(frozen=True)
class SandwichReport:
    violations_minus: int
    violations_plus: int
    samples_minus: int
    samples_plus: int


def _validate_h(h: np.ndarray, m: int, n: int) -> None:
    d = m + n
    if h.shape != (d, d):
        raise ValueError(f"h must be {d}x{d}")
    if np.max(np.abs(h[:m, m:])) > 1e-12:
        raise ValueError("h must be block lower triangular")
    det_prod = np.linalg.det(h[:m, :m]) * np.linalg.det(h[m:, m:])
    if abs(abs(det_prod) ** 2 - 1.0) > 1e-12:
        raise ValueError("h must satisfy ||det(alpha) det(gamma)||_inf = 1")


def _sample_points(region: RegionSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Interior points of the region, as an (count, d) complex array.

    Coverage is what matters here, not uniformity: the shell variable is
    uniform, y fills the corresponding sup-norm sphere, and x fills the
    admissible polydisc at each sampled shell value.
    """
    m, n = region.m, region.n
    lo, hi, _, _ = _shell(region)
    u = rng.uniform(lo, hi, size=count)
    m_val = u ** (1.0 / n)
    t_y = rng.uniform(0.0, 1.0, size=(count, n)) * m_val[:, None]
    argmax = rng.integers(0, n, size=count)
    t_y[np.arange(count), argmax] = m_val
    bound = _slice_bound_array(region, u)
    t_x = rng.uniform(0.0, 1.0, size=(count, m)) * bound[:, None] ** (1.0 / m)
    phases_x = rng.uniform(0.0, 2.0 * math.pi, size=(count, m))
    phases_y = rng.uniform(0.0, 2.0 * math.pi, size=(count, n))
    x = np.sqrt(t_x) * np.exp(1j * phases_x)
    y = np.sqrt(t_y) * np.exp(1j * phases_y)
    return np.hstack([x, y])


def _membership_array(region: RegionSpec, points: np.ndarray, slack: float) -> np.ndarray:
    m, n = region.m, region.n
    x_pow = np.max(np.abs(points[:, :m]) ** 2, axis=1) ** m
    u = np.max(np.abs(points[:, m:]) ** 2, axis=1) ** n
    lo, hi, _, _ = _shell(region)
    tol = slack * np.maximum(1.0, u)
    inside = (u >= lo - tol) & (u <= hi + tol)
    bound = _slice_bound_array(region, np.clip(u, lo, hi))
    return inside & (x_pow <= bound * (1.0 + slack) + slack)


def sandwich_check(
    m: int,
    n: int,
    psi: PsiSpec,
    T: float,
    eps: float,
    h: np.ndarray,
    sample_count: int,
    seed: int,
) -> SandwichReport:
    """Empirical containment test: shrunk region inside h*E_T inside inflated region.

    Draws points of the shrunk region and checks h^{-1} * point in E_T, then
    points of h*E_T (images of E_T points under h) against the inflated
    region.  Membership failures beyond a 1e-9 relative guard count as
    violations, so floating-point noise at the boundaries is not reported.
    """
    if T <= 10:
        raise ValueError("squeeze containment requires T > 10")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    h = np.asarray(h, dtype=complex)
    _validate_h(h, m, n)
    base = RegionSpec(RegionKind.E_T, m, n, psi, T)
    minus = RegionSpec(RegionKind.E_MINUS, m, n, psi, T, eps)
    plus = RegionSpec(RegionKind.E_PLUS, m, n, psi, T, eps)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    slack = 1e-9
    if sample_count == 0:
        return SandwichReport(0, 0, 0, 0)
    pts_minus = _sample_points(minus, sample_count, rng)
    pulled_back = np.linalg.solve(h, pts_minus.T).T
    ok_minus = _membership_array(base, pulled_back, slack)
    pts_base = _sample_points(base, sample_count, rng)
    pushed = (h @ pts_base.T).T
    ok_plus = _membership_array(plus, pushed, slack)
    return SandwichReport(
        violations_minus=int(np.count_nonzero(~ok_minus)),
        violations_plus=int(np.count_nonzero(~ok_plus)),
        samples_minus=sample_count,
        samples_plus=sample_count,
    )
