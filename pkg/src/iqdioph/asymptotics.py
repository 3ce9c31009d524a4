"""Convergence experiments: counted solutions against the predicted volume.

For randomly sampled theta matrices the solution count divided by the
adelic volume of the cutoff region should drift to 1 as the cutoff grows;
this module tabulates those ratios over a cutoff grid and fits the
empirical error exponent per theta.  The exponent fit is diagnostic
output, never an assertion: almost-everywhere asymptotics carry no rate
at any finite scale.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .counting import GridCount, ProblemSpec, Theta, count_for_grid
from .regions import RegionKind, RegionSpec, adelic_volume

__all__ = [
    "ExperimentPlan",
    "ConvergenceRow",
    "ConvergenceTable",
    "ExponentFit",
    "sample_thetas",
    "run_convergence",
    "fit_error_exponent",
    "table_to_csv",
]

CSV_HEADER = "theta_index,T,count,predicted,ratio"


@dataclass(frozen=True)
class ExperimentPlan:
    spec: ProblemSpec
    T_grid: tuple[float, ...]
    theta_count: int
    theta_box: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.T_grid:
            raise ValueError("empty cutoff grid")
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise ValueError("cutoff grid must be strictly increasing")
        if self.T_grid[0] <= 1:
            raise ValueError("cutoffs must be > 1")
        if self.theta_count < 1:
            raise ValueError("theta_count must be >= 1")
        if self.theta_box <= 0:
            raise ValueError("theta_box must be positive")


@dataclass(frozen=True)
class ConvergenceRow:
    theta_index: int
    T: float
    count: int
    predicted: float
    ratio: float


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    # per cutoff: (T, median ratio, interquartile range)
    summary: tuple[tuple[float, float, float], ...]


def sample_thetas(plan: ExperimentPlan) -> list[Theta]:
    """Entries uniform on [0, box]^2 as a complex rectangle; fixed draw order."""
    rng = np.random.default_rng(np.random.SeedSequence(plan.seed))
    m, n = plan.spec.m, plan.spec.n
    out = []
    for _ in range(plan.theta_count):
        draws = rng.uniform(0.0, plan.theta_box, size=(m, n, 2))
        rows = tuple(
            tuple(complex(draws[i, j, 0], draws[i, j, 1]) for j in range(n))
            for i in range(m)
        )
        out.append(Theta(rows))
    return out


def _predicted(spec: ProblemSpec, t_val: float) -> float:
    region = RegionSpec(RegionKind.E_T, spec.m, spec.n, spec.psi, t_val)
    return adelic_volume(region, spec.field, spec.ideal)


def _one_theta(args: tuple[ProblemSpec, Theta, tuple[float, ...]]) -> list[GridCount]:
    spec, theta, grid = args
    return count_for_grid(spec, theta, grid)


def run_convergence(plan: ExperimentPlan, threads: int = 1) -> ConvergenceTable:
    """Count every sampled theta over the grid and tabulate count/predicted.

    Theta instances are independent, so they parallelize trivially; the
    table layout and all numbers are independent of the worker count.
    """
    thetas = sample_thetas(plan)
    grid = tuple(float(t) for t in plan.T_grid)
    jobs = [(plan.spec, th, grid) for th in thetas]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_theta, jobs))
    else:
        results = [_one_theta(job) for job in jobs]
    predicted = {t: _predicted(plan.spec, t) for t in grid}
    rows = []
    for idx, counts in enumerate(results):
        for gc in counts:
            pred = predicted[gc.T]
            ratio = gc.count / pred if pred > 0 else float("nan")
            rows.append(
                ConvergenceRow(
                    theta_index=idx,
                    T=gc.T,
                    count=gc.count,
                    predicted=pred,
                    ratio=ratio,
                )
            )
    summary = []
    for t_val in grid:
        ratios = sorted(r.ratio for r in rows if r.T == t_val)
        med = statistics.median(ratios)
        quarts = statistics.quantiles(ratios, n=4) if len(ratios) > 1 else [med, med, med]
        summary.append((t_val, med, quarts[2] - quarts[0]))
    return ConvergenceTable(rows=tuple(rows), summary=tuple(summary))


@dataclass(frozen=True)
class ExponentFit:
    theta_index: int
    beta: float | None
    degenerate: bool
    points: int


def fit_error_exponent(table: ConvergenceTable, min_predicted: float = 10.0) -> list[ExponentFit]:
    """Per theta, least-squares slope of log|count - predicted| vs log predicted.

    Rows with predicted below the floor are ignored; zero residuals make a
    fit degenerate (the log is undefined), which is flagged rather than
    patched over.
    """
    by_theta: dict[int, list[ConvergenceRow]] = {}
    for row in table.rows:
        by_theta.setdefault(row.theta_index, []).append(row)
    fits = []
    for idx in sorted(by_theta):
        rows = [r for r in by_theta[idx] if r.predicted > min_predicted]
        resid = [(r.predicted, abs(r.count - r.predicted)) for r in rows]
        usable = [(p, e) for p, e in resid if e > 0]
        if len(rows) < 3 or len(usable) < len(resid) or len(usable) < 2:
            fits.append(
                ExponentFit(theta_index=idx, beta=None, degenerate=True, points=len(usable))
            )
            continue
        xs = np.log([p for p, _ in usable])
        ys = np.log([e for _, e in usable])
        slope = float(np.polyfit(xs, ys, 1)[0])
        fits.append(ExponentFit(theta_index=idx, beta=slope, degenerate=False, points=len(usable)))
    return fits


def table_to_csv(table: ConvergenceTable) -> str:
    lines = [CSV_HEADER]
    for r in table.rows:
        lines.append(f"{r.theta_index},{r.T!r},{r.count},{r.predicted!r},{r.ratio!r}")
    return "\n".join(lines) + "\n"
