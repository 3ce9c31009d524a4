"""Command-line front end: configuration, orchestration, CSV and SVG output.

Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
numeric failures (non-finite inputs).  All randomness flows from the seeds
in the configuration or flags, and CSV output is byte-identical across
reruns with the same seed; timing diagnostics go to stderr so they never
perturb the data stream.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import asymptotics, counting, heights, plotting, regions, siegelmc
from .numberfield import FieldSpec, QuadInt, field_new, ideal_from_generators
from .regions import ConstantPsi, PowerPsi, PsiSpec, RegionKind, RegionSpec, StepPsi

__all__ = ["main", "ConfigError", "load_config"]


class ConfigError(Exception):
    """Invalid configuration or command parameters."""


_PAIR = {
    "type": "array",
    "items": {"type": "integer"},
    "minItems": 2,
    "maxItems": 2,
}

_RATIONAL = {"type": ["number", "string"]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["field", "problem", "plan"],
    "properties": {
        "field": {
            "type": "object",
            "additionalProperties": False,
            "required": ["D"],
            "properties": {"D": {"type": "integer", "minimum": 1}},
        },
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "required": ["m", "n", "psi", "v"],
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "psi": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["family", "params"],
                    "properties": {
                        "family": {"enum": ["constant", "power", "step"]},
                        "params": {"type": "object"},
                    },
                },
                "v": {"type": "array", "items": _PAIR, "minItems": 1},
                "ideal": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["generators"],
                    "properties": {
                        "generators": {"type": "array", "items": _PAIR, "minItems": 1}
                    },
                },
            },
        },
        "plan": {
            "type": "object",
            "additionalProperties": False,
            "required": ["T_grid", "theta_count", "seed"],
            "properties": {
                "T_grid": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 1},
                    "minItems": 1,
                },
                "theta_count": {"type": "integer", "minimum": 1},
                "theta_box": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv_path": {"type": "string"},
                "svg_path": {"type": "string"},
            },
        },
    },
}


def _fraction(value) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational value {value!r}: {exc}") from exc


def _build_psi(node: dict) -> PsiSpec:
    family = node["family"]
    params = node["params"]
    try:
        if family == "constant":
            return ConstantPsi(c=_fraction(params["c"]))
        if family == "power":
            return PowerPsi(c=_fraction(params["c"]), s=_fraction(params["s"]))
        breaks = tuple(
            (_fraction(t), _fraction(c)) for t, c in params["breaks"]
        )
        return StepPsi(breaks=breaks)
    except KeyError as exc:
        raise ConfigError(f"psi family {family!r} is missing parameter {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid psi parameters: {exc}") from exc


@dataclass(frozen=True)
class Config:
    field: FieldSpec
    spec: counting.ProblemSpec
    t_grid: tuple[float, ...]
    theta_count: int
    theta_box: float
    seed: int
    csv_path: str | None
    svg_path: str | None

    def plan(self) -> asymptotics.ExperimentPlan:
        try:
            return asymptotics.ExperimentPlan(
                spec=self.spec,
                T_grid=self.t_grid,
                theta_count=self.theta_count,
                theta_box=self.theta_box,
                seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str) -> Config:
    """Parse, schema-validate, and materialize an experiment configuration."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    try:
        f = field_new(raw["field"]["D"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    prob = raw["problem"]
    m, n = prob["m"], prob["n"]
    psi = _build_psi(prob["psi"])
    v = tuple(QuadInt(a, b) for a, b in prob["v"])
    if "ideal" in prob:
        gens = [QuadInt(a, b) for a, b in prob["ideal"]["generators"]]
        try:
            ideal = ideal_from_generators(f, gens)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        ideal = ideal_from_generators(f, [QuadInt(1, 0)])
    plan_node = raw["plan"]
    t_grid = tuple(float(t) for t in plan_node["T_grid"])
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError("plan.T_grid must be strictly increasing")
    try:
        spec = counting.ProblemSpec(
            field=f, m=m, n=n, psi=psi, v=v, ideal=ideal, T=None
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    outputs = raw.get("outputs", {})
    return Config(
        field=f,
        spec=spec,
        t_grid=t_grid,
        theta_count=plan_node["theta_count"],
        theta_box=float(plan_node.get("theta_box", 1.0)),
        seed=plan_node["seed"],
        csv_path=outputs.get("csv_path"),
        svg_path=outputs.get("svg_path"),
    )


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        if value < 1:
            raise ConfigError("--threads must be >= 1")
        return value
    env = os.environ.get("COUNT_THREADS")
    if env:
        try:
            parsed = int(env)
        except ValueError as exc:
            raise ConfigError(f"COUNT_THREADS must be an integer, got {env!r}") from exc
        if parsed < 1:
            raise ConfigError("COUNT_THREADS must be >= 1")
        return parsed
    return os.cpu_count() or 1


def _parse_theta(text: str, m: int, n: int) -> counting.Theta:
    if text == "zero":
        return counting.Theta.zero(m, n)
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float.fromhex(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"theta entries must be hex floats or 'zero': {exc}") from exc
    try:
        return counting.Theta.from_flat(values, m, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


COUNT_HEADER = "T,count,predicted,ratio,q_enumerated"


def cmd_count(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    t_val = args.T if args.T is not None else cfg.t_grid[-1]
    if t_val <= 1:
        raise ConfigError("count requires a cutoff T > 1")
    spec = counting.ProblemSpec(
        field=cfg.spec.field,
        m=cfg.spec.m,
        n=cfg.spec.n,
        psi=cfg.spec.psi,
        v=cfg.spec.v,
        ideal=cfg.spec.ideal,
        T=float(t_val),
    )
    theta = _parse_theta(args.theta, spec.m, spec.n)
    report = counting.count_solutions(spec, theta, threads=_resolve_threads(args.threads))
    print(COUNT_HEADER)
    print(
        f"{report.T!r},{report.count},{report.predicted!r},{report.ratio!r},{report.q_enumerated}"
    )
    print(f"wall_time_seconds={report.wall_time:.3f}", file=sys.stderr)
    if not report.theorem_backed:
        print("warning: d < 3, count is not theorem-backed", file=sys.stderr)
    return 0


def cmd_asymptotics(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if not cfg.csv_path or not cfg.svg_path:
        raise ConfigError("asymptotics requires outputs.csv_path and outputs.svg_path")
    table = asymptotics.run_convergence(cfg.plan(), threads=_resolve_threads(args.threads))
    Path(cfg.csv_path).write_text(asymptotics.table_to_csv(table))
    plotting.save_svg(plotting.convergence_figure(table), cfg.svg_path)
    print("T,median_ratio,iqr")
    for t_val, med, iqr in table.summary:
        print(f"{t_val!r},{med!r},{iqr!r}")
    for fit in asymptotics.fit_error_exponent(table):
        status = "degenerate" if fit.degenerate else f"beta={fit.beta:.4f}"
        print(f"theta {fit.theta_index}: {status} ({fit.points} points)", file=sys.stderr)
    return 0


VOLUME_HEADER = (
    "region,T,m,n,d,eps,vol,alpha_inf,alpha_adelic,mc_estimate,mc_std_error,mc_samples"
)

_REGION_NAMES = {
    "E_T": RegionKind.E_T,
    "E_minus": RegionKind.E_MINUS,
    "E_plus": RegionKind.E_PLUS,
    "C0": RegionKind.C0,
}


def cmd_volume(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    kind = _REGION_NAMES.get(args.region)
    if kind is None:
        raise ConfigError(
            f"unknown region kind {args.region!r}; choose from {sorted(_REGION_NAMES)}"
        )
    eps = args.eps
    if kind in (RegionKind.E_MINUS, RegionKind.E_PLUS) and eps is None:
        raise ConfigError("squeeze regions need --eps")
    print(VOLUME_HEADER)
    d = cfg.spec.d
    for t_val in cfg.t_grid:
        try:
            region = RegionSpec(kind, cfg.spec.m, cfg.spec.n, cfg.spec.psi, float(t_val), eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        vol = regions.volume_archimedean(region)
        alpha_inf = 2.0 ** d * vol
        adelic = regions.adelic_volume(region, cfg.field, cfg.spec.ideal)
        if args.mc:
            mc = regions.volume_monte_carlo(region, args.mc, seed=args.mc_seed)
            mc_cols = f"{mc.estimate!r},{mc.std_error!r},{mc.samples}"
        else:
            mc_cols = ",,"
        eps_col = "" if eps is None else repr(float(eps))
        print(
            f"{args.region},{float(t_val)!r},{cfg.spec.m},{cfg.spec.n},{d},"
            f"{eps_col},{vol!r},{alpha_inf!r},{adelic!r},{mc_cols}"
        )
    return 0


def cmd_heights(args: argparse.Namespace) -> int:
    if args.k < 2:
        raise ConfigError("--k must be >= 2")
    if args.k >= args.d:
        raise ConfigError("--d must exceed --k")
    if args.xmax < 1 or args.xmax > 1000:
        raise ConfigError("--xmax must be in [1, 1000]")
    try:
        report = heights.tail_sum(args.k, args.d, args.xmax)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print("x,count")
    x = 1.0
    while x < args.xmax:
        print(f"{x!r},{heights.subspace_count(args.k, x)}")
        x *= 2.0
    print(f"{float(args.xmax)!r},{heights.subspace_count(args.k, args.xmax)}")
    if args.blocks_csv:
        lines = ["j,S_j,bound"]
        for block in report.blocks:
            lines.append(f"{block.j},{block.total!r},{report.bound(block.j)!r}")
        Path(args.blocks_csv).write_text("\n".join(lines) + "\n")
    if args.svg:
        plotting.save_svg(plotting.tail_blocks_figure(report), args.svg)
    return 0


def cmd_echelon(args: argparse.Namespace) -> int:
    if args.m < 1 or args.k < args.m:
        raise ConfigError("need 1 <= m <= k")
    if args.bound < 1:
        raise ConfigError("--bound must be >= 1")
    field = None
    if args.field_D is not None:
        try:
            field = field_new(args.field_D)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    forms = heights.echelon_enumerate(args.m, args.k, args.bound, field)
    print("index,pivots,entries")
    for idx, form in enumerate(forms):
        pivots = ";".join(str(p) for p in form.pivots)
        flat = []
        for row in form.entries:
            for entry in row:
                if field is None:
                    flat.append(str(entry))
                else:
                    flat.append(f"{entry.a}|{entry.b}")
        print(f"{idx},{pivots},{';'.join(flat)}")
    return 0


def cmd_siegel(args: argparse.Namespace) -> int:
    if args.radius <= 0:
        raise ConfigError("--radius must be positive")
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    report = siegelmc.siegel_mc_check(args.radius, args.samples, seed=args.seed)
    print("radius,mean,std_error,target")
    print(
        f"{float(args.radius)!r},{report.mean_count!r},{report.std_error!r},"
        f"{report.target_area!r}"
    )
    if args.svg:
        plotting.save_svg(plotting.siegel_figure(report), args.svg)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iqdioph",
        description="Counting and verification tools for Diophantine approximation "
        "over imaginary quadratic fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_count = sub.add_parser("count", help="count solutions for one theta")
    p_count.add_argument("config")
    p_count.add_argument(
        "--theta",
        default="zero",
        help="'zero' or comma-separated hex floats (2*m*n of them, row-major, re/im)",
    )
    p_count.add_argument("--T", type=float, default=None, help="override cutoff (default: last grid entry)")
    p_count.add_argument("--threads", type=int, default=None)
    p_count.set_defaults(func=cmd_count)

    p_asym = sub.add_parser("asymptotics", help="ratio table and plot over the cutoff grid")
    p_asym.add_argument("config")
    p_asym.add_argument("--threads", type=int, default=None)
    p_asym.set_defaults(func=cmd_asymptotics)

    p_vol = sub.add_parser("volume", help="closed-form and Monte Carlo region volumes")
    p_vol.add_argument("config")
    p_vol.add_argument("--region", default="E_T")
    p_vol.add_argument("--eps", type=float, default=None)
    p_vol.add_argument("--mc", type=int, default=None, help="Monte Carlo sample count")
    p_vol.add_argument("--mc-seed", type=int, default=0)
    p_vol.set_defaults(func=cmd_volume)

    p_h = sub.add_parser("heights", help="line counts and dyadic tail sums")
    p_h.add_argument("--k", type=int, required=True)
    p_h.add_argument("--d", type=int, required=True)
    p_h.add_argument("--xmax", type=float, required=True)
    p_h.add_argument("--blocks-csv", default=None)
    p_h.add_argument("--svg", default=None)
    p_h.set_defaults(func=cmd_heights)

    p_e = sub.add_parser("echelon", help="enumerate bounded echelon forms")
    p_e.add_argument("--m", type=int, required=True)
    p_e.add_argument("--k", type=int, required=True)
    p_e.add_argument("--bound", type=int, required=True)
    p_e.add_argument("--field-D", type=int, default=None)
    p_e.set_defaults(func=cmd_echelon)

    p_s = sub.add_parser("siegel", help="mean value Monte Carlo check for planar lattices")
    p_s.add_argument("--radius", type=float, required=True)
    p_s.add_argument("--samples", type=int, required=True)
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--svg", default=None)
    p_s.set_defaults(func=cmd_siegel)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2
    except counting.NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
