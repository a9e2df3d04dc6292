"""Command-line surface: simulate, analytic, optimize, sweep, oracle.

Exit codes: 0 success, 2 invalid parameters (argparse uses 2 as well),
3 configuration/file problems. Numbers are printed with 9 significant
digits and '.' as the decimal separator regardless of locale.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import analytic
from .alpha import AlphaTable, default_table, load_alpha_table
from .engine import exhaustive, monte_carlo
from .errors import ConfigurationError, InvalidParameterError
from .model import make_instance, instance_label
from .optimize import CURVES, lambda_sweep, maximize_concave, parse_grid
from .strategies import PolicySpec, ceil_frac, load_schedule_family

STRATEGIES = ("sec", "sop", "tps", "wai", "rpi")


def _sig9(value: float) -> float:
    return float(f"{value:.9g}")


def _rounded(obj):
    """Round every float in a JSON-ready structure to 9 significant digits."""
    if isinstance(obj, float):
        return _sig9(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    except OSError as exc:
        raise ConfigurationError(f"cannot write output file: {exc}") from exc


def _alpha_table(args) -> AlphaTable:
    path = getattr(args, "alpha_table", None)
    return load_alpha_table(path) if path else default_table()


def _policy_spec(args) -> PolicySpec:
    family = None
    if args.strategy == "rpi" and getattr(args, "schedule", None):
        family = load_schedule_family(args.schedule)
    return PolicySpec(kind=args.strategy, x=args.x, family=family)


def _fraction_field(value: Fraction) -> dict:
    return {"fraction": f"{value.numerator}/{value.denominator}", "decimal": _sig9(float(value))}


def cmd_simulate(args) -> int:
    spec = _policy_spec(args)
    instance = make_instance(args.instance, args.n, args.seed)
    report = monte_carlo(
        spec,
        instance,
        reps=args.reps,
        seed=args.seed,
        lam=args.lam,
        threads=args.threads,
        label=instance_label(args.instance),
    )
    payload = _rounded(report.to_dict())
    if args.format == "json":
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        strategy = payload.pop("strategy")
        payload["strategy"] = strategy["kind"]
        payload["x"] = strategy["x"]
        payload["schedule"] = strategy.get("schedule", "-")
        keys = list(payload.keys())
        lines = [",".join(keys), ",".join(str(payload[k]) for k in keys)]
        _emit("\n".join(lines), args.out)
    return 0


_FORMULAS = ("secretary", "sop", "wai", "rpi", "sec-n", "sop-n", "wai-n", "tps-n", "pmf")


def cmd_analytic(args) -> int:
    f = args.formula
    needs_n = f in ("sec-n", "sop-n", "wai-n", "tps-n", "pmf")
    if needs_n and args.n is None:
        raise InvalidParameterError(f"--formula {f} needs --n")
    if f == "secretary":
        value = analytic.secretary_limit_prob(args.x)
    elif f == "sop":
        value = analytic.sop_limit_perf(args.x)
    elif f == "wai":
        value = analytic.wai_limit_prob(args.x, args.lam)
    elif f == "rpi":
        value = analytic.rpi_limit_perf(args.x, _alpha_table(args), args.lam)
    elif f == "sec-n":
        value = analytic.sec_accept_prob(args.n, ceil_frac(args.x, args.n))
    elif f == "sop-n":
        value = analytic.sop_finite_prob(args.n, args.x)
    elif f == "wai-n":
        value = analytic.wai_finite_prob(args.n, args.x)
    elif f == "tps-n":
        value = analytic.tps_finite_prob(args.n, args.x)
    else:
        pmf = analytic.stopping_time_pmf(args.n, args.x)
        _emit(json.dumps([_sig9(p) for p in pmf]), args.out)
        return 0
    _emit(f"{value:.9g}", args.out)
    return 0


_OBJECTIVES = ("secretary", "sop", "wai", "rpi")


def cmd_optimize(args) -> int:
    if args.objective == "secretary":
        f = analytic.secretary_limit_prob
        title = "record rule, single phase"
    elif args.objective == "sop":
        f = analytic.sop_limit_perf
        title = "shared observation window"
    elif args.objective == "wai":
        f = lambda x: analytic.wai_limit_prob(x, args.lam)  # noqa: E731
        title = f"waiting rule, lambda={args.lam:g}"
    else:
        table = _alpha_table(args)
        f = lambda x: analytic.rpi_limit_perf(x, table, args.lam)  # noqa: E731
        title = f"rank policy lower bound, lambda={args.lam:g}"
    result = maximize_concave(f, tol=args.tol)
    _emit(json.dumps(_rounded(result.to_dict()), indent=2), args.out)
    if args.plot:
        from .plots import render_objective

        xs = [i / 400 for i in range(401)]
        render_objective(xs, [f(x) for x in xs], result.x_star, result.f_star, title, args.plot)
    return 0


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    table = _alpha_table(args)
    per_curve = {
        "rpi_lower": lambda_sweep("rpi_lower", grid, tol=args.tol, table=table),
        "wai_upper": lambda_sweep("wai_upper", grid, tol=args.tol),
    }
    rows = []
    for i, lam in enumerate(grid):
        for curve in CURVES:
            _, x_star, value = per_curve[curve][i]
            rows.append((lam, curve, x_star, value))
    if args.format == "json":
        payload = [
            {"lambda": _sig9(lam), "curve": c, "x_star": _sig9(x), "value": _sig9(v)} for lam, c, x, v in rows
        ]
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        lines = ["lambda,curve,x_star,value"]
        for lam, c, x, v in rows:
            lines.append(f"{_sig9(lam):.9g},{c},{_sig9(x):.9g},{_sig9(v):.9g}")
        _emit("\n".join(lines), args.out)
    if args.plot:
        from .plots import render_sweep

        render_sweep(rows, args.plot)
    return 0


def cmd_oracle(args) -> int:
    spec = _policy_spec(args)
    instance = make_instance(args.instance, args.n, args.seed)
    report = exhaustive(spec, instance, lam=args.lam)
    payload = {
        "strategy": spec.descriptor(),
        "instance": instance_label(args.instance),
        "n": report.n,
        "lambda": _sig9(float(report.lam)),
        "expected_phase1": _fraction_field(report.expected_phase1),
        "expected_phase2": _fraction_field(report.expected_phase2),
        "prophet_mean": _fraction_field(report.prophet_mean),
        "ratio": _fraction_field(report.ratio),
        "accept_v1_prob": _fraction_field(report.accept_v1_prob),
        "accept_v1_phase1_prob": _fraction_field(report.accept_v1_phase1_prob),
        "accept_v1_phase2_prob": _fraction_field(report.accept_v1_phase2_prob),
        "stop_time": [_fraction_field(q) for q in report.stop_time],
    }
    _emit(json.dumps(_rounded(payload), indent=2), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prophet-lab",
        description="Simulate and evaluate two-phase optimal-stopping strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_output(p):
        p.add_argument("--out", default=None, help="write output to this file instead of stdout")

    sim = sub.add_parser("simulate", help="Monte-Carlo run of one strategy")
    sim.add_argument("--strategy", required=True, choices=STRATEGIES)
    sim.add_argument("--x", type=float, required=True, help="observation fraction in [0,1]")
    sim.add_argument("--n", type=int, default=2000)
    sim.add_argument("--reps", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--lambda", dest="lam", type=float, default=0.5)
    sim.add_argument("--instance", default="dirac", help="dirac | uniform | geometric[:ratio] | path")
    sim.add_argument("--schedule", default=None, help="JSON schedule table for --strategy rpi")
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--format", choices=("json", "csv"), default="json")
    common_output(sim)
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analytic", help="closed-form and quadrature values")
    ana.add_argument("--formula", required=True, choices=_FORMULAS)
    ana.add_argument("--x", type=float, required=True)
    ana.add_argument("--n", type=int, default=None)
    ana.add_argument("--lambda", dest="lam", type=float, default=0.5)
    ana.add_argument("--alpha-table", default=None)
    common_output(ana)
    ana.set_defaults(func=cmd_analytic)

    opt = sub.add_parser("optimize", help="maximize a limit objective over x")
    opt.add_argument("--objective", required=True, choices=_OBJECTIVES)
    opt.add_argument("--lambda", dest="lam", type=float, default=0.5)
    opt.add_argument("--tol", type=float, default=1e-6)
    opt.add_argument("--alpha-table", default=None)
    opt.add_argument("--plot", default=None, help="also render the objective to this image file")
    common_output(opt)
    opt.set_defaults(func=cmd_optimize)

    swp = sub.add_parser("sweep", help="lambda sweep of both bound curves")
    swp.add_argument("--grid", default="0:1:0.01", help="start:stop:step")
    swp.add_argument("--tol", type=float, default=1e-6)
    swp.add_argument("--alpha-table", default=None)
    swp.add_argument("--format", choices=("csv", "json"), default="csv")
    swp.add_argument("--plot", default=None, help="also render both curves to this image file")
    common_output(swp)
    swp.set_defaults(func=cmd_sweep)

    orc = sub.add_parser("oracle", help="exact enumeration over all arrival orders (n <= 4)")
    orc.add_argument("--strategy", required=True, choices=STRATEGIES)
    orc.add_argument("--x", type=float, required=True)
    orc.add_argument("--n", type=int, default=2)
    orc.add_argument("--seed", type=int, default=42)
    orc.add_argument("--lambda", dest="lam", type=float, default=0.5)
    orc.add_argument("--instance", default="dirac")
    orc.add_argument("--schedule", default=None)
    common_output(orc)
    orc.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
