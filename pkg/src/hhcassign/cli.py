"""Command-line front end: ``solve``, ``sweep``, ``compare`` and ``gen``.

Exit codes: 0 success, 2 validation error, 3 search limits exhausted with
no incumbent.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import bench
from .exact import NoIncumbentError
from .instance_io import (
    GeneratorParams,
    dumps,
    generate,
    instance_to_dict,
    load_instance,
    solution_to_dict,
)
from .model import InstanceError, PenaltyWeights, compute_metrics

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_INCUMBENT = 3


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _grid(text: str) -> list[Fraction]:
    return [_rational(t.strip()) for t in text.split(",") if t.strip()]


def _int_range(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    return int(parts[0]), int(parts[1])


def _rational_range(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    return _rational(parts[0]), _rational(parts[1])


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    weights = PenaltyWeights(args.theta, args.alpha)
    result = bench.run_algorithm(inst, weights, args.algorithm, args.beta_target,
                                 args.seed, args.time_limit, args.max_nodes)
    _emit(dumps(solution_to_dict(inst, weights, result.assignment)), args.out)
    mt = compute_metrics(inst, weights, result.assignment)
    print(f"algorithm={result.algorithm}")
    print(f"status={result.status}")
    print(f"objective={bench.fmt9(mt.objective)}")
    print(f"total_cost={bench.fmt9(mt.total_cost)}")
    print(f"max_fill={bench.fmt9(mt.max_fill)}")
    print(f"max_util={bench.fmt9(mt.max_util)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    inst = load_instance(args.instance)
    algos = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    rows = bench.sweep(inst, args.theta, args.alpha, algos, args.beta_target, args.seed,
                       args.time_limit, args.timing, args.jobs)
    _emit(bench.to_csv(rows, bench.SWEEP_COLUMNS), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = load_instance(args.instance)
    rows = bench.compare(inst, PenaltyWeights(args.theta, args.alpha), args.beta_target,
                         args.seed, args.time_limit, args.timing)
    _emit(bench.to_csv(rows, bench.COMPARE_COLUMNS), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = GeneratorParams(
        n=args.n, m=args.m, s=args.s,
        demand_range=args.demand_range, capacity_range=args.capacity_range,
        cost_range=args.cost_range, utility_range=args.utility_range,
        skill_density=args.skill_density, budget_factor=args.budget_factor,
        caregivers_per_patient_range=args.caregivers_per_patient,
        patients_per_caregiver_range=args.patients_per_caregiver,
        integer_costs=args.integer_costs, seed=args.seed,
    )
    _emit(dumps(instance_to_dict(generate(params))), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hhc-assign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False):
        p.add_argument("instance", help="instance JSON document")
        if grid:
            p.add_argument("--theta", type=_grid, default=[Fraction(0)], help="comma-separated grid")
            p.add_argument("--alpha", type=_grid, default=[Fraction(0)], help="comma-separated grid")
        else:
            p.add_argument("--theta", type=_rational, default=Fraction(0))
            p.add_argument("--alpha", type=_rational, default=Fraction(0))
        p.add_argument("--beta-target", type=_rational, default=Fraction(1))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--time-limit", type=float, default=10.0, help="seconds")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("solve", help="solve one instance")
    common(p)
    p.add_argument("--algorithm", choices=bench.ALGORITHMS, default="tabu")
    p.add_argument("--max-nodes", type=int, default=None, help="node limit for exact")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="penalty-weight sweep as CSV")
    common(p, grid=True)
    p.add_argument("--algorithms", default="greedy,tabu", help="comma-separated")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record wall time per row")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="greedy vs tabu vs exact as CSV")
    common(p)
    p.add_argument("--timing", action="store_true", help="record wall time per row")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a random instance")
    d = GeneratorParams()
    p.add_argument("--n", type=int, default=d.n)
    p.add_argument("--m", type=int, default=d.m)
    p.add_argument("--s", type=int, default=d.s)
    p.add_argument("--demand-range", type=_int_range, default=d.demand_range)
    p.add_argument("--capacity-range", type=_int_range, default=d.capacity_range)
    p.add_argument("--cost-range", type=_rational_range, default=d.cost_range)
    p.add_argument("--utility-range", type=_rational_range, default=d.utility_range)
    p.add_argument("--skill-density", type=float, default=d.skill_density)
    p.add_argument("--budget-factor", type=_rational, default=d.budget_factor)
    p.add_argument("--caregivers-per-patient", type=_int_range, default=d.caregivers_per_patient_range)
    p.add_argument("--patients-per-caregiver", type=_int_range, default=d.patients_per_caregiver_range)
    p.add_argument("--integer-costs", action="store_true")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NoIncumbentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_INCUMBENT


if __name__ == "__main__":
    sys.exit(main())
