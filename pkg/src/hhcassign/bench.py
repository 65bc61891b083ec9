"""Solver dispatch, weight sweeps and algorithm comparison tables."""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import SolveLimits, is_micro, solve_exact
from .greedy import greedy_construct
from .model import Assignment, Instance, Number, PenaltyWeights, compute_metrics
from .tabu import TabuParams, tabu_improve

ALGORITHMS = ("exact", "greedy", "tabu")

SWEEP_COLUMNS = (
    "theta", "alpha", "budget", "algorithm", "objective", "total_utility",
    "equity_spread", "mean_fill", "min_fill", "efficacy_spread", "mean_util", "min_util",
    "total_cost", "runtime_ms", "status",
)
COMPARE_COLUMNS = ("algorithm", "objective", "gap", "total_cost", "runtime_ms", "status")


def fmt9(q: Number) -> str:
    """Fixed 9-digit decimal, rounded half-to-even in exact arithmetic."""
    scaled = round(Fraction(q) * 10**9)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**9)
    return f"{sign}{whole}.{frac:09d}"


@dataclass(frozen=True)
class RunResult:
    algorithm: str
    assignment: Assignment
    status: str
    runtime_ms: float


def run_algorithm(instance: Instance, weights: PenaltyWeights, algorithm: str,
                  beta_target: Number = 1, seed: int = 0, time_limit: float = 10.0,
                  max_nodes: int | None = None) -> RunResult:
    start = time.perf_counter()
    if algorithm == "greedy":
        assignment, _ = greedy_construct(instance, beta_target)
        status = "heuristic"
    elif algorithm == "tabu":
        initial, _ = greedy_construct(instance, beta_target)
        assignment = tabu_improve(instance, weights, initial,
                                  TabuParams(time_limit=time_limit, seed=seed), beta_target)
        status = "heuristic"
    elif algorithm == "exact":
        limits = SolveLimits(time_limit=time_limit) if max_nodes is None else \
            SolveLimits(max_nodes=max_nodes, time_limit=time_limit)
        sol = solve_exact(instance, weights, limits)
        assignment, status = sol.assignment, sol.status.value
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    return RunResult(algorithm, assignment, status, (time.perf_counter() - start) * 1000)


def summary_row(instance: Instance, weights: PenaltyWeights, result: RunResult,
                timing: bool = False) -> dict[str, str]:
    mt = compute_metrics(instance, weights, result.assignment)
    fills = mt.included_fill() or [Fraction(0)]
    utils = mt.included_util() or [Fraction(0)]
    utility = sum((p * b for p, b in zip(instance.utility, mt.fill_rate)), Fraction(0))
    return {
        "theta": fmt9(weights.theta),
        "alpha": fmt9(weights.alpha),
        "budget": fmt9(instance.budget),
        "algorithm": result.algorithm,
        "objective": fmt9(mt.objective),
        "total_utility": fmt9(utility),
        "equity_spread": fmt9(max(fills) - min(fills)),
        "mean_fill": fmt9(sum(fills) / len(fills)),
        "min_fill": fmt9(min(fills)),
        "efficacy_spread": fmt9(max(utils) - min(utils)),
        "mean_util": fmt9(sum(utils) / len(utils)),
        "min_util": fmt9(min(utils)),
        "total_cost": fmt9(mt.total_cost),
        # wall time breaks byte-for-byte reproducibility, so it is opt-in
        "runtime_ms": f"{result.runtime_ms:.3f}" if timing else "-",
        "status": result.status,
    }


def _sweep_point(args) -> dict[str, str]:
    instance, theta, alpha, algorithm, beta_target, seed, time_limit, timing = args
    weights = PenaltyWeights(theta, alpha)
    result = run_algorithm(instance, weights, algorithm, beta_target, seed, time_limit)
    return summary_row(instance, weights, result, timing)


def sweep(instance: Instance, thetas: Sequence[Number], alphas: Sequence[Number],
          algorithms: Iterable[str], beta_target: Number = 1, seed: int = 0,
          time_limit: float = 10.0, timing: bool = False, jobs: int = 1) -> list[dict[str, str]]:
    """One row per (theta, alpha, algorithm): theta-major, alpha-minor, algorithms sorted."""
    if not thetas or not alphas:
        raise ValueError("theta and alpha grids must be non-empty")
    algos = sorted(set(algorithms))
    if not algos:
        raise ValueError("at least one algorithm is required")
    for a in algos:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    points = [(instance, Fraction(t), Fraction(a), algo, beta_target, seed, time_limit, timing)
              for t in thetas for a in alphas for algo in algos]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, points))
    return [_sweep_point(p) for p in points]


def compare(instance: Instance, weights: PenaltyWeights, beta_target: Number = 1, seed: int = 0,
            time_limit: float = 10.0, timing: bool = False) -> list[dict[str, str]]:
    """Greedy and tabu against the exact optimum (exact only on micro-scale instances).

    gap = (exact - heuristic) / max(1, exact); blank when no proven optimum exists.
    """
    results = [run_algorithm(instance, weights, a, beta_target, seed, time_limit)
               for a in ("greedy", "tabu")]
    exact_value = None
    if is_micro(instance):
        ex = run_algorithm(instance, weights, "exact", beta_target, seed, time_limit)
        results.append(ex)
        if ex.status == "proven-optimal":
            exact_value = compute_metrics(instance, weights, ex.assignment).objective
    rows = []
    for r in results:
        mt = compute_metrics(instance, weights, r.assignment)
        gap = "" if exact_value is None else fmt9((exact_value - mt.objective) / max(Fraction(1), exact_value))
        rows.append({
            "algorithm": r.algorithm,
            "objective": fmt9(mt.objective),
            "gap": gap,
            "total_cost": fmt9(mt.total_cost),
            "runtime_ms": f"{r.runtime_ms:.3f}" if timing else "-",
            "status": r.status,
        })
    return rows


def to_csv(rows: list[dict[str, str]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
