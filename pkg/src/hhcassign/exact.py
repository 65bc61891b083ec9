"""Exact solvers for desk-scale instances.

``solve_exact`` is a depth-first branch-and-bound over the hour tensor in
``(i, j, k)`` index order, trying hour values from high to low.
``enumerate_all`` is a deliberately naive brute-force oracle that shares no
search code with it.
"""
from __future__ import annotations

import enum
import itertools
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Assignment,
    Instance,
    PenaltyWeights,
    SolutionMetrics,
    check_feasibility,
    compute_metrics,
    evaluate_objective,
    objective_from_totals,
)

ENUMERATION_LIMIT = 10**7


class SolveStatus(str, enum.Enum):
    PROVEN_OPTIMAL = "proven-optimal"
    NODE_LIMIT = "node-limit"
    TIME_LIMIT = "time-limit"


class NoIncumbentError(RuntimeError):
    """Search limits ran out before any complete assignment was reached."""


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SolveLimits:
    max_nodes: int = 50_000_000
    time_limit: float = 60.0

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")


@dataclass(frozen=True)
class OptimalSolution:
    assignment: Assignment
    metrics: SolutionMetrics
    status: SolveStatus
    nodes_explored: int

    @property
    def objective(self) -> Fraction:
        return self.metrics.objective

    @property
    def proven_optimal(self) -> bool:
        return self.status is SolveStatus.PROVEN_OPTIMAL


def entry_bounds(instance: Instance) -> list[int]:
    """Largest value each hour entry can take on its own: min(D_jk, e_ik * H_i)."""
    out = []
    for i in range(instance.n):
        cap, skill = instance.capacity[i], instance.skills[i]
        for j in range(instance.m):
            dem = instance.demand[j]
            for k in range(instance.s):
                out.append(min(dem[k], skill[k] * cap))
    return out


def _patient_cells(instance: Instance) -> list[list[tuple[Fraction, int, int, int]]]:
    """Per patient: (cost, flat index, caregiver, service), cheapest first."""
    cells: list[list[tuple[Fraction, int, int, int]]] = [[] for _ in range(instance.m)]
    for i in range(instance.n):
        for j in range(instance.m):
            for k in range(instance.s):
                if instance.skills[i][k] and instance.capacity[i] and instance.demand[j][k]:
                    cells[j].append((instance.unit_cost[i][j][k], instance.index(i, j, k), i, k))
    for row in cells:
        row.sort()
    return cells


def _fill_bound(instance: Instance, cells, decided: int, served, cg_total, cost) -> Fraction:
    budget = instance.budget - cost
    bound = Fraction(0)
    for j in range(instance.m):
        dem = instance.total_demand(j)
        p = instance.utility[j]
        if not dem:
            bound += p
            continue
        got = sum(served[j])
        if not p:
            continue
        left = [instance.demand[j][k] - served[j][k] for k in range(instance.s)]
        room = budget
        extra = 0
        for c, idx, i, k in cells[j]:
            if idx < decided or not left[k]:
                continue
            take = min(left[k], instance.capacity[i] - cg_total[i])
            if take <= 0:
                continue
            if c:
                take = min(take, math.floor(room / c))
                if take <= 0:
                    # later cells cost at least as much
                    break
                room -= take * c
            left[k] -= take
            extra += take
        bound += p * Fraction(min(got + extra, dem), dem)
    return bound


def upper_bound(instance: Instance, weights: PenaltyWeights, partial: Assignment,
                decided: int | None = None) -> Fraction:
    """Bound on the best objective reachable by completing ``partial``.

    The first ``decided`` flat entries (default: all) are fixed; the rest are
    free. Each patient is allowed the whole remaining budget and every free
    caregiver's remaining hours, and penalties are dropped, so the bound is
    at least the objective of any feasible completion.
    """
    size = instance.size
    decided = size if decided is None else decided
    n, m, s = instance.n, instance.m, instance.s
    served = [[0] * s for _ in range(m)]
    cg_total = [0] * n
    cost = Fraction(0)
    for idx in range(decided):
        x = partial.hours[idx]
        if x:
            i, rem = divmod(idx, m * s)
            j, k = divmod(rem, s)
            served[j][k] += x
            cg_total[i] += x
            cost += x * instance.unit_cost[i][j][k]
    return _fill_bound(instance, _patient_cells(instance), decided, served, cg_total, cost)


class _Stop(Exception):
    def __init__(self, status: SolveStatus):
        self.status = status


def solve_exact(instance: Instance, weights: PenaltyWeights,
                limits: SolveLimits | None = None) -> OptimalSolution:
    """Branch-and-bound optimum; ties go to the lexicographically smallest tensor.

    Children are visited in descending hour order, so complete assignments are
    reached in decreasing lexicographic order and a later tie replaces the
    incumbent. Pruning is strict (bound < incumbent) to keep that guarantee.
    """
    limits = limits or SolveLimits()
    n, m, s = instance.n, instance.m, instance.s
    size = instance.size
    cells = _patient_cells(instance)
    decode = [(idx // (m * s), (idx // s) % m, idx % s) for idx in range(size)]

    x = [0] * size
    served = [[0] * s for _ in range(m)]
    cg_total = [0] * n
    row_sum = [[0] * m for _ in range(n)]
    links_p = [0] * m
    links_c = [0] * n
    cost = Fraction(0)
    best: list = [None, None]  # value, hours
    nodes = 0
    start = time.perf_counter()

    def dfs(d: int) -> None:
        nonlocal nodes, cost
        nodes += 1
        if nodes > limits.max_nodes:
            raise _Stop(SolveStatus.NODE_LIMIT)
        if not nodes & 1023 and time.perf_counter() - start > limits.time_limit:
            raise _Stop(SolveStatus.TIME_LIMIT)
        if d == size:
            p_hours = [sum(row) for row in served]
            val = objective_from_totals(instance, weights, p_hours, cg_total)
            if best[0] is None or val >= best[0]:
                best[0], best[1] = val, tuple(x)
            return
        if best[0] is not None and _fill_bound(instance, cells, d, served, cg_total, cost) < best[0]:
            return
        i, j, k = decode[d]
        hi = 0
        if instance.skills[i][k]:
            hi = min(instance.demand[j][k] - served[j][k], instance.capacity[i] - cg_total[i])
            c = instance.unit_cost[i][j][k]
            if hi > 0 and c:
                hi = min(hi, math.floor((instance.budget - cost) / c))
            if hi > 0 and not row_sum[i][j] and (
                    links_p[j] >= instance.max_caregivers_per_patient[j]
                    or links_c[i] >= instance.max_patients_per_caregiver[i]):
                hi = 0
        c = instance.unit_cost[i][j][k]
        for v in range(hi, 0, -1):
            new_link = not row_sum[i][j]
            x[d] = v
            served[j][k] += v
            cg_total[i] += v
            row_sum[i][j] += v
            cost += v * c
            if new_link:
                links_p[j] += 1
                links_c[i] += 1
            try:
                dfs(d + 1)
            finally:
                x[d] = 0
                served[j][k] -= v
                cg_total[i] -= v
                row_sum[i][j] -= v
                cost -= v * c
                if new_link:
                    links_p[j] -= 1
                    links_c[i] -= 1
        dfs(d + 1)

    status = SolveStatus.PROVEN_OPTIMAL
    old_limit = sys.getrecursionlimit()
    if size + 200 > old_limit:
        sys.setrecursionlimit(size + 200)
    try:
        dfs(0)
    except _Stop as stop:
        status = stop.status
    finally:
        sys.setrecursionlimit(old_limit)

    if best[1] is None:
        raise NoIncumbentError(f"{status.value} reached after {nodes} nodes with no incumbent")
    assignment = Assignment((n, m, s), best[1])
    return OptimalSolution(assignment, compute_metrics(instance, weights, assignment), status, nodes)


def search_space_size(instance: Instance) -> int:
    return math.prod(b + 1 for b in entry_bounds(instance))


def _enumerate(instance: Instance, weights: PenaltyWeights, limit: int):
    bounds = entry_bounds(instance)
    space = math.prod(b + 1 for b in bounds)
    if space > limit:
        raise SearchSpaceTooLarge(f"search space has {space} tensors (limit {limit})")
    shape = (instance.n, instance.m, instance.s)
    for hours in itertools.product(*(range(b + 1) for b in bounds)):
        a = Assignment(shape, hours)
        if check_feasibility(instance, a).ok:
            yield a, evaluate_objective(instance, weights, a)


def enumerate_all(instance: Instance, weights: PenaltyWeights,
                  limit: int = ENUMERATION_LIMIT) -> OptimalSolution:
    """Brute-force maximizer over every integer tensor within per-entry bounds.

    Candidates are generated in ascending lexicographic order and replaced
    only on strict improvement, so ties resolve to the smallest tensor.
    """
    best_a, best_v, count = None, None, 0
    for a, v in _enumerate(instance, weights, limit):
        count += 1
        if best_v is None or v > best_v:
            best_a, best_v = a, v
    # the zero tensor is always feasible, so best_a is set
    return OptimalSolution(best_a, compute_metrics(instance, weights, best_a),
                           SolveStatus.PROVEN_OPTIMAL, count)


def all_optima(instance: Instance, weights: PenaltyWeights,
               limit: int = ENUMERATION_LIMIT) -> tuple[Fraction, list[Assignment]]:
    """Optimal value and every optimal hour tensor, by brute force."""
    best_v, best = None, []
    for a, v in _enumerate(instance, weights, limit):
        if best_v is None or v > best_v:
            best_v, best = v, [a]
        elif v == best_v:
            best.append(a)
    return best_v, best


def is_micro(instance: Instance, max_total_demand: int = 20) -> bool:
    """Whether proven optimality is realistic for ``solve_exact``."""
    return sum(map(sum, instance.demand)) <= max_total_demand


def objectives_equal(a: Fraction, b: Fraction, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol

