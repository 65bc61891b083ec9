"""Tabu-search improvement of a feasible assignment.

Each iteration focuses on the least-served patient (lowest fill-rate below
the current maximum) that has an admissible move, scans caregivers with
spare hours in descending order of how much of that patient's demand they
could cover, and applies the best move from three families:

* ``insert``: one more hour of service k from caregiver i to patient j;
* ``reallocate``: one hour of (j, k) moves from another caregiver to i;
* ``rebalance``: caregiver i moves one hour of service k from its
  best-served other patient to j.

Touched caregivers and patients become tabu for ``tenure`` iterations; a
tabu move is allowed only when it beats the incumbent (aspiration). The
incumbent is finally topped up with the greedy fill sweep.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .greedy import GreedyState, fill_sweep
from .model import (
    Assignment,
    Instance,
    Number,
    PenaltyWeights,
    check_feasibility,
    evaluate_objective,
)

RESYNC_EVERY = 100


class InfeasibleAssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class TabuParams:
    time_limit: float = 10.0
    tenure: int = 7
    max_stall: int | None = None  # None: 50 * (n + m)
    seed: int = 0

    def __post_init__(self):
        if self.tenure < 1:
            raise ValueError("tenure must be >= 1")
        if self.max_stall is not None and self.max_stall < 1:
            raise ValueError("max_stall must be >= 1")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")

    def stall_limit(self, instance: Instance) -> int:
        if self.max_stall is not None:
            return self.max_stall
        return max(1, 50 * (instance.n + instance.m))


@dataclass(frozen=True)
class Move:
    kind: str  # "insert" | "reallocate" | "rebalance"
    deltas: tuple[tuple[int, int], ...]  # (flat index, +1/-1)
    caregivers: tuple[int, ...]
    patients: tuple[int, ...]
    objective: Fraction  # objective after the move

    def apply_to(self, assignment: Assignment) -> Assignment:
        hours = list(assignment.hours)
        for idx, d in self.deltas:
            hours[idx] += d
        return Assignment(assignment.shape, tuple(hours))


@dataclass
class TabuState:
    tabu_caregivers: dict[int, int]  # caregiver -> first iteration it is free again
    tabu_patients: dict[int, int]
    incumbent: Assignment
    incumbent_value: Fraction
    current: Assignment
    iteration: int = 0
    accepted: int = 0

    def is_tabu(self, move: Move) -> bool:
        it = self.iteration
        return (any(self.tabu_caregivers.get(i, 0) > it for i in move.caregivers)
                or any(self.tabu_patients.get(j, 0) > it for j in move.patients))


def _top(values: list[Fraction], included: list[bool], size: int = 3) -> list[tuple[Fraction, int]]:
    ranked = sorted(((v, idx) for idx, (v, inc) in enumerate(zip(values, included)) if inc),
                    key=lambda t: (-t[0], t[1]))
    return ranked[:size]


def _max_excluding(top: list[tuple[Fraction, int]], skip) -> Fraction | None:
    for v, idx in top:
        if idx not in skip:
            return v
    return None


class _Search:
    """Working assignment with the aggregates needed for O(1)-ish move scoring."""

    def __init__(self, instance: Instance, weights: PenaltyWeights, assignment: Assignment):
        self.inst = instance
        self.weights = weights
        self.dem = [instance.total_demand(j) for j in range(instance.m)]
        self.p_inc = [d > 0 for d in self.dem]
        self.c_inc = [cap > 0 for cap in instance.capacity]
        self.n_p = sum(self.p_inc)
        self.n_c = sum(self.c_inc)
        self.const_utility = sum((instance.utility[j] for j in range(instance.m) if not self.p_inc[j]),
                                 Fraction(0))
        self.load(assignment)

    def load(self, assignment: Assignment) -> None:
        inst = self.inst
        n, m, s = inst.n, inst.m, inst.s
        self.x = list(assignment.hours)
        self.served = [[0] * s for _ in range(m)]
        self.p_hours = [0] * m
        self.c_hours = [0] * n
        self.row_sum = [[0] * m for _ in range(n)]
        self.cost = Fraction(0)
        for idx, h in enumerate(self.x):
            if h:
                i, rem = divmod(idx, m * s)
                j, k = divmod(rem, s)
                self.served[j][k] += h
                self.p_hours[j] += h
                self.c_hours[i] += h
                self.row_sum[i][j] += h
                self.cost += h * inst.unit_cost[i][j][k]
        self.links_p = [sum(1 for i in range(n) if self.row_sum[i][j]) for j in range(m)]
        self.links_c = [sum(1 for j in range(m) if self.row_sum[i][j]) for i in range(n)]
        self._refresh_rates()

    def _refresh_rates(self) -> None:
        inst = self.inst
        self.fill = [Fraction(h, d) if d else Fraction(1) for h, d in zip(self.p_hours, self.dem)]
        self.util = [Fraction(h, cap) if cap else Fraction(0) for h, cap in zip(self.c_hours, inst.capacity)]
        self.sum_pb = sum((inst.utility[j] * self.fill[j] for j in range(inst.m) if self.p_inc[j]), Fraction(0))
        self.sum_b = sum((b for b, inc in zip(self.fill, self.p_inc) if inc), Fraction(0))
        self.sum_u = sum((u for u, inc in zip(self.util, self.c_inc) if inc), Fraction(0))
        self.top_b = _top(self.fill, self.p_inc)
        self.top_u = _top(self.util, self.c_inc)
        self.value = self._value(self.sum_pb, self.sum_b, self.sum_u,
                                 self.top_b[0][0] if self.top_b else None,
                                 self.top_u[0][0] if self.top_u else None)

    def _value(self, sum_pb, sum_b, sum_u, bmax, umax) -> Fraction:
        w = self.weights
        v = self.const_utility + sum_pb
        if w.theta and bmax is not None:
            v -= w.theta * (self.n_p * bmax - sum_b)
        if w.alpha and umax is not None:
            v -= w.alpha * (self.n_c * umax - sum_u)
        return v

    @property
    def max_fill(self) -> Fraction | None:
        return self.top_b[0][0] if self.top_b else None

    def assignment(self) -> Assignment:
        inst = self.inst
        return Assignment((inst.n, inst.m, inst.s), tuple(self.x))

    def residual_hours(self, i: int) -> int:
        return self.inst.capacity[i] - self.c_hours[i]

    # scoring ---------------------------------------------------------------

    def score(self, p_delta: dict[int, int], c_delta: dict[int, int]) -> Fraction:
        inst = self.inst
        sum_pb, sum_b, sum_u = self.sum_pb, self.sum_b, self.sum_u
        bmax = _max_excluding(self.top_b, p_delta)
        for j, d in p_delta.items():
            if not d or not self.p_inc[j]:
                continue
            step = Fraction(d, self.dem[j])
            sum_pb += inst.utility[j] * step
            sum_b += step
        for j in p_delta:
            if self.p_inc[j]:
                b = Fraction(self.p_hours[j] + p_delta[j], self.dem[j])
                bmax = b if bmax is None or b > bmax else bmax
        umax = _max_excluding(self.top_u, c_delta)
        for i, d in c_delta.items():
            if not self.c_inc[i]:
                continue
            cap = inst.capacity[i]
            sum_u += Fraction(d, cap)
            u = Fraction(self.c_hours[i] + d, cap)
            umax = u if umax is None or u > umax else umax
        return self._value(sum_pb, sum_b, sum_u, bmax, umax)

    # move generation ------------------------------------------------------

    def moves(self, j: int, i: int) -> list[Move]:
        inst = self.inst
        n, s = inst.n, inst.s
        out: list[Move] = []
        skill = inst.skills[i]
        costs = inst.unit_cost
        budget_room = inst.budget - self.cost
        free_i = self.residual_hours(i)
        link_ij = self.row_sum[i][j] > 0
        base = inst.index(i, j, 0)

        if free_i >= 1:
            can_link = link_ij or (self.links_p[j] < inst.max_caregivers_per_patient[j]
                                   and self.links_c[i] < inst.max_patients_per_caregiver[i])
            for k in range(s):
                if not skill[k] or self.served[j][k] >= inst.demand[j][k]:
                    continue
                if not can_link or costs[i][j][k] > budget_room:
                    continue
                value = self.score({j: 1}, {i: 1})
                out.append(Move("insert", ((base + k, 1),), (i,), (j,), value))

            for i2 in range(n):
                if i2 == i or not self.row_sum[i2][j]:
                    continue
                base2 = inst.index(i2, j, 0)
                for k in range(s):
                    if not skill[k] or not self.x[base2 + k]:
                        continue
                    if costs[i][j][k] - costs[i2][j][k] > budget_room:
                        continue
                    if not link_ij:
                        drops = 1 if self.row_sum[i2][j] == 1 else 0
                        if (self.links_p[j] - drops >= inst.max_caregivers_per_patient[j]
                                or self.links_c[i] >= inst.max_patients_per_caregiver[i]):
                            continue
                    value = self.score({j: 0}, {i: 1, i2: -1})
                    out.append(Move("reallocate", ((base2 + k, -1), (base + k, 1)), (i, i2), (j,), value))

        j_from = self._best_served_other(i, j)
        if j_from is not None:
            base_from = inst.index(i, j_from, 0)
            for k in range(s):
                if not self.x[base_from + k] or self.served[j][k] >= inst.demand[j][k]:
                    continue
                if costs[i][j][k] - costs[i][j_from][k] > budget_room:
                    continue
                if not link_ij:
                    drops = 1 if self.row_sum[i][j_from] == 1 else 0
                    if (self.links_p[j] >= inst.max_caregivers_per_patient[j]
                            or self.links_c[i] - drops >= inst.max_patients_per_caregiver[i]):
                        continue
                value = self.score({j: 1, j_from: -1}, {i: 0})
                out.append(Move("rebalance", ((base_from + k, -1), (base + k, 1)), (i,), (j, j_from), value))
        return out

    def _best_served_other(self, i: int, j: int) -> int | None:
        best = None
        for j2 in range(self.inst.m):
            if j2 == j or not self.row_sum[i][j2]:
                continue
            if best is None or self.fill[j2] > self.fill[best]:
                best = j2
        return best

    def apply(self, move: Move) -> None:
        inst = self.inst
        m, s = inst.m, inst.s
        for idx, d in move.deltas:
            i, rem = divmod(idx, m * s)
            j, k = divmod(rem, s)
            before = self.row_sum[i][j]
            self.x[idx] += d
            self.served[j][k] += d
            self.p_hours[j] += d
            self.c_hours[i] += d
            self.row_sum[i][j] += d
            self.cost += d * inst.unit_cost[i][j][k]
            if before == 0 and self.row_sum[i][j] > 0:
                self.links_p[j] += 1
                self.links_c[i] += 1
            elif before > 0 and self.row_sum[i][j] == 0:
                self.links_p[j] -= 1
                self.links_c[i] -= 1
        self._refresh_rates()

    def resync(self) -> None:
        """Full recomputation; guards against drift in the incremental state."""
        a = self.assignment()
        report = check_feasibility(self.inst, a)
        if not report.ok:
            raise InfeasibleAssignmentError(f"tabu search reached an infeasible state: {report.violations}")
        value = self.value
        self.load(a)
        if self.value != value or evaluate_objective(self.inst, self.weights, a) != value:
            raise RuntimeError("incremental objective drifted from full evaluation")


def neighborhood(instance: Instance, weights: PenaltyWeights, current: Assignment,
                 j: int, i: int, validate: bool = True) -> list[Move]:
    """All moves focused on patient ``j`` and caregiver ``i``, scored by resulting objective."""
    moves = _Search(instance, weights, current).moves(j, i)
    if validate:
        for mv in moves:
            report = check_feasibility(instance, mv.apply_to(current))
            if not report.ok:
                raise InfeasibleAssignmentError(f"{mv.kind} move is infeasible: {report.violations}")
    return moves


def _caregiver_order(search: _Search, candidates: list[int], j: int) -> list[int]:
    inst = search.inst
    left = [inst.demand[j][k] - search.served[j][k] for k in range(inst.s)]

    def key(i):
        reach = sum(e * d for e, d in zip(inst.skills[i], left))
        return (-min(search.residual_hours(i), reach), i)

    return sorted(candidates, key=key)


def tabu_improve(instance: Instance, weights: PenaltyWeights, initial: Assignment,
                 params: TabuParams | None = None, beta_target: Number = 1) -> Assignment:
    """Improve ``initial``; never returns anything worse than it."""
    params = params or TabuParams()
    report = check_feasibility(instance, initial)
    if not report.ok:
        raise InfeasibleAssignmentError(f"initial assignment is infeasible: {report.violations}")

    search = _Search(instance, weights, initial)
    state = TabuState({}, {}, initial, search.value, initial)
    rng = random.Random(params.seed)
    stall_limit = params.stall_limit(instance)
    stall = 0
    deadline = time.perf_counter() + params.time_limit

    while stall < stall_limit and time.perf_counter() < deadline:
        bmax = search.max_fill
        under = sorted((search.fill[j], j) for j in range(instance.m)
                       if search.p_inc[j] and search.fill[j] < bmax)
        if not under:
            break
        spare = [i for i in range(instance.n) if search.residual_hours(i) > 0]
        chosen = None
        blocked = False
        for _, j in under:
            if not spare:
                break
            admissible = []
            for i in _caregiver_order(search, spare, j):
                for mv in search.moves(j, i):
                    if not state.is_tabu(mv) or mv.objective > state.incumbent_value:
                        admissible.append(mv)
                    else:
                        blocked = True
            if admissible:
                top = max(mv.objective for mv in admissible)
                chosen = rng.choice([mv for mv in admissible if mv.objective == top])
                break
        if chosen is None:
            if not blocked:
                break
            # every move is tabu: let the clock run so tenures expire
            state.iteration += 1
            stall += 1
            continue

        search.apply(chosen)
        state.iteration += 1
        state.accepted += 1
        for i in chosen.caregivers:
            state.tabu_caregivers[i] = state.iteration + params.tenure
        for j in chosen.patients:
            state.tabu_patients[j] = state.iteration + params.tenure
        if state.accepted % RESYNC_EVERY == 0:
            search.resync()
        if search.value > state.incumbent_value:
            state.incumbent = search.assignment()
            state.incumbent_value = search.value
            stall = 0
        else:
            stall += 1

    search.resync()
    best, best_value = state.incumbent, state.incumbent_value

    filler = GreedyState.from_assignment(instance, best, beta_target)
    fill_sweep(filler)
    filled = filler.assignment()
    filled_value = evaluate_objective(instance, weights, filled)
    if filled_value > best_value and check_feasibility(instance, filled).ok:
        best = filled
    return best
