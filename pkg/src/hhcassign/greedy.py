"""Two-phase greedy construction of an initial feasible assignment.

Phase 1 walks patients in descending utility-per-demanded-hour order and
gives each one at most one previously unused caregiver, preferring
cost-efficient candidates. Phase 2 sweeps the remaining patients and lets
any caregiver with spare hours top them up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import Assignment, Instance, Number, as_fraction


def solve_unit_knapsack(costs: Sequence[Fraction], caps: Sequence[int], total_cap: int,
                        budget: Fraction) -> list[int]:
    """Maximize the number of hours under per-service caps, a total cap and a budget.

    Every hour is worth the same, so filling services cheapest first is
    optimal. Ties in cost go to the lower service index.
    """
    out = [0] * len(caps)
    room = as_fraction(budget)
    left = total_cap
    for k in sorted(range(len(caps)), key=lambda k: (costs[k], k)):
        if left <= 0:
            break
        take = min(caps[k], left)
        if take <= 0:
            continue
        if costs[k]:
            take = min(take, math.floor(room / costs[k]))
            if take <= 0:
                break
            room -= take * costs[k]
        out[k] = take
        left -= take
    return out


@dataclass
class GreedyState:
    instance: Instance
    beta_target: Fraction
    residual_budget: Fraction
    residual_capacity: list[int]
    residual_demand: list[list[int]]
    # scalar per-patient demand, decremented by assigned hours / beta_target
    demand_scalar: list[Fraction]
    residual_utility: list[Fraction]
    residual_max_patients: list[int]
    residual_max_caregivers: list[int]
    c0: Fraction | None
    c_min: Fraction
    hours: list[int]
    served_by: list[set[int]] = field(default_factory=list)
    servers_of: list[set[int]] = field(default_factory=list)
    phase1_used: set[int] = field(default_factory=set)
    phase1_pairs: list[tuple[int, int]] = field(default_factory=list)
    active_caregivers: list[int] = field(default_factory=list)
    active_patients: list[int] = field(default_factory=list)

    @classmethod
    def initial(cls, instance: Instance, beta_target: Number = 1) -> "GreedyState":
        beta = _check_beta(beta_target)
        total_p = sum(instance.utility, Fraction(0))
        costs = [c for block in instance.unit_cost for row in block for c in row]
        state = cls(
            instance=instance,
            beta_target=beta,
            residual_budget=instance.budget,
            residual_capacity=list(instance.capacity),
            residual_demand=[list(row) for row in instance.demand],
            demand_scalar=[Fraction(instance.total_demand(j)) for j in range(instance.m)],
            residual_utility=list(instance.utility),
            residual_max_patients=list(instance.max_patients_per_caregiver),
            residual_max_caregivers=list(instance.max_caregivers_per_patient),
            c0=instance.budget / total_p if total_p else None,
            c_min=min(costs, default=Fraction(0)),
            hours=[0] * instance.size,
            served_by=[set() for _ in range(instance.n)],
            servers_of=[set() for _ in range(instance.m)],
        )
        state.active_caregivers = [i for i in range(instance.n)
                                   if instance.capacity[i] > 0]
        state.active_patients = patient_order(instance)
        return state

    @classmethod
    def from_assignment(cls, instance: Instance, assignment: Assignment,
                        beta_target: Number = 1) -> "GreedyState":
        """Residual state as if ``assignment`` had been built by the greedy updates."""
        state = cls.initial(instance, beta_target)
        n, m, s = instance.n, instance.m, instance.s
        links = assignment.links
        for i in range(n):
            for j in range(m):
                if not links[i][j]:
                    continue
                row = [assignment.at(i, j, k) for k in range(s)]
                state._commit(i, j, row)
                state.served_by[i].add(j)
                state.servers_of[j].add(i)
                state.residual_max_patients[i] -= 1
                state.residual_max_caregivers[j] -= 1
        state.active_caregivers = [i for i in state.active_caregivers
                                   if state.residual_max_patients[i] > 0 and state.residual_capacity[i] > 0]
        state.active_patients = [j for j in state.active_patients
                                 if state.residual_max_caregivers[j] > 0 and any(state.residual_demand[j])]
        return state

    def _commit(self, i: int, j: int, row: Sequence[int]) -> Fraction:
        inst = self.instance
        total = sum(row)
        cost = sum((inst.unit_cost[i][j][k] * x for k, x in enumerate(row)), Fraction(0))
        base = inst.index(i, j, 0)
        for k, x in enumerate(row):
            self.hours[base + k] += x
            self.residual_demand[j][k] -= x
        self.residual_budget -= cost
        self.residual_capacity[i] -= total
        self.demand_scalar[j] -= total / self.beta_target
        return cost

    def assignment(self) -> Assignment:
        inst = self.instance
        return Assignment((inst.n, inst.m, inst.s), tuple(self.hours))

    def budget_exhausted(self) -> bool:
        return self.residual_budget <= self.c_min


def _check_beta(beta_target: Number) -> Fraction:
    beta = as_fraction(beta_target)
    if not 0 < beta <= 1:
        raise ValueError(f"beta_target must lie in (0, 1], got {beta}")
    return beta


def patient_order(instance: Instance) -> list[int]:
    """Patients with positive demand, by descending p_j / sum_k D_jk (ties: index)."""
    keyed = [(-(instance.utility[j] / instance.total_demand(j)), j)
             for j in range(instance.m) if instance.total_demand(j) > 0]
    return [j for _, j in sorted(keyed)]


def greedy_subproblem(state: GreedyState, i: int, j: int) -> list[int]:
    """Most hours caregiver ``i`` can give patient ``j`` under the residual state."""
    inst = state.instance
    cap_i = state.residual_capacity[i]
    caps = [min(inst.skills[i][k] * cap_i, state.residual_demand[j][k]) for k in range(inst.s)]
    aggregate = min(cap_i, math.floor(state.beta_target * state.demand_scalar[j]))
    if aggregate <= 0:
        return [0] * inst.s
    return solve_unit_knapsack(inst.unit_cost[i][j], caps, aggregate, state.residual_budget)


def _link(state: GreedyState, i: int, j: int, row: Sequence[int]) -> Fraction:
    cost = state._commit(i, j, row)
    state.residual_max_patients[i] -= 1
    state.residual_max_caregivers[j] -= 1
    state.served_by[i].add(j)
    state.servers_of[j].add(i)
    return cost


def _caregiver_done(state: GreedyState, i: int) -> bool:
    return state.residual_max_patients[i] <= 0 or state.residual_capacity[i] <= 0


def _patient_done(state: GreedyState, j: int) -> bool:
    return state.residual_max_caregivers[j] <= 0 or not any(state.residual_demand[j])


def _phase_one(state: GreedyState) -> None:
    inst = state.instance
    for j in list(state.active_patients):
        if j not in state.active_patients:
            continue
        flag = False
        best_x, best_p, best_c, best_i = None, Fraction(0), None, None
        dem_j = sum(state.residual_demand[j])
        for i in state.active_caregivers:
            if i in state.phase1_used:
                continue
            x = greedy_subproblem(state, i, j)
            p = Fraction(sum(x), dem_j) * state.residual_utility[j] if dem_j else Fraction(0)
            c = sum((inst.unit_cost[i][j][k] * h for k, h in enumerate(x)), Fraction(0))
            if p > best_p and state.c0 is not None and c <= p * state.c0:
                flag = True
                best_x, best_p, best_c, best_i = x, p, c, i
            elif not flag and p > best_p and (best_c is None or c <= best_c):
                best_x, best_p, best_c, best_i = x, p, c, i

        if best_i is not None:
            _link(state, best_i, j, best_x)
            state.residual_utility[j] -= best_p
            state.phase1_used.add(best_i)
            state.phase1_pairs.append((best_i, j))
            if _caregiver_done(state, best_i):
                state.active_caregivers.remove(best_i)
            if _patient_done(state, j):
                state.active_patients.remove(j)

        if state.budget_exhausted() or len(state.phase1_used) == inst.n:
            break


def fill_sweep(state: GreedyState) -> None:
    """Top up remaining patients from any caregiver with spare hours.

    Used as the second greedy phase and as the final pass of tabu search.
    """
    for j in list(state.active_patients):
        if state.budget_exhausted() or not state.active_caregivers:
            break
        if j not in state.active_patients:
            continue
        for i in list(state.active_caregivers):
            x = greedy_subproblem(state, i, j)
            if sum(x) <= 0:
                continue
            _link(state, i, j, x)
            if _caregiver_done(state, i):
                state.active_caregivers.remove(i)
            if _patient_done(state, j) or state.budget_exhausted():
                state.active_patients.remove(j)
                break


def greedy_construct(instance: Instance, beta_target: Number = 1) -> tuple[Assignment, GreedyState]:
    state = GreedyState.initial(instance, beta_target)
    _phase_one(state)
    fill_sweep(state)
    return state.assignment(), state
