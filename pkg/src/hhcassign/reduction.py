"""Knapsack reduction: every 0/1 knapsack is a one-caregiver, one-service assignment.

Items become patients demanding one hour each; the single caregiver can
work every item; item weight is the unit cost and item value the patient
utility; capacity is the budget; both penalties are zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import Assignment, Instance, Number, PenaltyWeights, as_fraction

MAX_BRUTE_FORCE_ITEMS = 20


@dataclass(frozen=True)
class KnapsackInstance:
    values: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]
    capacity: Fraction

    def __init__(self, values: Sequence[Number], weights: Sequence[Number], capacity: Number):
        vals = tuple(as_fraction(v) for v in values)
        wts = tuple(as_fraction(w) for w in weights)
        cap = as_fraction(capacity)
        if len(vals) != len(wts):
            raise ValueError(f"{len(vals)} values but {len(wts)} weights")
        if cap < 0 or any(v < 0 for v in vals) or any(w < 0 for w in wts):
            raise ValueError("values, weights and capacity must be non-negative")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weights", wts)
        object.__setattr__(self, "capacity", cap)

    def __len__(self) -> int:
        return len(self.values)

    def value_of(self, selection: Sequence[int]) -> Fraction:
        return sum((v for v, x in zip(self.values, selection) if x), Fraction(0))

    def weight_of(self, selection: Sequence[int]) -> Fraction:
        return sum((w for w, x in zip(self.weights, selection) if x), Fraction(0))


def knapsack_to_assignment(kp: KnapsackInstance) -> tuple[Instance, PenaltyWeights]:
    items = len(kp)
    inst = Instance(
        n=1, m=items, s=1,
        skills=[[1]],
        demand=[[1] for _ in range(items)],
        capacity=[items],
        max_caregivers_per_patient=[1] * items,
        # a caregiver cap of zero is not allowed, so an empty knapsack keeps 1
        max_patients_per_caregiver=[max(items, 1)],
        unit_cost=[[[w] for w in kp.weights]],
        budget=kp.capacity,
        utility=kp.values,
    )
    return inst, PenaltyWeights(0, 0)


def extract_knapsack_solution(assignment: Assignment) -> tuple[int, ...]:
    n, m, s = assignment.shape
    if n != 1 or s != 1:
        raise ValueError(f"not a reduced knapsack assignment: shape {assignment.shape}")
    if any(h > 1 for h in assignment.hours):
        raise ValueError("reduced knapsack assignments have 0/1 hours")
    return tuple(assignment.hours)


def solve_knapsack_bruteforce(kp: KnapsackInstance) -> tuple[Fraction, tuple[int, ...]]:
    """Best subset by exhaustive search; ties go to the lexicographically smallest selection."""
    if len(kp) > MAX_BRUTE_FORCE_ITEMS:
        raise ValueError(f"{len(kp)} items exceeds the brute-force limit of {MAX_BRUTE_FORCE_ITEMS}")
    best_v, best_sel = None, None
    for sel in itertools.product((0, 1), repeat=len(kp)):
        if kp.weight_of(sel) > kp.capacity:
            continue
        v = kp.value_of(sel)
        if best_v is None or v > best_v:
            best_v, best_sel = v, sel
    return best_v, best_sel
