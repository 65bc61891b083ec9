"""JSON documents for instances and solutions, plus seeded instance generation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    Assignment,
    DimensionError,
    Instance,
    InstanceError,
    PenaltyWeights,
    compute_metrics,
)

FORMAT_VERSION = 1

INSTANCE_FIELDS = (
    "version", "n", "m", "s", "skills", "demand", "capacity", "max_caregivers_per_patient",
    "max_patients_per_caregiver", "unit_cost", "budget", "utility",
)


def format_rational(q: Fraction) -> str:
    """Exact decimal string when one exists, otherwise ``"p/q"``."""
    q = Fraction(q)
    den = q.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    if q.denominator == 1:
        return str(q.numerator)
    text = format(Decimal(q.numerator) / Decimal(q.denominator), "f")
    return text.rstrip("0").rstrip(".") if "." in text else text


def parse_rational(value: Any, field: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise InstanceError(field, f"expected a decimal string or integer, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceError(field, f"not a rational number: {value!r}") from exc


def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n": inst.n,
        "m": inst.m,
        "s": inst.s,
        "skills": [list(r) for r in inst.skills],
        "demand": [list(r) for r in inst.demand],
        "capacity": list(inst.capacity),
        "max_caregivers_per_patient": list(inst.max_caregivers_per_patient),
        "max_patients_per_caregiver": list(inst.max_patients_per_caregiver),
        "unit_cost": [[[format_rational(c) for c in row] for row in block] for block in inst.unit_cost],
        "budget": format_rational(inst.budget),
        "utility": [format_rational(p) for p in inst.utility],
    }


def _need_list(doc: dict, key: str, depth: int) -> list:
    value = doc[key]

    def walk(v, path, d):
        if not isinstance(v, list):
            raise InstanceError(path, f"expected a list, got {type(v).__name__}")
        if d > 1:
            for idx, item in enumerate(v):
                walk(item, f"{path}[{idx}]", d - 1)

    walk(value, key, depth)
    return value


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("<root>", "instance document must be an object")
    missing = [k for k in INSTANCE_FIELDS if k not in doc]
    if missing:
        raise InstanceError(missing[0], "missing field")
    if doc["version"] != FORMAT_VERSION:
        raise InstanceError("version", f"unsupported version {doc['version']!r}")
    for key in ("n", "m", "s"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise InstanceError(key, f"expected an integer, got {doc[key]!r}")
    for key, depth in (("skills", 2), ("demand", 2), ("capacity", 1),
                       ("max_caregivers_per_patient", 1), ("max_patients_per_caregiver", 1),
                       ("unit_cost", 3), ("utility", 1)):
        _need_list(doc, key, depth)
    cost = [[[parse_rational(c, f"unit_cost[{i}][{j}][{k}]") for k, c in enumerate(row)]
             for j, row in enumerate(block)] for i, block in enumerate(doc["unit_cost"])]
    return Instance(
        n=doc["n"], m=doc["m"], s=doc["s"],
        skills=doc["skills"],
        demand=doc["demand"],
        capacity=doc["capacity"],
        max_caregivers_per_patient=doc["max_caregivers_per_patient"],
        max_patients_per_caregiver=doc["max_patients_per_caregiver"],
        unit_cost=cost,
        budget=parse_rational(doc["budget"], "budget"),
        utility=[parse_rational(p, f"utility[{j}]") for j, p in enumerate(doc["utility"])],
    )


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def load_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError("<root>", f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def solution_to_dict(inst: Instance, weights: PenaltyWeights, assignment: Assignment) -> dict:
    metrics = compute_metrics(inst, weights, assignment)
    return {
        "version": FORMAT_VERSION,
        "n": inst.n,
        "m": inst.m,
        "s": inst.s,
        "hours": assignment.to_nested(),
        "metrics": {
            "theta": format_rational(weights.theta),
            "alpha": format_rational(weights.alpha),
            "fill_rate": [format_rational(b) for b in metrics.fill_rate],
            "utilization": [format_rational(u) for u in metrics.utilization],
            "objective": format_rational(metrics.objective),
            "cost": format_rational(metrics.total_cost),
        },
    }


def solution_from_dict(doc: Any, inst: Instance | None = None) -> Assignment:
    """Hours are authoritative; the metrics block is ignored on load."""
    if not isinstance(doc, dict):
        raise InstanceError("<root>", "solution document must be an object")
    for key in ("n", "m", "s", "hours"):
        if key not in doc:
            raise InstanceError(key, "missing field")
    shape = (doc["n"], doc["m"], doc["s"])
    for key, v in zip("nms", shape):
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise InstanceError(key, f"expected a non-negative integer, got {v!r}")
    _need_list(doc, "hours", 3)
    assignment = Assignment.from_nested(doc["hours"], shape)
    if inst is not None and assignment.shape != (inst.n, inst.m, inst.s):
        raise DimensionError("hours", f"solution shape {assignment.shape} does not match the instance")
    return assignment


def save_solution(inst: Instance, weights: PenaltyWeights, assignment: Assignment, path: str | Path) -> None:
    Path(path).write_text(dumps(solution_to_dict(inst, weights, assignment)))


def load_solution(path: str | Path, inst: Instance | None = None) -> Assignment:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError("<root>", f"malformed JSON: {exc}") from exc
    return solution_from_dict(doc, inst)


@dataclass(frozen=True)
class GeneratorParams:
    n: int = 4
    m: int = 6
    s: int = 3
    demand_range: tuple[int, int] = (0, 4)
    capacity_range: tuple[int, int] = (2, 10)
    cost_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(10))
    utility_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(20))
    skill_density: float = 0.6
    budget_factor: Fraction = Fraction(1, 2)
    caregivers_per_patient_range: tuple[int, int] = (1, 3)
    patients_per_caregiver_range: tuple[int, int] = (1, 4)
    integer_costs: bool = False
    seed: int = 0

    def __post_init__(self):
        for key in ("n", "m", "s"):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise InstanceError(key, f"must be a positive integer, got {v!r}")
        for key in ("demand_range", "capacity_range", "cost_range", "utility_range",
                    "caregivers_per_patient_range", "patients_per_caregiver_range"):
            lo, hi = getattr(self, key)
            if lo < 0 or hi < lo:
                raise InstanceError(key, f"need 0 <= low <= high, got ({lo}, {hi})")
        for key in ("caregivers_per_patient_range", "patients_per_caregiver_range"):
            if getattr(self, key)[0] < 1:
                raise InstanceError(key, "cardinality caps must be >= 1")
        if not 0 <= self.skill_density <= 1:
            raise InstanceError("skill_density", f"must lie in [0, 1], got {self.skill_density}")
        if Fraction(self.budget_factor) < 0:
            raise InstanceError("budget_factor", "must be >= 0")


def _draw_rational(rng: np.random.Generator, lo: Fraction, hi: Fraction, integer: bool) -> Fraction:
    if integer:
        return Fraction(int(rng.integers(int(lo), int(hi) + 1)))
    # two decimal places keeps documents readable and exact
    return Fraction(int(rng.integers(int(Fraction(lo) * 100), int(Fraction(hi) * 100) + 1)), 100)


def full_service_cost(inst: Instance) -> Fraction:
    """Cost of serving every demanded hour with its cheapest capable caregiver."""
    total = Fraction(0)
    for j in range(inst.m):
        for k in range(inst.s):
            if not inst.demand[j][k]:
                continue
            capable = [inst.unit_cost[i][j][k] for i in range(inst.n) if inst.skills[i][k]]
            if capable:
                total += min(capable) * inst.demand[j][k]
    return total


def generate(params: GeneratorParams) -> Instance:
    """Random instance; a pure function of ``params`` (seed included)."""
    rng = np.random.default_rng(params.seed)
    n, m, s = params.n, params.m, params.s
    skills = []
    for _ in range(n):
        row = rng.random(s) < params.skill_density
        while not row.any():
            if params.skill_density == 0:
                row = np.arange(s) == rng.integers(s)
            else:
                row = rng.random(s) < params.skill_density
        skills.append([int(v) for v in row])
    dlo, dhi = params.demand_range
    demand = [[int(v) for v in rng.integers(dlo, dhi + 1, size=s)] for _ in range(m)]
    clo, chi = params.capacity_range
    capacity = [int(v) for v in rng.integers(clo, chi + 1, size=n)]
    nlo, nhi = params.caregivers_per_patient_range
    max_cg = [int(v) for v in rng.integers(nlo, nhi + 1, size=m)]
    mlo, mhi = params.patients_per_caregiver_range
    max_pt = [int(v) for v in rng.integers(mlo, mhi + 1, size=n)]
    lo, hi = params.cost_range
    cost = [[[_draw_rational(rng, lo, hi, params.integer_costs) for _ in range(s)]
             for _ in range(m)] for _ in range(n)]
    ulo, uhi = params.utility_range
    utility = [_draw_rational(rng, ulo, uhi, params.integer_costs) for _ in range(m)]
    inst = Instance(n=n, m=m, s=s, skills=skills, demand=demand, capacity=capacity,
                    max_caregivers_per_patient=max_cg, max_patients_per_caregiver=max_pt,
                    unit_cost=cost, budget=0, utility=utility)
    budget = Fraction(params.budget_factor) * full_service_cost(inst)
    if params.integer_costs:
        budget = Fraction(int(budget))
    else:
        budget = Fraction(int(budget * 100), 100)
    return inst.with_budget(budget)


def micro_params(seed: int, **overrides) -> GeneratorParams:
    """Tiny instances that exhaustive enumeration can still handle."""
    rng = np.random.default_rng([seed, 7])
    base = dict(
        n=int(rng.integers(1, 3)), m=int(rng.integers(1, 3)), s=int(rng.integers(1, 3)),
        demand_range=(0, 2), capacity_range=(0, 4),
        cost_range=(Fraction(0), Fraction(4)), utility_range=(Fraction(0), Fraction(10)),
        skill_density=0.8, budget_factor=Fraction(int(rng.integers(3, 16)), 10),
        caregivers_per_patient_range=(1, 2), patients_per_caregiver_range=(1, 2),
        integer_costs=True, seed=seed,
    )
    base.update(overrides)
    return GeneratorParams(**base)
