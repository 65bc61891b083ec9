"""Problem data, feasibility checking and objective evaluation.

All constraint checks run in exact integer / rational arithmetic. Hours are
stored as a flat row-major tuple indexed ``(i * m + j) * s + k`` so that the
natural tuple ordering is the lexicographic order over ``(i, j, k)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Number = int | float | str | Fraction


class InstanceError(ValueError):
    """Raised when instance data is malformed.

    ``field`` names the offending document field (e.g. ``demand[2][0]``).
    """

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class DimensionError(InstanceError):
    pass


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # repr keeps the shortest round-tripping decimal, avoiding binary noise
        return Fraction(repr(value))
    return Fraction(value)


def _int_vector(name: str, values: Iterable, length: int, minimum: int) -> tuple[int, ...]:
    out = tuple(values)
    if len(out) != length:
        raise DimensionError(name, f"expected length {length}, got {len(out)}")
    for idx, v in enumerate(out):
        if isinstance(v, bool) or int(v) != v:
            raise InstanceError(f"{name}[{idx}]", f"expected an integer, got {v!r}")
        if v < minimum:
            raise InstanceError(f"{name}[{idx}]", f"must be >= {minimum}, got {v}")
    return tuple(int(v) for v in out)


def _int_matrix(name: str, rows: Iterable, shape: tuple[int, int], minimum: int,
                maximum: int | None = None) -> tuple[tuple[int, ...], ...]:
    rows = tuple(rows)
    if len(rows) != shape[0]:
        raise DimensionError(name, f"expected {shape[0]} rows, got {len(rows)}")
    out = []
    for r, row in enumerate(rows):
        vec = _int_vector(f"{name}[{r}]", row, shape[1], minimum)
        if maximum is not None:
            for c, v in enumerate(vec):
                if v > maximum:
                    raise InstanceError(f"{name}[{r}][{c}]", f"must be <= {maximum}, got {v}")
        out.append(vec)
    return tuple(out)


def _nonneg(name: str, value: Number) -> Fraction:
    try:
        q = as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InstanceError(name, f"not a rational number: {value!r}") from exc
    if q < 0:
        raise InstanceError(name, f"must be >= 0, got {q}")
    return q


@dataclass(frozen=True)
class Instance:
    """A caregiver-to-patient assignment problem.

    Array arguments may be any nested sequences; they are validated and
    frozen into tuples (integers) or tuples of ``Fraction`` (rationals).
    """

    n: int
    m: int
    s: int
    skills: tuple  # n x s, entries in {0, 1}
    demand: tuple  # m x s
    capacity: tuple  # n
    max_caregivers_per_patient: tuple  # m
    max_patients_per_caregiver: tuple  # n
    unit_cost: tuple  # n x m x s
    budget: Fraction
    utility: tuple  # m

    def __post_init__(self):
        for name in ("n", "m", "s"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InstanceError(name, f"must be a non-negative integer, got {v!r}")
        n, m, s = self.n, self.m, self.s
        put = object.__setattr__
        put(self, "skills", _int_matrix("skills", self.skills, (n, s), 0, 1))
        put(self, "demand", _int_matrix("demand", self.demand, (m, s), 0))
        put(self, "capacity", _int_vector("capacity", self.capacity, n, 0))
        put(self, "max_caregivers_per_patient",
            _int_vector("max_caregivers_per_patient", self.max_caregivers_per_patient, m, 1))
        put(self, "max_patients_per_caregiver",
            _int_vector("max_patients_per_caregiver", self.max_patients_per_caregiver, n, 1))

        cost = tuple(self.unit_cost)
        if len(cost) != n:
            raise DimensionError("unit_cost", f"expected {n} caregiver blocks, got {len(cost)}")
        frozen = []
        for i, block in enumerate(cost):
            block = tuple(block)
            if len(block) != m:
                raise DimensionError(f"unit_cost[{i}]", f"expected {m} rows, got {len(block)}")
            rows = []
            for j, row in enumerate(block):
                row = tuple(row)
                if len(row) != s:
                    raise DimensionError(f"unit_cost[{i}][{j}]", f"expected {s} entries, got {len(row)}")
                rows.append(tuple(_nonneg(f"unit_cost[{i}][{j}][{k}]", v) for k, v in enumerate(row)))
            frozen.append(tuple(rows))
        put(self, "unit_cost", tuple(frozen))

        put(self, "budget", _nonneg("budget", self.budget))
        util = tuple(self.utility)
        if len(util) != m:
            raise DimensionError("utility", f"expected length {m}, got {len(util)}")
        put(self, "utility", tuple(_nonneg(f"utility[{j}]", v) for j, v in enumerate(util)))

    @property
    def size(self) -> int:
        return self.n * self.m * self.s

    def index(self, i: int, j: int, k: int) -> int:
        return (i * self.m + j) * self.s + k

    def total_demand(self, j: int) -> int:
        return sum(self.demand[j])

    def with_budget(self, budget: Number) -> "Instance":
        return _replace(self, budget=budget)

    def with_utility(self, utility: Sequence[Number]) -> "Instance":
        return _replace(self, utility=utility)


def _replace(inst: Instance, **changes) -> Instance:
    fields = dict(
        n=inst.n, m=inst.m, s=inst.s, skills=inst.skills, demand=inst.demand,
        capacity=inst.capacity, max_caregivers_per_patient=inst.max_caregivers_per_patient,
        max_patients_per_caregiver=inst.max_patients_per_caregiver, unit_cost=inst.unit_cost,
        budget=inst.budget, utility=inst.utility,
    )
    fields.update(changes)
    return Instance(**fields)


@dataclass(frozen=True)
class PenaltyWeights:
    """Equity weight ``theta`` and efficacy weight ``alpha``."""

    theta: Fraction = Fraction(0)
    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "theta", _nonneg("theta", self.theta))
        object.__setattr__(self, "alpha", _nonneg("alpha", self.alpha))


@dataclass(frozen=True)
class Assignment:
    """Integer hour tensor ``x[i][j][k]`` stored flat in row-major order."""

    shape: tuple[int, int, int]
    hours: tuple[int, ...]

    def __post_init__(self):
        n, m, s = self.shape
        hours = tuple(self.hours)
        if len(hours) != n * m * s:
            raise DimensionError("hours", f"expected {n * m * s} entries for shape {self.shape}, got {len(hours)}")
        for idx, h in enumerate(hours):
            if isinstance(h, bool) or int(h) != h or h < 0:
                raise InstanceError(f"hours[{idx}]", f"must be a non-negative integer, got {h!r}")
        object.__setattr__(self, "shape", (int(n), int(m), int(s)))
        object.__setattr__(self, "hours", tuple(int(h) for h in hours))

    @classmethod
    def zeros(cls, n: int, m: int, s: int) -> "Assignment":
        return cls((n, m, s), (0,) * (n * m * s))

    @classmethod
    def empty_for(cls, instance: Instance) -> "Assignment":
        return cls.zeros(instance.n, instance.m, instance.s)

    @classmethod
    def from_nested(cls, nested, shape: tuple[int, int, int] | None = None) -> "Assignment":
        nested = [[list(row) for row in block] for block in nested]
        if shape is None:
            n = len(nested)
            m = len(nested[0]) if n else 0
            s = len(nested[0][0]) if m else 0
            shape = (n, m, s)
        n, m, s = shape
        if len(nested) != n or any(len(b) != m for b in nested) or any(
                len(r) != s for b in nested for r in b):
            raise DimensionError("hours", f"nested hours do not match shape {shape}")
        return cls(shape, tuple(h for block in nested for row in block for h in row))

    def to_nested(self) -> list[list[list[int]]]:
        n, m, s = self.shape
        return [[list(self.hours[(i * m + j) * s:(i * m + j + 1) * s]) for j in range(m)]
                for i in range(n)]

    def at(self, i: int, j: int, k: int) -> int:
        _, m, s = self.shape
        return self.hours[(i * m + j) * s + k]

    @property
    def links(self) -> tuple[tuple[int, ...], ...]:
        """z[i][j] = 1 iff caregiver i gives patient j at least one hour."""
        n, m, s = self.shape
        h = self.hours
        return tuple(
            tuple(1 if any(h[(i * m + j) * s:(i * m + j + 1) * s]) else 0 for j in range(m))
            for i in range(n)
        )


@dataclass(frozen=True)
class SolutionMetrics:
    fill_rate: tuple[Fraction, ...]
    utilization: tuple[Fraction, ...]
    max_fill: Fraction
    max_util: Fraction
    total_cost: Fraction
    objective: Fraction
    patients_included: tuple[bool, ...] = field(default=())
    caregivers_included: tuple[bool, ...] = field(default=())

    def included_fill(self) -> list[Fraction]:
        return [b for b, inc in zip(self.fill_rate, self.patients_included) if inc]

    def included_util(self) -> list[Fraction]:
        return [u for u, inc in zip(self.utilization, self.caregivers_included) if inc]


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: tuple[int, ...]
    detail: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def constraints(self) -> set[str]:
        return {v.constraint for v in self.violations}


def _check_shape(instance: Instance, assignment: Assignment) -> None:
    if assignment.shape != (instance.n, instance.m, instance.s):
        raise DimensionError(
            "hours", f"assignment shape {assignment.shape} does not match instance "
                     f"({instance.n}, {instance.m}, {instance.s})")


def patient_hours(instance: Instance, assignment: Assignment) -> list[int]:
    n, m, s = instance.n, instance.m, instance.s
    h = assignment.hours
    totals = [0] * m
    for i in range(n):
        base = i * m * s
        for j in range(m):
            off = base + j * s
            totals[j] += sum(h[off:off + s])
    return totals


def caregiver_hours(instance: Instance, assignment: Assignment) -> list[int]:
    block = instance.m * instance.s
    h = assignment.hours
    return [sum(h[i * block:(i + 1) * block]) for i in range(instance.n)]


def fill_rate_values(instance: Instance, totals: Sequence[int]) -> list[Fraction]:
    out = []
    for j, hours in enumerate(totals):
        dem = instance.total_demand(j)
        out.append(Fraction(hours, dem) if dem else Fraction(1))
    return out


def utilization_values(instance: Instance, totals: Sequence[int]) -> list[Fraction]:
    return [Fraction(t, cap) if cap else Fraction(0) for t, cap in zip(totals, instance.capacity)]


def fill_rates(instance: Instance, assignment: Assignment) -> list[Fraction]:
    """Fraction of each patient's total demand that is assigned.

    Patients with zero total demand get 1 and are excluded from equity terms.
    """
    _check_shape(instance, assignment)
    return fill_rate_values(instance, patient_hours(instance, assignment))


def utilizations(instance: Instance, assignment: Assignment) -> list[Fraction]:
    """Fraction of each caregiver's capacity that is used (0 when capacity is 0)."""
    _check_shape(instance, assignment)
    return utilization_values(instance, caregiver_hours(instance, assignment))


def total_cost(instance: Instance, assignment: Assignment) -> Fraction:
    _check_shape(instance, assignment)
    cost = Fraction(0)
    m, s = instance.m, instance.s
    for idx, h in enumerate(assignment.hours):
        if h:
            i, rem = divmod(idx, m * s)
            j, k = divmod(rem, s)
            cost += h * instance.unit_cost[i][j][k]
    return cost


def check_feasibility(instance: Instance, assignment: Assignment) -> FeasibilityReport:
    """Report every violated constraint of the assignment model.

    Constraint names: ``demand`` (per patient/service), ``budget``, ``skill``
    (hours only for capable, linked caregivers within their capacity),
    ``link`` (a link carries at least one hour), ``patient_links``,
    ``caregiver_links`` and ``capacity`` (total hours per caregiver).
    """
    _check_shape(instance, assignment)
    n, m, s = instance.n, instance.m, instance.s
    h = assignment.hours
    out: list[Violation] = []

    served = [[0] * s for _ in range(m)]
    cg_total = [0] * n
    patient_links = [0] * m
    caregiver_links = [0] * n
    cost = Fraction(0)
    for i in range(n):
        cap = instance.capacity[i]
        skill = instance.skills[i]
        for j in range(m):
            off = (i * m + j) * s
            row = h[off:off + s]
            z = 1 if any(row) else 0
            # z is derived from x, so the link lower bound holds by construction
            if z > sum(row):
                out.append(Violation("link", (i, j)))
            patient_links[j] += z
            caregiver_links[i] += z
            costs = instance.unit_cost[i][j]
            for k, x in enumerate(row):
                if not x:
                    continue
                if x > skill[k] * z * cap:
                    out.append(Violation("skill", (i, j, k),
                                         f"x={x} > e*z*H={skill[k] * z * cap}"))
                served[j][k] += x
                cg_total[i] += x
                cost += x * costs[k]

    for j in range(m):
        for k in range(s):
            if served[j][k] > instance.demand[j][k]:
                out.append(Violation("demand", (j, k),
                                     f"assigned {served[j][k]} > demand {instance.demand[j][k]}"))
    if cost > instance.budget:
        out.append(Violation("budget", (), f"cost {cost} > budget {instance.budget}"))
    for j in range(m):
        if patient_links[j] > instance.max_caregivers_per_patient[j]:
            out.append(Violation("patient_links", (j,),
                                 f"{patient_links[j]} caregivers > {instance.max_caregivers_per_patient[j]}"))
    for i in range(n):
        if caregiver_links[i] > instance.max_patients_per_caregiver[i]:
            out.append(Violation("caregiver_links", (i,),
                                 f"{caregiver_links[i]} patients > {instance.max_patients_per_caregiver[i]}"))
        if cg_total[i] > instance.capacity[i]:
            out.append(Violation("capacity", (i,), f"{cg_total[i]} hours > {instance.capacity[i]}"))
    return FeasibilityReport(tuple(out))


def objective_from_totals(instance: Instance, weights: PenaltyWeights,
                          p_hours: Sequence[int], c_hours: Sequence[int]) -> Fraction:
    """Objective value given per-patient and per-caregiver assigned hours."""
    value = Fraction(0)
    fills = []
    for j, hours in enumerate(p_hours):
        dem = instance.total_demand(j)
        if dem:
            b = Fraction(hours, dem)
            fills.append(b)
            value += instance.utility[j] * b
        else:
            value += instance.utility[j]
    if weights.theta and fills:
        value -= weights.theta * (len(fills) * max(fills) - sum(fills))
    if weights.alpha:
        utils = [Fraction(t, cap) for t, cap in zip(c_hours, instance.capacity) if cap]
        if utils:
            value -= weights.alpha * (len(utils) * max(utils) - sum(utils))
    return value


def evaluate_objective(instance: Instance, weights: PenaltyWeights, assignment: Assignment) -> Fraction:
    """Total utility minus equity and efficacy penalties, in exact arithmetic."""
    _check_shape(instance, assignment)
    return objective_from_totals(instance, weights, patient_hours(instance, assignment),
                                 caregiver_hours(instance, assignment))


def compute_metrics(instance: Instance, weights: PenaltyWeights, assignment: Assignment) -> SolutionMetrics:
    _check_shape(instance, assignment)
    p_hours = patient_hours(instance, assignment)
    c_hours = caregiver_hours(instance, assignment)
    fills = fill_rate_values(instance, p_hours)
    utils = utilization_values(instance, c_hours)
    p_inc = tuple(instance.total_demand(j) > 0 for j in range(instance.m))
    c_inc = tuple(cap > 0 for cap in instance.capacity)
    inc_f = [b for b, inc in zip(fills, p_inc) if inc]
    inc_u = [u for u, inc in zip(utils, c_inc) if inc]
    return SolutionMetrics(
        fill_rate=tuple(fills),
        utilization=tuple(utils),
        max_fill=max(inc_f, default=Fraction(0)),
        max_util=max(inc_u, default=Fraction(0)),
        total_cost=total_cost(instance, assignment),
        objective=objective_from_totals(instance, weights, p_hours, c_hours),
        patients_included=p_inc,
        caregivers_included=c_inc,
    )


def total_utility(instance: Instance, metrics: SolutionMetrics) -> Fraction:
    """Efficiency term: sum of utility times fill-rate."""
    return sum((p * b for p, b in zip(instance.utility, metrics.fill_rate)), Fraction(0))
