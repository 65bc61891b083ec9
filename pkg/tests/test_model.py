from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance
from hhcassign import Assignment, PenaltyWeights, check_feasibility, evaluate_objective, fill_rates, utilizations
from hhcassign.exact import entry_bounds
from hhcassign.instance_io import generate, micro_params
from hhcassign.model import DimensionError, InstanceError, compute_metrics


def test_fill_rates_zero_assignment():
    inst = make_instance(n=2, m=3, s=2, demand=[[1, 2], [3, 0], [0, 1]])
    assert fill_rates(inst, Assignment.empty_for(inst)) == [0, 0, 0]


def test_fill_rates_full_service():
    inst = make_instance(n=1, m=2, s=2, demand=[[1, 2], [3, 1]])
    a = Assignment.from_nested([[[1, 2], [3, 1]]])
    assert fill_rates(inst, a) == [1, 1]


def test_fill_rate_three_quarters():
    inst = make_instance(n=1, m=1, s=2, demand=[[2, 2]])
    a = Assignment.from_nested([[[1, 2]]])
    assert fill_rates(inst, a) == [Fraction(3, 4)]


def test_zero_demand_patient_counts_as_served():
    inst = make_instance(n=1, m=2, s=1, demand=[[0], [2]])
    metrics = compute_metrics(inst, PenaltyWeights(), Assignment.empty_for(inst))
    assert metrics.fill_rate == (1, 0)
    assert metrics.patients_included == (False, True)
    assert metrics.max_fill == 0


def test_utilizations():
    inst = make_instance(n=2, m=2, s=1, demand=[[4], [4]], capacity=[8, 10])
    assert utilizations(inst, Assignment.empty_for(inst)) == [0, 0]
    a = Assignment.from_nested([[[4], [4]], [[0], [0]]])
    assert utilizations(inst, a)[0] == 1
    b = Assignment.from_nested([[[0], [0]], [[1], [3]]])
    assert utilizations(inst, b)[1] == Fraction(2, 5)


def test_zero_capacity_caregiver():
    inst = make_instance(n=2, m=1, s=1, capacity=[0, 3])
    metrics = compute_metrics(inst, PenaltyWeights(), Assignment.empty_for(inst))
    assert metrics.utilization == (0, 0)
    assert metrics.caregivers_included == (False, True)


def test_dimension_mismatch():
    inst = make_instance(n=1, m=2, s=1)
    with pytest.raises(DimensionError):
        fill_rates(inst, Assignment.zeros(1, 3, 1))
    with pytest.raises(DimensionError):
        evaluate_objective(inst, PenaltyWeights(), Assignment.zeros(2, 2, 1))


class TestFeasibility:
    def test_zero_assignment_is_feasible(self):
        inst = make_instance(n=2, m=2, s=2, budget=0)
        assert check_feasibility(inst, Assignment.empty_for(inst)).ok

    def test_skill_gate(self):
        inst = make_instance(skills=[[0]])
        report = check_feasibility(inst, Assignment.from_nested([[[1]]]))
        assert not report.ok
        assert report.violations[0].constraint == "skill"
        assert report.violations[0].index == (0, 0, 0)

    def test_budget_exceeded_by_one_unit(self):
        inst = make_instance(n=1, m=2, s=1, demand=[[3], [3]],
                             cost=[[[Fraction(5, 2)], [4]]], budget=Fraction(17, 2))
        # 2 * 5/2 + 1 * 4 = 9 = budget + 1/2; dropping one 5/2-hour fits
        over = Assignment.from_nested([[[2], [1]]])
        assert check_feasibility(inst, over).constraints() == {"budget"}
        assert check_feasibility(inst, Assignment.from_nested([[[1], [1]]])).ok

    def test_each_constraint_is_reported(self):
        inst = make_instance(n=2, m=2, s=1, demand=[[1], [5]], capacity=[3, 10],
                             max_cg=[1, 1], max_pt=[1, 2])
        a = Assignment.from_nested([[[2], [2]], [[0], [1]]])
        assert check_feasibility(inst, a).constraints() == {
            "demand", "patient_links", "caregiver_links", "capacity"}

    def test_capacity_enforced_across_patients(self):
        inst = make_instance(n=1, m=2, s=1, demand=[[3], [3]], capacity=[4])
        report = check_feasibility(inst, Assignment.from_nested([[[3], [3]]]))
        assert report.constraints() == {"capacity"}


class TestObjective:
    def test_penalties_off_full_service(self):
        inst = make_instance(n=1, m=2, s=1, demand=[[2], [1]], utility=[3, 5])
        a = Assignment.from_nested([[[2], [1]]])
        assert evaluate_objective(inst, PenaltyWeights(7, 9), a) == 8
        assert evaluate_objective(inst, PenaltyWeights(0, 0), a) == 8

    def test_equal_rates_have_no_penalty(self):
        inst = make_instance(n=2, m=2, s=1, demand=[[2], [4]], capacity=[3, 3], utility=[3, 5])
        a = Assignment.from_nested([[[1], [0]], [[0], [2]]])
        # beta = (1/2, 1/2), u = (1/3, 2/3) -> only efficacy differs
        assert evaluate_objective(inst, PenaltyWeights(100, 0), a) == 4
        b = Assignment.from_nested([[[1], [1]], [[0], [1]]])
        # beta = (1/2, 1/2), u = (2/3, 1/3): still unequal u
        assert evaluate_objective(inst, PenaltyWeights(100, 3), b) == 4 - 3 * Fraction(1, 3)

    def test_two_patient_hand_value(self):
        inst = make_instance(n=1, m=2, s=1, demand=[[1], [1]], capacity=[1], utility=[10, 10])
        a = Assignment.from_nested([[[1], [0]]])
        # 10*1 + 10*0 - 3*((1-1) + (1-0)) - 0
        assert evaluate_objective(inst, PenaltyWeights(3, 0), a) == 7
        # no other feasible assignment reaches more than 7 with these weights
        others = [Assignment.from_nested([[[0], [0]]]), Assignment.from_nested([[[0], [1]]])]
        assert max(evaluate_objective(inst, PenaltyWeights(3, 0), o) for o in others) == 7

    def test_excluded_entities_carry_no_penalty(self):
        inst = make_instance(n=2, m=2, s=1, demand=[[0], [2]], capacity=[0, 2], utility=[6, 4])
        a = Assignment.from_nested([[[0], [0]], [[0], [1]]])
        assert evaluate_objective(inst, PenaltyWeights(50, 50), a) == 6 + 2


def test_instance_validation():
    with pytest.raises(InstanceError, match=r"demand\[0\]\[0\]"):
        make_instance(demand=[[-1]])
    with pytest.raises(InstanceError, match="skills"):
        make_instance(skills=[[2]])
    with pytest.raises(InstanceError, match="max_caregivers_per_patient"):
        make_instance(max_cg=[0])
    with pytest.raises(DimensionError, match="unit_cost"):
        make_instance(n=1, m=2, s=1, cost=[[[1]]])
    with pytest.raises(InstanceError, match="budget"):
        make_instance(budget=-1)


# -- properties over random micro-instances and random hour tensors ----------

@st.composite
def instance_and_hours(draw):
    inst = generate(micro_params(draw(st.integers(0, 10**6))))
    bounds = entry_bounds(inst)
    hours = tuple(draw(st.integers(0, b + 1)) for b in bounds)
    return inst, Assignment((inst.n, inst.m, inst.s), hours)


weights_st = st.builds(PenaltyWeights, st.fractions(0, 20), st.fractions(0, 20))


@settings(max_examples=200, deadline=None)
@given(instance_and_hours())
def test_links_follow_hours(case):
    _, a = case
    for i, row in enumerate(a.links):
        for j, z in enumerate(row):
            total = sum(a.at(i, j, k) for k in range(a.shape[2]))
            assert z == (1 if total >= 1 else 0)


@settings(max_examples=200, deadline=None)
@given(instance_and_hours())
def test_feasible_rates_are_bounded(case):
    inst, a = case
    if not check_feasibility(inst, a).ok:
        return
    m = compute_metrics(inst, PenaltyWeights(), a)
    assert all(0 <= b <= 1 for b in m.included_fill())
    assert all(0 <= u <= 1 for u in m.included_util())
    assert all(m.max_fill >= b for b in m.included_fill())
    assert all(m.max_util >= u for u in m.included_util())


@settings(max_examples=200, deadline=None)
@given(instance_and_hours(), weights_st, st.fractions(0, 5), st.fractions(0, 5))
def test_objective_monotone_in_weights(case, w, d_theta, d_alpha):
    inst, a = case
    base = evaluate_objective(inst, w, a)
    assert evaluate_objective(inst, PenaltyWeights(w.theta + d_theta, w.alpha), a) <= base
    assert evaluate_objective(inst, PenaltyWeights(w.theta, w.alpha + d_alpha), a) <= base


@settings(max_examples=200, deadline=None)
@given(instance_and_hours(), st.fractions(Fraction(1, 100), 50))
def test_penalty_free_objective_is_utility_and_scales(case, lam):
    inst, a = case
    zero = PenaltyWeights()
    fills = fill_rates(inst, a)
    assert evaluate_objective(inst, zero, a) == sum(p * b for p, b in zip(inst.utility, fills))
    scaled = inst.with_utility([lam * p for p in inst.utility])
    assert evaluate_objective(scaled, zero, a) == lam * evaluate_objective(inst, zero, a)


@settings(max_examples=100, deadline=None)
@given(instance_and_hours(), weights_st)
def test_uniform_rates_zero_penalty(case, w):
    inst, _ = case
    # hours proportional to demand give every patient the same fill-rate
    hours = [0] * inst.size
    for j in range(inst.m):
        for k in range(inst.s):
            hours[inst.index(0, j, k)] = inst.demand[j][k]
    a = Assignment((inst.n, inst.m, inst.s), tuple(hours))
    fills = fill_rates(inst, a)
    expected = sum(p * b for p, b in zip(inst.utility, fills))
    if inst.n == 1 or all(c == 0 for c in inst.capacity[1:]):
        # a single included caregiver also has trivially uniform utilization
        assert evaluate_objective(inst, PenaltyWeights(w.theta, w.alpha), a) == expected
    assert evaluate_objective(inst, PenaltyWeights(w.theta, 0), a) == expected
