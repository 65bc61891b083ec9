import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhcassign import (
    Assignment,
    KnapsackInstance,
    check_feasibility,
    enumerate_all,
    extract_knapsack_solution,
    knapsack_to_assignment,
    solve_exact,
    solve_knapsack_bruteforce,
)

CLASSIC = KnapsackInstance([6, 10, 12], [1, 2, 3], 5)


def test_empty_knapsack():
    inst, w = knapsack_to_assignment(KnapsackInstance([], [], 3))
    assert (inst.n, inst.m, inst.s) == (1, 0, 1)
    assert w.theta == w.alpha == 0
    assert solve_knapsack_bruteforce(KnapsackInstance([], [], 3)) == (0, ())


def test_single_item_substitution():
    inst, _ = knapsack_to_assignment(KnapsackInstance([5], [1], 1))
    assert (inst.n, inst.m, inst.s) == (1, 1, 1)
    assert inst.demand == ((1,),)
    assert inst.budget == 1
    assert inst.utility == (5,)


def test_classic_construction():
    inst, w = knapsack_to_assignment(CLASSIC)
    assert (inst.n, inst.m, inst.s) == (1, 3, 1)
    assert inst.budget == 5
    assert inst.skills == ((1,),)
    assert inst.capacity == (3,)
    assert inst.max_patients_per_caregiver == (3,)
    assert inst.max_caregivers_per_patient == (1, 1, 1)
    assert inst.demand == ((1,), (1,), (1,))
    assert inst.utility == (6, 10, 12)
    assert [inst.unit_cost[0][j][0] for j in range(3)] == [1, 2, 3]


def test_classic_optimum():
    # subsets by hand: {2,3} weighs 5 and is worth 22, nothing feasible is worth more
    value, sel = solve_knapsack_bruteforce(CLASSIC)
    assert value == 22
    assert sel == (0, 1, 1)
    inst, w = knapsack_to_assignment(CLASSIC)
    for solver in (solve_exact, enumerate_all):
        sol = solver(inst, w)
        assert sol.objective == 22
        assert extract_knapsack_solution(sol.assignment) == (0, 1, 1)


def test_extract_solution():
    assert extract_knapsack_solution(Assignment.zeros(1, 3, 1)) == (0, 0, 0)
    assert extract_knapsack_solution(Assignment((1, 3, 1), (1, 1, 1))) == (1, 1, 1)
    with pytest.raises(ValueError):
        extract_knapsack_solution(Assignment.zeros(2, 3, 1))


def test_bruteforce_edges():
    assert solve_knapsack_bruteforce(KnapsackInstance([3, 4], [1, 2], 0)) == (0, (0, 0))
    assert solve_knapsack_bruteforce(KnapsackInstance([7], [2], 2)) == (7, (1,))
    with pytest.raises(ValueError):
        solve_knapsack_bruteforce(KnapsackInstance([1] * 21, [1] * 21, 5))


def test_rational_data():
    kp = KnapsackInstance([Fraction(5, 2), Fraction(7, 3)], [Fraction(1, 2), Fraction(2, 3)], Fraction(1, 2))
    inst, w = knapsack_to_assignment(kp)
    assert solve_exact(inst, w).objective == Fraction(5, 2)


knapsacks = st.integers(0, 9).flatmap(lambda k: st.builds(
    KnapsackInstance,
    st.lists(st.integers(0, 30), min_size=k, max_size=k),
    st.lists(st.integers(0, 15), min_size=k, max_size=k),
    st.integers(0, 60)))


@settings(max_examples=100, deadline=None)
@given(knapsacks)
def test_round_trip(kp):
    inst, w = knapsack_to_assignment(kp)
    sol = solve_exact(inst, w)
    value, sel = solve_knapsack_bruteforce(kp)
    assert sol.objective == value
    picked = extract_knapsack_solution(sol.assignment)
    assert kp.weight_of(picked) <= kp.capacity
    assert kp.value_of(picked) == value
    assert picked == sel


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5).flatmap(lambda k: st.builds(
    KnapsackInstance,
    st.lists(st.integers(0, 9), min_size=k, max_size=k),
    st.lists(st.integers(0, 9), min_size=k, max_size=k),
    st.integers(0, 30))))
def test_reduced_feasible_hours_are_binary(kp):
    inst, _ = knapsack_to_assignment(kp)
    for hours in itertools.product(range(3), repeat=inst.m):
        feasible = check_feasibility(inst, Assignment((1, inst.m, 1), hours)).ok
        if feasible:
            assert set(hours) <= {0, 1}
