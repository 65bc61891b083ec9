import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance
from hhcassign import (
    Assignment,
    PenaltyWeights,
    TabuParams,
    check_feasibility,
    evaluate_objective,
    greedy_construct,
    neighborhood,
    solve_exact,
    tabu_improve,
)
from hhcassign.instance_io import GeneratorParams, generate, micro_params
from hhcassign.tabu import InfeasibleAssignmentError, Move, TabuState

FAST = TabuParams(time_limit=30.0, max_stall=40)


def mid_params(seed):
    rng = np.random.default_rng([seed, 2])
    return GeneratorParams(n=int(rng.integers(1, 6)), m=int(rng.integers(1, 9)),
                           s=int(rng.integers(1, 4)), capacity_range=(2, 14),
                           budget_factor=Fraction(int(rng.integers(2, 15)), 10), seed=seed)


def test_optimal_start_is_kept():
    inst = generate(micro_params(17))
    w = PenaltyWeights(2, 1)
    opt = solve_exact(inst, w)
    out = tabu_improve(inst, w, opt.assignment, FAST)
    assert evaluate_objective(inst, w, out) == opt.objective


def test_zero_start_improves():
    inst = make_instance(n=2, m=3, s=2, demand=[[2, 1], [0, 3], [1, 1]], capacity=[5, 5],
                         budget=1000, utility=[4, 5, 6])
    w = PenaltyWeights(1, 1)
    zero = Assignment.empty_for(inst)
    out = tabu_improve(inst, w, zero, FAST)
    assert evaluate_objective(inst, w, out) > evaluate_objective(inst, w, zero)
    assert evaluate_objective(inst, w, out) <= solve_exact(inst, w).objective


def test_closes_greedy_gap(greedy_trap):
    w = PenaltyWeights()
    start, _ = greedy_construct(greedy_trap)
    exact = solve_exact(greedy_trap, w).objective
    greedy_gap = exact - evaluate_objective(greedy_trap, w, start)
    assert greedy_gap == 3
    out = tabu_improve(greedy_trap, w, start, FAST)
    assert exact - evaluate_objective(greedy_trap, w, out) <= greedy_gap
    assert evaluate_objective(greedy_trap, w, out) == exact


def test_rejects_infeasible_start():
    inst = make_instance(skills=[[0]])
    with pytest.raises(InfeasibleAssignmentError):
        tabu_improve(inst, PenaltyWeights(), Assignment.from_nested([[[1]]]))


def test_params_validation():
    with pytest.raises(ValueError):
        TabuParams(tenure=0)
    with pytest.raises(ValueError):
        TabuParams(max_stall=0)


def test_tabu_status_and_expiry():
    state = TabuState({0: 3}, {2: 1}, Assignment.zeros(1, 1, 1), Fraction(0), Assignment.zeros(1, 1, 1))
    move = Move("insert", ((0, 1),), (0,), (0,), Fraction(1))
    assert state.is_tabu(move)
    state.iteration = 3
    assert not state.is_tabu(move)
    assert not state.is_tabu(Move("insert", ((0, 1),), (1,), (2,), Fraction(1)))


class TestNeighborhood:
    def test_saturated_caregiver_and_full_patient(self):
        inst = make_instance(n=1, m=2, s=1, demand=[[2], [3]], capacity=[3])
        a = Assignment.from_nested([[[2], [1]]])
        assert neighborhood(inst, PenaltyWeights(), a, 0, 0) == []

    def test_single_insert(self):
        inst = make_instance(n=1, m=1, s=2, skills=[[1, 0]], demand=[[1, 1]], capacity=[1], budget=1)
        moves = neighborhood(inst, PenaltyWeights(), Assignment.empty_for(inst), 0, 0)
        assert len(moves) == 1
        assert moves[0].kind == "insert"
        assert moves[0].deltas == ((0, 1),)

    def test_reallocate_and_rebalance(self):
        inst = make_instance(n=2, m=2, s=1, demand=[[2], [2]], capacity=[4, 4])
        a = Assignment.from_nested([[[1], [0]], [[1], [2]]])
        kinds = {mv.kind for mv in neighborhood(inst, PenaltyWeights(), a, 0, 1)}
        assert kinds == {"reallocate"}
        kinds = {mv.kind for mv in neighborhood(inst, PenaltyWeights(), a, 0, 0)}
        assert kinds == {"reallocate"}
        b = Assignment.from_nested([[[0], [2]], [[1], [0]]])
        kinds = {mv.kind for mv in neighborhood(inst, PenaltyWeights(), b, 0, 0)}
        assert kinds == {"insert", "reallocate", "rebalance"}

    def test_cardinality_blocks_new_link(self):
        inst = make_instance(n=2, m=1, s=1, demand=[[3]], capacity=[3, 3], max_cg=[1])
        a = Assignment.from_nested([[[2]], [[0]]])
        assert neighborhood(inst, PenaltyWeights(), a, 0, 1) == []
        # moving the only hour keeps the patient at one caregiver
        b = Assignment.from_nested([[[0]], [[1]]])
        assert [mv.kind for mv in neighborhood(inst, PenaltyWeights(), b, 0, 0)] == ["reallocate"]

    def test_scores_match_full_evaluation(self):
        rng = random.Random(7)
        checked = 0
        seed = 0
        while checked < 100:
            seed += 1
            inst = generate(mid_params(seed))
            w = PenaltyWeights(rng.choice([0, 1, 3]), rng.choice([0, 1, 3]))
            current, _ = greedy_construct(inst)
            for _ in range(5):
                j, i = rng.randrange(inst.m), rng.randrange(inst.n)
                moves = neighborhood(inst, w, current, j, i)
                if not moves:
                    continue
                mv = rng.choice(moves)
                nxt = mv.apply_to(current)
                assert check_feasibility(inst, nxt).ok
                assert mv.objective == evaluate_objective(inst, w, nxt)
                current = nxt
                checked += 1


seeds = st.integers(0, 10**6)
weights_st = st.builds(PenaltyWeights, st.sampled_from([0, 1, 5]), st.sampled_from([0, 1, 5]))


@settings(max_examples=40, deadline=None)
@given(seeds, weights_st)
def test_never_worse_than_start(seed, w):
    inst = generate(mid_params(seed))
    start, _ = greedy_construct(inst)
    out = tabu_improve(inst, w, start, FAST)
    assert check_feasibility(inst, out).ok
    assert evaluate_objective(inst, w, out) >= evaluate_objective(inst, w, start) - 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, weights_st)
def test_gap_to_exact_never_widens(seed, w):
    inst = generate(micro_params(seed))
    start, _ = greedy_construct(inst)
    out = tabu_improve(inst, w, start, FAST)
    exact = solve_exact(inst, w).objective
    assert exact - evaluate_objective(inst, w, out) <= exact - evaluate_objective(inst, w, start) + 1e-9
    assert evaluate_objective(inst, w, out) <= exact


def test_deterministic_for_fixed_seed():
    inst = generate(mid_params(9))
    w = PenaltyWeights(2, 1)
    start, _ = greedy_construct(inst)
    params = TabuParams(time_limit=60.0, max_stall=60, seed=123)
    assert tabu_improve(inst, w, start, params) == tabu_improve(inst, w, start, params)
