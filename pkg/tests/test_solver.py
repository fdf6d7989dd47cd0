from __future__ import annotations

import random

from stackplan.domain import ActionOptions, OnStack
from stackplan.flow import check_solution
from stackplan.gadget import build_pick_place_graph, graph_for_instance
from stackplan.oracle import brute_force_plan
from stackplan.solver import (
    SolveConfig,
    SolveStatus,
    lower_bound,
    solve_anytime,
)

from conftest import buried_block_instance, make_instance, random_stack_instance


def test_lower_bound_frozen_values():
    pap = buried_block_instance(ActionOptions(topple=False))
    assert lower_bound(pap) == 4
    top = buried_block_instance(ActionOptions(topple=True))
    assert lower_bound(top) == 2


def test_lower_bound_zero_when_satisfied():
    inst = make_instance([[0], [], []], {0: OnStack(0, 0)})
    assert lower_bound(inst) == 0


def test_buried_block_optimal_both_action_sets():
    pap = buried_block_instance(ActionOptions(topple=False))
    res = solve_anytime(pap)
    assert res.status is SolveStatus.OPTIMAL
    assert res.objective == 4
    top = buried_block_instance(ActionOptions(topple=True))
    res2 = solve_anytime(top)
    assert res2.status is SolveStatus.OPTIMAL
    assert res2.objective == 2
    assert res2.objective == res2.solution.objective(
        graph_for_instance(top)
    )


def test_solution_passes_independent_check():
    inst = buried_block_instance(ActionOptions(topple=True))
    g = graph_for_instance(inst)
    res = solve_anytime(inst, g)
    assert check_solution(inst, g, res.solution) == []


def test_incumbents_strictly_improve_and_trace_matches():
    inst = buried_block_instance(ActionOptions(topple=True))
    res = solve_anytime(inst)
    objs = [inc.objective for inc in res.incumbents]
    assert objs == sorted(objs, reverse=True)
    assert len(set(objs)) == len(objs)
    assert len(res.trace) == len(res.incumbents)
    for line, inc in zip(res.trace, res.incumbents):
        parts = line.split()
        assert len(parts) == 4
        assert int(parts[1]) == inc.objective
    assert res.time_to_first_feasible_ms is not None


def test_deterministic_given_config():
    rng = random.Random(2)
    inst = random_stack_instance(rng, num_objects=4, h=3, buffers=1)
    cfg = SolveConfig(budget_ms=30000, seed=7)
    a = solve_anytime(inst, config=cfg)
    b = solve_anytime(inst, config=cfg)
    assert a.status is b.status
    assert a.objective == b.objective
    assert a.nodes_expanded == b.nodes_expanded
    assert a.solution == b.solution
    assert [i.objective for i in a.incumbents] == [
        i.objective for i in b.incumbents
    ]


def test_seed_changes_tie_breaks_not_value():
    rng = random.Random(4)
    inst = random_stack_instance(rng, num_objects=4, h=3, buffers=1)
    a = solve_anytime(inst, config=SolveConfig(budget_ms=30000, seed=1))
    b = solve_anytime(inst, config=SolveConfig(budget_ms=30000, seed=99))
    assert a.status is b.status is SolveStatus.OPTIMAL
    assert a.objective == b.objective


def test_matches_oracle_on_random_instances():
    rng = random.Random(41)
    for _ in range(25):
        inst = random_stack_instance(
            rng,
            num_objects=rng.randint(2, 5),
            h=rng.choice([3, 4]),
            buffers=rng.randint(0, 2),
            options=ActionOptions(
                topple=rng.random() < 0.6,
                max_topple=rng.choice([None, 2]),
            ),
        )
        res = solve_anytime(inst, config=SolveConfig(budget_ms=30000))
        o = brute_force_plan(inst)
        if o.status == "optimal":
            assert res.status is SolveStatus.OPTIMAL
            assert res.objective == o.cost
        else:
            assert res.status is SolveStatus.INFEASIBLE_UP_TO_HORIZON


def test_infeasible_reported():
    inst = make_instance(
        [[0], [1]],
        {0: OnStack(1, 0), 1: OnStack(0, 0)},
        h=1,
        options=ActionOptions(topple=False),
    )
    res = solve_anytime(inst)
    assert res.status is SolveStatus.INFEASIBLE_UP_TO_HORIZON
    assert res.solution is None and res.objective is None


def test_goal_at_start_is_zero_cost_optimal():
    inst = make_instance([[0], [], []], {0: OnStack(0, 0)})
    res = solve_anytime(inst)
    assert res.status is SolveStatus.OPTIMAL
    assert res.objective == 0
    assert res.solution.horizon == 0
    assert res.solution.moves == ()


def test_budget_exhaustion_statuses():
    rng = random.Random(8)
    inst = random_stack_instance(rng, num_objects=6, h=4, buffers=3)
    res = solve_anytime(inst, config=SolveConfig(budget_ms=0))
    assert res.status in (
        SolveStatus.NO_SOLUTION_IN_BUDGET,
        SolveStatus.FEASIBLE_BUDGET_EXHAUSTED,
        SolveStatus.OPTIMAL,  # instant optimum before the first tick
    )


def test_lower_bound_is_admissible():
    rng = random.Random(13)
    for _ in range(30):
        inst = random_stack_instance(
            rng,
            num_objects=rng.randint(2, 4),
            h=3,
            buffers=1,
            options=ActionOptions(topple=rng.random() < 0.5),
        )
        o = brute_force_plan(inst)
        if o.status != "optimal":
            continue
        assert lower_bound(inst) <= o.cost


def test_explicit_graph_argument_respected():
    inst = buried_block_instance(ActionOptions(topple=False))
    g = build_pick_place_graph(inst.all_stacks, inst.num_objects)
    res = solve_anytime(inst, g)
    assert res.status is SolveStatus.OPTIMAL and res.objective == 4


def test_horizon_override_can_cut_search_short():
    inst = buried_block_instance(ActionOptions(topple=True))
    res = solve_anytime(inst, config=SolveConfig(horizon_max=1))
    # one step is not enough for any plan here
    assert res.status is SolveStatus.INFEASIBLE_UP_TO_HORIZON
