from __future__ import annotations

from stackplan import textio
from stackplan.domain import validate_plan
from stackplan.extract import extract
from stackplan.gadget import graph_for_instance
from stackplan.oracle import brute_force_plan
from stackplan.scoop import build_scoop_demo_instance, load_scoop_demo, pap_only
from stackplan.solver import SolveConfig, SolveStatus, solve_anytime


def test_demo_costs_four_with_extensions_eight_without():
    inst = build_scoop_demo_instance()
    full = brute_force_plan(inst)
    assert full.cost == 4
    plain = brute_force_plan(pap_only(inst))
    assert plain.cost == 8
    # the headline claim: strictly cheaper with topple and container moves
    assert full.cost < plain.cost


def test_native_solver_matches_demo_oracle_costs():
    inst = build_scoop_demo_instance()
    res = solve_anytime(inst, config=SolveConfig(budget_ms=60_000, seed=0))
    assert res.status is SolveStatus.OPTIMAL
    assert res.objective == 4
    plan = extract(inst, graph_for_instance(inst), res.solution)
    report = validate_plan(inst, plan)
    assert report.ok and report.reached_goal
    assert len(plan) == 4

    res_pap = solve_anytime(
        pap_only(inst), config=SolveConfig(budget_ms=60_000, seed=0)
    )
    assert res_pap.status is SolveStatus.OPTIMAL
    assert res_pap.objective == 8


def test_shipped_data_file_equals_builder_output():
    assert load_scoop_demo() == build_scoop_demo_instance()


def test_demo_round_trips_through_text():
    inst = build_scoop_demo_instance()
    assert textio.parse_instance(textio.serialize_instance(inst)) == inst


def test_demo_shape():
    inst = build_scoop_demo_instance()
    regions = {s.region for s in inst.stacks}
    assert regions == {"left", "right"}
    assert inst.options.scoop and inst.options.topple
    assert len(inst.containers) == 1
    assert inst.containers[0].capacity == 2
    assert inst.buffers == 0
