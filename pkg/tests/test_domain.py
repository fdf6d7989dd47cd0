from __future__ import annotations

import random

import pytest

from stackplan.domain import (
    ActionOptions,
    Arrangement,
    ContainerSpec,
    GoalSpec,
    InContainer,
    Instance,
    InvalidInstance,
    OnStack,
    OnTable,
    PickPlace,
    Plan,
    PreconditionViolated,
    ScoopCarry,
    ScoopLoad,
    ScoopUnload,
    StackSpec,
    TablePick,
    Topple,
    apply,
    arrangement_from_stacks,
    buffer_specs,
    initial_container_regions,
    is_goal,
    validate_arrangement,
    validate_instance,
    validate_plan,
)

from conftest import buried_block_instance, make_instance


def test_stack_contents_are_top_first():
    arr = arrangement_from_stacks({0: [2, 0, 1], 1: []}, 3)
    assert arr.stack_contents(0) == (2, 0, 1)
    assert arr.top_of(0) == 2
    assert arr.stack_height(0) == 3
    assert arr.stack_height(1) == 0
    assert arr.locations[1] == OnStack(0, 2)


def test_validate_arrangement_rejects_gaps():
    inst = make_instance([[0, 1], [], []], {0: OnStack(1, 0)})
    # above counts 0 and 2 leave a hole at depth 1
    bad = Arrangement((OnStack(0, 0), OnStack(0, 2)))
    with pytest.raises(InvalidInstance):
        validate_arrangement(inst, bad)


def test_validate_arrangement_rejects_overflow():
    inst = make_instance([[0], [1], [2]], {0: OnStack(1, 0)}, h=1)
    bad = arrangement_from_stacks({0: [0, 1], 1: [2], 2: []}, 3)
    with pytest.raises(InvalidInstance):
        validate_arrangement(inst, bad)


def test_pick_place_moves_top_and_relabels_depths():
    inst = make_instance([[0, 1, 2], [], []], {0: OnStack(1, 0)})
    arr = apply(inst, inst.start, PickPlace(0, 1))
    assert arr.stack_contents(0) == (1, 2)
    assert arr.stack_contents(1) == (0,)
    # depths shifted for the two left behind
    assert arr.locations[1] == OnStack(0, 0)
    assert arr.locations[2] == OnStack(0, 1)


def test_pick_place_rejects_empty_source_and_full_target():
    inst = make_instance([[0, 1, 2, 3], [4], []], {0: OnStack(2, 0)})
    with pytest.raises(PreconditionViolated):
        apply(inst, inst.start, PickPlace(2, 1))
    with pytest.raises(PreconditionViolated):
        apply(inst, inst.start, PickPlace(1, 0))


def test_topple_moves_prefix_to_table():
    inst = buried_block_instance(ActionOptions(topple=True))
    arr = apply(inst, inst.start, Topple(0, 3))
    assert arr.stack_contents(0) == (3,)
    assert set(arr.table_objects()) == {0, 1, 2}
    assert arr.locations[3] == OnStack(0, 0)


def test_topple_respects_option_gate_and_count():
    inst = buried_block_instance(ActionOptions(topple=False))
    with pytest.raises(PreconditionViolated):
        apply(inst, inst.start, Topple(0, 2))
    inst2 = buried_block_instance(ActionOptions(topple=True, max_topple=2))
    with pytest.raises(PreconditionViolated):
        apply(inst2, inst2.start, Topple(0, 3))
    with pytest.raises(PreconditionViolated):
        apply(inst2, inst2.start, Topple(1, 1))  # empty stack


def test_table_pick_regrounds_object():
    inst = buried_block_instance(ActionOptions(topple=True))
    arr = apply(inst, inst.start, Topple(0, 3))
    arr = apply(inst, arr, TablePick(1, 2))
    assert arr.stack_contents(2) == (1,)
    assert set(arr.table_objects()) == {0, 2}
    with pytest.raises(PreconditionViolated):
        apply(inst, arr, TablePick(3, 2))  # not on the table


def test_topple_then_reverse_picks_restores_column():
    rng = random.Random(11)
    for _ in range(25):
        n = rng.randint(2, 4)
        inst = make_instance(
            [list(range(n)), [], []],
            {0: OnStack(0, n - 1)},
            options=ActionOptions(topple=True),
        )
        count = rng.randint(1, n)
        arr = apply(inst, inst.start, Topple(0, count))
        # picking the toppled objects back in reverse order rebuilds the stack
        for obj in reversed(range(count)):
            arr = apply(inst, arr, TablePick(obj, 0))
        assert arr.stack_contents(0) == inst.start.stack_contents(0)


def test_goal_check_ignores_table_pose_when_ungrounded():
    inst = make_instance(
        [[0], [], []], {0: OnStack(0, 0)}, options=ActionOptions(topple=True)
    )
    goal = GoalSpec(((0, OnTable(None)),))
    arr = apply(inst, inst.start, Topple(0, 1))
    assert is_goal(arr, goal)


def test_validate_plan_reports_failing_step():
    inst = buried_block_instance(ActionOptions(topple=True))
    plan = Plan((Topple(0, 3), TablePick(3, 2)))  # object 3 never toppled
    report = validate_plan(inst, plan)
    assert not report.ok
    assert report.failing_step == 1
    assert "table" in report.error


def test_validate_plan_happy_path_counts_actions():
    inst = buried_block_instance(ActionOptions(topple=True))
    plan = Plan((Topple(0, 3), PickPlace(0, 2)))
    report = validate_plan(inst, plan)
    assert report.ok
    assert report.reached_goal
    assert report.action_counts["topple"] == 1
    assert report.action_counts["pick_place"] == 1


def test_buffer_specs_are_deterministic_and_clear_of_stacks():
    stacks = make_instance([[0], [], []], {0: OnStack(0, 0)}).stacks
    a = buffer_specs(stacks, 12)
    b = buffer_specs(stacks, 12)
    assert a == b
    assert all(sp.max_height == 1 and sp.is_buffer for sp in a)
    ids = [sp.id for sp in a]
    assert ids == list(range(3, 15))
    for sp in a:
        for st in stacks:
            assert (sp.x - st.x) ** 2 + (sp.y - st.y) ** 2 > 0.11**2 / 4


def test_scoop_cycle_load_carry_unload():
    stacks = (
        StackSpec(0, 4, 0.40, -0.30, region="left"),
        StackSpec(1, 4, 0.40, 0.30, region="right"),
    )
    cont = ContainerSpec(0, "left", 2, 0.55, -0.22)
    start = arrangement_from_stacks({0: [0, 1], 1: []}, 2, containers=(cont,))
    inst = Instance(
        stacks=stacks,
        buffers=0,
        start=start,
        goal=GoalSpec(((0, OnStack(1, 0)),)),
        options=ActionOptions(topple=False, scoop=True),
        containers=(cont,),
    )
    validate_instance(inst)
    arr = inst.start
    assert initial_container_regions(inst.containers) == ("left",)
    arr = apply(inst, arr, ScoopLoad(0, 0))
    assert arr.locations[0] == InContainer(0)
    arr = apply(inst, arr, ScoopLoad(1, 0))
    with pytest.raises(PreconditionViolated):
        apply(inst, arr, ScoopLoad(1, 0))  # already loaded / over capacity
    arr = apply(inst, arr, ScoopCarry(0, "right"))
    assert arr.container_regions[0] == "right"
    with pytest.raises(PreconditionViolated):
        apply(inst, arr, ScoopCarry(0, "right"))  # no-op carry
    arr = apply(inst, arr, ScoopUnload(1, 1))
    arr = apply(inst, arr, ScoopUnload(0, 1))
    assert arr.stack_contents(1) == (0, 1)
    assert is_goal(arr, inst.goal)


def test_scoop_load_region_gate():
    stacks = (
        StackSpec(0, 4, 0.40, -0.30, region="left"),
        StackSpec(1, 4, 0.40, 0.30, region="right"),
    )
    cont = ContainerSpec(0, "left", 2, 0.55, -0.22)
    start = arrangement_from_stacks({0: [], 1: [0]}, 1, containers=(cont,))
    inst = Instance(
        stacks=stacks,
        buffers=0,
        start=start,
        goal=GoalSpec(((0, OnStack(0, 0)),)),
        options=ActionOptions(scoop=True),
        containers=(cont,),
    )
    with pytest.raises(PreconditionViolated):
        apply(inst, inst.start, ScoopLoad(0, 0))  # stack 1 is across the table


def test_goal_kind_classification():
    g1 = GoalSpec(((2, OnStack(0, 0)),))
    assert g1.kind(5) == "single"
    g2 = GoalSpec(tuple((i, OnStack(0, i)) for i in range(3)))
    assert g2.kind(3) == "multi"
    assert g2.kind(5) == "partial"


def test_instance_validation_rejects_table_start_without_topple():
    stacks = (StackSpec(0, 2, 0.4, 0.0),)
    start = Arrangement((OnTable((0.1, 0.1)),))
    inst = Instance(
        stacks=stacks,
        buffers=0,
        start=start,
        goal=GoalSpec(((0, OnStack(0, 0)),)),
        options=ActionOptions(topple=False),
    )
    with pytest.raises(InvalidInstance):
        validate_instance(inst)
