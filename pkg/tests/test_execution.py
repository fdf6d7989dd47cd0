from __future__ import annotations

import csv
import math
import random

import pytest

from conftest import buried_block_instance, make_instance
from stackplan.domain import (
    ActionOptions,
    GoalSpec,
    Instance,
    OnStack,
    PickPlace,
    Plan,
    StackSpec,
    TablePick,
    Topple,
    arrangement_from_stacks,
    validate_plan,
)
from stackplan.execution import (
    ACTION_SECONDS,
    GAP_TASK_SECONDS,
    OUT_OF_REACH,
    PRECONDITION,
    ExecConfig,
    ToppleRegionViolation,
    execute,
    monte_carlo_success,
    topple_region,
    write_log_csv,
)

TOPPLE = ActionOptions(topple=True)


def topple_pick_instance() -> tuple[Instance, Plan]:
    """Four blocks on one stack, all toppled, all picked back up."""
    inst = make_instance(
        [[0, 1, 2, 3], [], []],
        {0: OnStack(1, 1), 1: OnStack(1, 0), 2: OnStack(2, 1), 3: OnStack(2, 0)},
        options=TOPPLE,
    )
    plan = Plan(
        actions=(
            Topple(stack=0, count=4),
            TablePick(obj=0, dst=1),
            TablePick(obj=1, dst=1),
            TablePick(obj=2, dst=2),
            TablePick(obj=3, dst=2),
        )
    )
    assert validate_plan(inst, plan).ok
    return inst, plan


def test_no_topple_plan_is_deterministic_and_ignores_seed():
    inst = make_instance([[0, 1], [], []], {1: OnStack(2, 0)})
    plan = Plan(actions=(PickPlace(src=0, dst=1), PickPlace(src=0, dst=2)))
    a = execute(plan, inst, ExecConfig(seed=1))
    b = execute(plan, inst, ExecConfig(seed=99))
    assert a.success and a.reached_goal
    assert a == b  # no randomness consumed anywhere
    assert a.gap_tasks_resolved == 0
    assert a.proxy_seconds == 2 * ACTION_SECONDS["pick_place"]
    assert a.grounded_poses == {}


def topple_only_plan() -> Plan:
    return Plan(actions=(Topple(stack=0, count=4),))


def test_same_seed_reproduces_grounded_poses():
    inst, _ = topple_pick_instance()
    plan = topple_only_plan()  # picks would pop the poses again
    a = execute(plan, inst, ExecConfig(seed=7))
    b = execute(plan, inst, ExecConfig(seed=7))
    c = execute(plan, inst, ExecConfig(seed=8))
    assert a == b
    assert sorted(a.grounded_poses) == [0, 1, 2, 3]
    assert a.grounded_poses != c.grounded_poses


def test_zero_dispersion_every_pick_succeeds():
    inst, plan = topple_pick_instance()
    cfg = ExecConfig(topple_dispersion_scale=0.0, lateral_jitter=0.0, seed=3)
    report = execute(plan, inst, cfg)
    assert report.success and report.reached_goal
    # picking a grounded object costs the surcharge even when nothing fails
    assert report.gap_tasks_resolved == 4
    expected = ACTION_SECONDS["topple"] + 4 * (
        ACTION_SECONDS["table_pick"] + GAP_TASK_SECONDS
    )
    assert report.proxy_seconds == pytest.approx(expected)
    # all four land exactly at stack + direction * base_offset; stack 0's
    # clearest strip points in -y, away from the other two stacks
    probe = execute(topple_only_plan(), inst, cfg)
    assert set(probe.grounded_poses.values()) == {(0.45, -0.45)}


def test_landing_formula_matches_manual_replay():
    inst, _ = topple_pick_instance()
    cfg = ExecConfig(seed=42)
    report = execute(topple_only_plan(), inst, cfg)
    assert report.success

    rng = random.Random(42)
    spec = inst.stacks[0]
    region = topple_region(inst, 0, cfg)
    dx, dy = region.direction
    for obj in range(4):  # ascending id order, one (u, v) pair each
        u = rng.random()
        v = rng.random()
        along = cfg.topple_base_offset + cfg.topple_dispersion_scale * 4 * u
        lateral = cfg.lateral_jitter * (2.0 * v - 1.0)
        want = (spec.x + dx * along - dy * lateral, spec.y + dy * along + dx * lateral)
        assert report.grounded_poses[obj] == pytest.approx(want, abs=1e-12)


def test_reach_threshold_flips_outcome():
    # Sample the landings once, then bisect reach around the worst of them:
    # the full pick-everything plan must flip from success to OutOfReach.
    inst, plan = topple_pick_instance()
    probe = execute(topple_only_plan(), inst, ExecConfig(
        lateral_jitter=0.0, seed=11))
    assert probe.success
    worst = max(math.hypot(x, y) for x, y in probe.grounded_poses.values())

    ok = execute(plan, inst, ExecConfig(
        lateral_jitter=0.0, seed=11, reach_radius=worst + 1e-9))
    assert ok.success
    bad = execute(plan, inst, ExecConfig(
        lateral_jitter=0.0, seed=11, reach_radius=worst - 1e-9))
    assert not bad.success
    assert bad.failure is not None and bad.failure.reason == OUT_OF_REACH


def test_unreachable_base_offset_fails_first_grounded_pick():
    inst, plan = topple_pick_instance()
    # every landing is at least base_offset past the stack, beyond this reach
    cfg = ExecConfig(reach_radius=0.50, seed=0)
    report = execute(plan, inst, cfg)
    assert not report.success
    assert report.failure is not None
    assert report.failure.reason == OUT_OF_REACH
    assert report.failure.step == 1  # the first TablePick
    assert report.log[-1].outcome == OUT_OF_REACH
    assert not report.reached_goal


def test_buried_block_topple_needs_no_grounded_pick():
    inst = buried_block_instance(TOPPLE)
    plan = Plan(actions=(Topple(stack=0, count=3), PickPlace(src=0, dst=2)))
    # reach is irrelevant: the goal object never touches the table
    report = execute(plan, inst, ExecConfig(reach_radius=0.01, seed=5))
    assert report.success and report.reached_goal
    assert report.gap_tasks_resolved == 0
    assert len(report.grounded_poses) == 3


def test_monotone_dispersion_never_rescues_a_failure():
    inst, plan = topple_pick_instance()
    succeeded_after_failure = False
    failed = False
    for scale in [0.0, 0.02, 0.04, 0.08, 0.12, 0.2, 0.3, 0.5]:
        cfg = ExecConfig(
            topple_dispersion_scale=scale,
            lateral_jitter=0.0,
            reach_radius=0.75,
            seed=9,
        )
        ok = execute(plan, inst, cfg).success
        if failed and ok:
            succeeded_after_failure = True
        if not ok:
            failed = True
    assert failed  # the sweep must actually cross the reach boundary
    assert not succeeded_after_failure


def test_monte_carlo_matches_analytic_success_rate():
    # Zero jitter makes landings collinear with the strip axis, and landing
    # distance grows monotonically in the draw u, so putting the reach
    # boundary at u* gives per-pick failure probability p = 1 - u*. Four
    # independent picks then succeed with probability u*^4.
    inst, plan = topple_pick_instance()
    u_star = 0.8
    region = topple_region(inst, 0, ExecConfig(lateral_jitter=0.0))
    spec = inst.stacks[0]
    along = 0.20 + 0.04 * 4 * u_star
    reach = math.hypot(
        spec.x + region.direction[0] * along,
        spec.y + region.direction[1] * along,
    )
    cfg = ExecConfig(lateral_jitter=0.0, reach_radius=reach, seed=0)
    trials = 600
    rate = monte_carlo_success(plan, inst, cfg, trials)
    analytic = u_star**4
    se = math.sqrt(analytic * (1.0 - analytic) / trials)
    assert abs(rate - analytic) <= 3.0 * se
    # deterministic: per-trial seeds derive from the base seed
    assert rate == monte_carlo_success(plan, inst, cfg, trials)


def test_monte_carlo_rejects_zero_trials():
    inst, plan = topple_pick_instance()
    with pytest.raises(ValueError):
        monte_carlo_success(plan, inst, ExecConfig(), 0)


def test_config_rejects_negative_distances():
    with pytest.raises(ValueError):
        ExecConfig(lateral_jitter=-0.01)
    with pytest.raises(ValueError):
        ExecConfig(reach_radius=-1.0)


def test_precondition_failure_is_reported_not_raised():
    inst = make_instance([[0], [], []], {0: OnStack(2, 0)})
    plan = Plan(actions=(PickPlace(src=1, dst=2),))  # stack 1 is empty
    report = execute(plan, inst, ExecConfig())
    assert not report.success
    assert report.failure is not None and report.failure.reason == PRECONDITION
    assert report.failure.step == 0


def test_surrounded_stack_has_no_valid_landing_strip():
    stacks = (
        StackSpec(0, 4, 0.45, 0.0),
        StackSpec(1, 4, 0.70, 0.0),
        StackSpec(2, 4, 0.45, 0.25),
        StackSpec(3, 4, 0.45, -0.25),
    )
    start = arrangement_from_stacks({0: [0, 1], 1: [], 2: [], 3: []}, 2)
    inst = Instance(
        stacks=stacks,
        buffers=0,
        start=start,
        goal=GoalSpec(((0, OnStack(1, 0)),)),
        options=TOPPLE,
    )
    with pytest.raises(ToppleRegionViolation):
        topple_region(inst, 0, ExecConfig())
    plan = Plan(actions=(Topple(stack=0, count=1), TablePick(obj=0, dst=1)))
    with pytest.raises(ToppleRegionViolation):
        execute(plan, inst, ExecConfig())


def test_region_direction_points_away_from_robot():
    inst, _ = topple_pick_instance()
    for stack in (0, 1, 2):
        spec = inst.stacks[stack]
        region = topple_region(inst, stack, ExecConfig())
        dx, dy = region.direction
        assert dx * spec.x + dy * spec.y >= 0
        # the strip never touches its own stack footprint
        assert not region.contains((spec.x, spec.y))


def test_log_csv_round_trip(tmp_path):
    inst, plan = topple_pick_instance()
    report = execute(plan, inst, ExecConfig(seed=2))
    path = tmp_path / "log.csv"
    write_log_csv(report, str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "action", "outcome", "seconds", "gap_task"]
    assert len(rows) == 1 + len(report.log)
    assert rows[1][1] == "topple"
    assert [r[4] for r in rows[1:]] == ["0", "1", "1", "1", "1"]
