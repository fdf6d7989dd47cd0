"""Desk-scale execution model with stochastic topple landings.

A plan is replayed against the symbolic domain, but toppled objects land at
sampled table poses instead of an abstract "on table" state. Every later pick
of such an object is a gap task: its grounding was deferred to execution time,
and the pick succeeds only if the revealed pose sits inside the arm's reach
disc. That is deliberately the single stochastic failure mode; everything else
either succeeds or trips a precondition.

Landing model: a topple of m objects from stack s throws each of them along a
fixed per-stack direction, at offset base + scale*m*u from the stack centre
and lateral jitter jitter*(2v-1), with u and v drawn uniformly per object.
Larger topples disperse further, which is the only property the model needs.
All distribution parameters live in ExecConfig; none are claimed as measured
physics.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .domain import (
    ACTION_NAMES,
    Instance,
    OnStack,
    OnTable,
    Plan,
    PreconditionViolated,
    ScoopLoad,
    StackSpec,
    TablePick,
    Topple,
    apply,
    is_goal,
)

# Objects may not land within this distance of any stack base.
STACK_FOOTPRINT_RADIUS = 0.05

# Proxy execution seconds per action, plus a planning surcharge whenever a
# pick's target pose was revealed mid-run. These feed benchmark columns only;
# they are not simulated time.
ACTION_SECONDS = {
    "pick_place": 5.0,
    "table_pick": 5.0,
    "topple": 4.0,
    "scoop_load": 5.0,
    "scoop_unload": 5.0,
    "scoop_carry": 4.0,
}
GAP_TASK_SECONDS = 1.0

OUT_OF_REACH = "OutOfReach"
PRECONDITION = "PreconditionViolated"

_DIRECTIONS = ((1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (-1.0, 0.0))


class ToppleRegionViolation(AssertionError):
    """A landing region overlaps a stack footprint; the model is misconfigured."""


@dataclass(frozen=True)
class ExecConfig:
    reach_radius: float = 0.85
    topple_base_offset: float = 0.20
    topple_dispersion_scale: float = 0.04
    lateral_jitter: float = 0.03
    seed: int = 0
    robot_base: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        for name in (
            "reach_radius",
            "topple_base_offset",
            "topple_dispersion_scale",
            "lateral_jitter",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ToppleRegion:
    """Axis-aligned landing strip for one stack's topples."""

    stack: int
    direction: tuple[float, float]
    # Rectangle in world coordinates covering every admissible landing.
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def contains(self, pose: tuple[float, float]) -> bool:
        eps = 1e-9
        return (
            self.xmin - eps <= pose[0] <= self.xmax + eps
            and self.ymin - eps <= pose[1] <= self.ymax + eps
        )


def _region_rect(
    spec: StackSpec, direction: tuple[float, float], inner: float, outer: float,
    half_width: float,
) -> tuple[float, float, float, float]:
    dx, dy = direction
    ax = spec.x + dx * inner
    bx = spec.x + dx * outer
    ay = spec.y + dy * inner
    by = spec.y + dy * outer
    # perpendicular extent
    px, py = -dy, dx
    return (
        min(ax, bx) - abs(px) * half_width,
        max(ax, bx) + abs(px) * half_width,
        min(ay, by) - abs(py) * half_width,
        max(ay, by) + abs(py) * half_width,
    )


def _rect_clearance(
    rect: tuple[float, float, float, float], point: tuple[float, float]
) -> float:
    xmin, xmax, ymin, ymax = rect
    dx = max(xmin - point[0], 0.0, point[0] - xmax)
    dy = max(ymin - point[1], 0.0, point[1] - ymax)
    return math.hypot(dx, dy)


def topple_region(
    instance: Instance, stack: int, config: ExecConfig
) -> ToppleRegion:
    """Pick the stack's landing direction and validate region disjointness.

    Candidate directions are the four axes pointing away from the robot base
    (nonnegative dot product with the stack offset, so larger dispersion can
    only land further from the arm). Among those the one whose full-extent
    strip keeps the most clearance from other stack footprints wins; ties go
    to the fixed candidate order. A winner that still intersects any
    footprint is a configuration error, not a stochastic failure.
    """
    specs = instance.all_stacks
    spec = specs[stack]
    inner = config.topple_base_offset
    outer = inner + config.topple_dispersion_scale * instance.topple_cap()
    half_width = config.lateral_jitter

    rx = spec.x - config.robot_base[0]
    ry = spec.y - config.robot_base[1]
    best: Optional[tuple[float, tuple[float, float]]] = None
    for d in _DIRECTIONS:
        if d[0] * rx + d[1] * ry < 0:
            continue
        rect = _region_rect(spec, d, inner, outer, half_width)
        clearance = min(
            _rect_clearance(rect, (other.x, other.y))
            for other in specs
            if other.id != stack
        )
        if best is None or clearance > best[0]:
            best = (clearance, d)
    assert best is not None  # at least two axes always face away
    _, direction = best
    rect = _region_rect(spec, direction, inner, outer, half_width)
    for other in specs:
        if _rect_clearance(rect, (other.x, other.y)) < STACK_FOOTPRINT_RADIUS:
            raise ToppleRegionViolation(
                f"landing strip of stack {stack} overlaps footprint of"
                f" stack {other.id}"
            )
    return ToppleRegion(stack, direction, *rect)


@dataclass(frozen=True)
class ExecFailure:
    step: int
    reason: str  # OUT_OF_REACH or PRECONDITION
    detail: str = ""


@dataclass(frozen=True)
class LogEntry:
    step: int
    action: str
    outcome: str  # "ok" or a failure reason
    seconds: float
    gap_task: bool = False


@dataclass
class ExecReport:
    success: bool
    failure: Optional[ExecFailure]
    grounded_poses: dict[int, tuple[float, float]] = field(default_factory=dict)
    log: tuple[LogEntry, ...] = ()
    gap_tasks_resolved: int = 0
    proxy_seconds: float = 0.0
    reached_goal: bool = False

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "failure": None
            if self.failure is None
            else {
                "step": self.failure.step,
                "reason": self.failure.reason,
                "detail": self.failure.detail,
            },
            "grounded_poses": {
                str(o): [p[0], p[1]] for o, p in sorted(self.grounded_poses.items())
            },
            "gap_tasks_resolved": self.gap_tasks_resolved,
            "proxy_seconds": round(self.proxy_seconds, 6),
            "reached_goal": self.reached_goal,
        }


def write_log_csv(report: ExecReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["step", "action", "outcome", "seconds", "gap_task"])
        for e in report.log:
            out.writerow([e.step, e.action, e.outcome, e.seconds, int(e.gap_task)])


def _in_reach(pose: tuple[float, float], config: ExecConfig) -> bool:
    # Reach depends on this pose alone; other table objects never matter.
    return (
        math.hypot(pose[0] - config.robot_base[0], pose[1] - config.robot_base[1])
        <= config.reach_radius
    )


def execute(plan: Plan, instance: Instance, config: ExecConfig) -> ExecReport:
    """Replay a plan, grounding topples stochastically. Never raises for
    in-model failures; ToppleRegionViolation signals a bad configuration."""
    arr = instance.start
    rng: Optional[random.Random] = None  # created on first topple only
    regions: dict[int, ToppleRegion] = {}
    grounded: dict[int, tuple[float, float]] = {}
    log: list[LogEntry] = []
    gap_tasks = 0
    seconds = 0.0
    specs = instance.all_stacks

    for step, action in enumerate(plan.actions):
        name = ACTION_NAMES[type(action)]
        cost = ACTION_SECONDS[name]
        gap = False

        if isinstance(action, TablePick) and action.obj in grounded:
            gap = True
            gap_tasks += 1
            cost += GAP_TASK_SECONDS
            pose = grounded[action.obj]
            if not _in_reach(pose, config):
                seconds += cost
                log.append(LogEntry(step, name, OUT_OF_REACH, cost, True))
                return ExecReport(
                    success=False,
                    failure=ExecFailure(
                        step,
                        OUT_OF_REACH,
                        f"object {action.obj} landed at"
                        f" ({pose[0]:.3f}, {pose[1]:.3f})",
                    ),
                    grounded_poses=grounded,
                    log=tuple(log),
                    gap_tasks_resolved=gap_tasks,
                    proxy_seconds=seconds,
                )

        toppled: list[int] = []
        if isinstance(action, Topple):
            toppled = sorted(
                obj
                for obj, loc in enumerate(arr.locations)
                if isinstance(loc, OnStack)
                and loc.stack == action.stack
                and loc.above < action.count
            )

        try:
            arr = apply(instance, arr, action)
        except PreconditionViolated as exc:
            seconds += cost
            log.append(LogEntry(step, name, PRECONDITION, cost, gap))
            return ExecReport(
                success=False,
                failure=ExecFailure(step, PRECONDITION, str(exc)),
                grounded_poses=grounded,
                log=tuple(log),
                gap_tasks_resolved=gap_tasks,
                proxy_seconds=seconds,
            )

        if toppled:
            if rng is None:
                rng = random.Random(config.seed)
            region = regions.get(action.stack)
            if region is None:
                region = topple_region(instance, action.stack, config)
                regions[action.stack] = region
            spec = specs[action.stack]
            dx, dy = region.direction
            px, py = -dy, dx
            m = action.count
            locs = list(arr.locations)
            for obj in toppled:
                u = rng.random()
                v = rng.random()
                along = (
                    config.topple_base_offset
                    + config.topple_dispersion_scale * m * u
                )
                lateral = config.lateral_jitter * (2.0 * v - 1.0)
                pose = (
                    spec.x + dx * along + px * lateral,
                    spec.y + dy * along + py * lateral,
                )
                if not region.contains(pose):
                    raise ToppleRegionViolation(
                        f"sample for object {obj} escaped its landing strip"
                    )
                for other in specs:
                    if (
                        math.hypot(pose[0] - other.x, pose[1] - other.y)
                        < STACK_FOOTPRINT_RADIUS
                    ):
                        raise ToppleRegionViolation(
                            f"object {obj} landed on stack {other.id}"
                        )
                grounded[obj] = pose
                locs[obj] = OnTable(pose)
            arr = replace(arr, locations=tuple(locs))

        if isinstance(action, (TablePick, ScoopLoad)):
            grounded.pop(action.obj, None)

        seconds += cost
        log.append(LogEntry(step, name, "ok", cost, gap))

    return ExecReport(
        success=True,
        failure=None,
        grounded_poses=grounded,
        log=tuple(log),
        gap_tasks_resolved=gap_tasks,
        proxy_seconds=seconds,
        reached_goal=is_goal(arr, instance.goal),
    )


def monte_carlo_success(
    plan: Plan, instance: Instance, config: ExecConfig, trials: int
) -> float:
    """Fraction of independently seeded replays that succeed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    wins = 0
    for trial in range(trials):
        cfg = replace(config, seed=config.seed + trial)
        if execute(plan, instance, cfg).success:
            wins += 1
    return wins / trials


__all__ = [
    "ACTION_SECONDS",
    "GAP_TASK_SECONDS",
    "OUT_OF_REACH",
    "PRECONDITION",
    "STACK_FOOTPRINT_RADIUS",
    "ExecConfig",
    "ExecFailure",
    "ExecReport",
    "LogEntry",
    "ToppleRegion",
    "ToppleRegionViolation",
    "execute",
    "monte_carlo_success",
    "topple_region",
    "write_log_csv",
]
