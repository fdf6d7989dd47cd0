"""Seeded instance generators, the benchmark harness, and the ablation sweep.

Two experiment families ship with the package. The suite runs either the
single-goal distribution (random piles, one uniformly chosen object must end
on a designated initially-empty stack) or the multi-goal distribution (random
start and goal piles over the same three stacks). The ablation sweeps a grid
of solver budgets and buffer counts on deliberately cramped multi-goal
instances (height 2, zero spare slots), which is where buffers and toppling
pull apart.

Every comparison is paired: toggles see byte-identical instances, only the
ActionOptions differ. Rows carry everything the aggregates need, so summaries
can always be recomputed from the CSV alone.
"""

from __future__ import annotations

import csv
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .domain import (
    ActionOptions,
    CapacityExceeded,
    GoalSpec,
    Instance,
    OnStack,
    StackSpec,
    arrangement_from_stacks,
    validate_instance,
    validate_plan,
)
from .execution import ExecConfig, execute
from .extract import LinearizationCycle, extract
from .gadget import graph_for_instance
from .solver import SolveConfig, solve_anytime

STACK_X = 0.45
STACK_YS = (-0.25, 0.0, 0.25)

DEFAULT_TOGGLES = (
    ("topple", ActionOptions(topple=True)),
    ("no_topple", ActionOptions(topple=False)),
)


def real_stacks(heights: int | Sequence[int]) -> tuple[StackSpec, ...]:
    if isinstance(heights, int):
        heights = (heights,) * len(STACK_YS)
    return tuple(
        StackSpec(i, h, STACK_X, y)
        for i, (y, h) in enumerate(zip(STACK_YS, heights))
    )


def _fill(
    rng: random.Random,
    num_objects: int,
    stack_ids: Sequence[int],
    caps: Sequence[int],
) -> dict[int, list[int]]:
    """Drop objects one by one on a uniformly chosen non-full stack.

    Returns top-first listings per stack.
    """
    if num_objects > sum(caps):
        raise CapacityExceeded(
            f"{num_objects} objects exceed {sum(caps)} slots"
        )
    limit = dict(zip(stack_ids, caps))
    piles: dict[int, list[int]] = {s: [] for s in stack_ids}
    for obj in range(num_objects):
        open_stacks = [s for s in stack_ids if len(piles[s]) < limit[s]]
        piles[rng.choice(open_stacks)].append(obj)
    return {s: list(reversed(objs)) for s, objs in piles.items()}


def gen_single_goal(
    num_objects: int,
    seed: int,
    *,
    buffers: int = 12,
    max_height: Optional[int] = None,
) -> tuple[Instance, int]:
    """Random piles on two stacks; one object must reach the empty third.

    Returns the instance and the goal object's depth (objects above it at
    the start).
    """
    h = max_height if max_height is not None else max(4, math.ceil(num_objects / 2))
    rng = random.Random(seed)
    piles = _fill(rng, num_objects, (0, 1), (h, h))
    goal_obj = rng.randrange(num_objects)
    depth = next(
        objs.index(goal_obj) for objs in piles.values() if goal_obj in objs
    )
    instance = Instance(
        stacks=real_stacks(h),
        buffers=buffers,
        start=arrangement_from_stacks(piles, num_objects),
        goal=GoalSpec(targets=((goal_obj, OnStack(2, 0)),)),
    )
    validate_instance(instance)
    return instance, depth


def gen_multi_goal(
    num_objects: int,
    seed: int,
    *,
    buffers: int = 12,
    max_height: int = 4,
    heights: Optional[Sequence[int]] = None,
) -> Instance:
    """Random start and goal piles over the same three stacks.

    By default every stack takes up to ``max_height`` objects. Passing
    ``heights`` instead samples a per-instance assignment of those caps to
    the stacks, which yields uneven piles (and deeper burials) even when
    the caps sum to exactly ``num_objects``.
    """
    rng = random.Random(seed)
    if heights is None:
        caps = (max_height,) * 3
    else:
        caps = tuple(rng.sample(list(heights), len(heights)))
    start_piles = _fill(rng, num_objects, (0, 1, 2), caps)
    goal_piles = _fill(rng, num_objects, (0, 1, 2), caps)
    targets = tuple(
        (obj, OnStack(s, above))
        for s, objs in sorted(goal_piles.items())
        for above, obj in enumerate(objs)
    )
    instance = Instance(
        stacks=real_stacks(caps),
        buffers=buffers,
        start=arrangement_from_stacks(start_piles, num_objects),
        goal=GoalSpec(targets=targets),
    )
    validate_instance(instance)
    return instance


def instance_seed(base_seed: int, size: int, index: int) -> int:
    """Stable per-instance seed; injective for size < 1000, index < 1000."""
    return base_seed * 1_000_003 + size * 1_000 + index


@dataclass(frozen=True)
class BenchConfig:
    kind: str = "single"  # "single" or "multi"
    sizes: tuple[int, ...] = (4, 6, 9)
    instances_per_setting: int = 20
    buffers: int = 12
    budget_ms: int = 30_000
    seed: int = 0
    workers: int = 1
    toggles: tuple[tuple[str, ActionOptions], ...] = DEFAULT_TOGGLES


ROW_FIELDS = (
    "kind",
    "size",
    "instance",
    "toggle",
    "seed",
    "status",
    "success",
    "actions",
    "objective",
    "time_to_first_feasible_ms",
    "solve_ms",
    "exec_proxy_s",
    "gap_tasks",
    "goal_depth",
)


@dataclass
class BenchRow:
    kind: str
    size: int
    instance: int
    toggle: str
    seed: int
    status: str
    success: bool
    actions: Optional[int]
    objective: Optional[int]
    time_to_first_feasible_ms: Optional[float]
    solve_ms: float
    exec_proxy_s: Optional[float]
    gap_tasks: Optional[int]
    goal_depth: Optional[int]


def _solve_and_execute(
    instance: Instance, budget_ms: int, seed: int
) -> tuple[str, bool, Optional[int], Optional[int], Optional[float], float,
           Optional[float], Optional[int]]:
    g = graph_for_instance(instance)
    t0 = time.perf_counter()
    res = solve_anytime(
        instance, g, SolveConfig(budget_ms=budget_ms, seed=seed)
    )
    solve_ms = (time.perf_counter() - t0) * 1000.0
    status = res.status.value
    if res.solution is None:
        return status, False, None, None, None, solve_ms, None, None
    try:
        plan = extract(instance, g, res.solution)
    except LinearizationCycle as exc:
        return (
            f"error:linearization:{exc}", False, None, res.objective,
            res.time_to_first_feasible_ms, solve_ms, None, None,
        )
    report = validate_plan(instance, plan)
    if not report.ok or not report.reached_goal:
        return (
            f"error:invalid-plan:{report.error}", False, len(plan),
            res.objective, res.time_to_first_feasible_ms, solve_ms, None, None,
        )
    exec_report = execute(plan, instance, ExecConfig(seed=seed))
    return (
        status,
        exec_report.success,
        len(plan),
        res.objective,
        res.time_to_first_feasible_ms,
        solve_ms,
        exec_report.proxy_seconds,
        exec_report.gap_tasks_resolved,
    )


def _suite_row(task: tuple) -> BenchRow:
    kind, size, index, label, options, buffers, budget_ms, base_seed = task
    seed = instance_seed(base_seed, size, index)
    if kind == "single":
        instance, depth = gen_single_goal(size, seed, buffers=buffers)
    elif kind == "multi":
        instance, depth = gen_multi_goal(size, seed, buffers=buffers), None
    else:
        raise ValueError(f"unknown suite kind {kind!r}")
    instance = replace(instance, options=options)
    (status, success, actions, objective, ttff, solve_ms, proxy_s,
     gap_tasks) = _solve_and_execute(instance, budget_ms, seed)
    return BenchRow(
        kind=kind,
        size=size,
        instance=index,
        toggle=label,
        seed=seed,
        status=status,
        success=success,
        actions=actions,
        objective=objective,
        time_to_first_feasible_ms=ttff,
        solve_ms=solve_ms,
        exec_proxy_s=proxy_s,
        gap_tasks=gap_tasks,
        goal_depth=depth,
    )


def _run_tasks(tasks: list[tuple], worker, workers: int) -> list:
    if workers <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


def run_suite(config: BenchConfig) -> list[BenchRow]:
    tasks = [
        (config.kind, size, idx, label, options, config.buffers,
         config.budget_ms, config.seed)
        for size in config.sizes
        for idx in range(config.instances_per_setting)
        for label, options in config.toggles
    ]
    rows = _run_tasks(tasks, _suite_row, config.workers)
    rows.sort(key=lambda r: (r.size, r.instance, r.toggle))
    return rows


SUMMARY_FIELDS = (
    "kind",
    "size",
    "toggle",
    "n",
    "success_rate",
    "mean_actions",
    "std_actions",
    "mean_ttff_ms",
    "mean_solve_ms",
    "mean_exec_proxy_s",
    "mean_goal_depth",
)


@dataclass
class SummaryRow:
    kind: str
    size: int
    toggle: str
    n: int
    success_rate: float
    mean_actions: Optional[float]
    std_actions: Optional[float]
    mean_ttff_ms: Optional[float]
    mean_solve_ms: float
    mean_exec_proxy_s: Optional[float]
    mean_goal_depth: Optional[float]


def _mean(xs: list[float]) -> Optional[float]:
    return statistics.fmean(xs) if xs else None


def _std(xs: list[float]) -> Optional[float]:
    if not xs:
        return None
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def summarize(rows: list[BenchRow]) -> list[SummaryRow]:
    """Per (size, toggle) aggregates; action stats cover solved rows only."""
    out: list[SummaryRow] = []
    keys = sorted({(r.kind, r.size, r.toggle) for r in rows})
    for kind, size, toggle in keys:
        group = [r for r in rows if (r.kind, r.size, r.toggle) == (kind, size, toggle)]
        actions = [float(r.actions) for r in group if r.actions is not None]
        out.append(
            SummaryRow(
                kind=kind,
                size=size,
                toggle=toggle,
                n=len(group),
                success_rate=sum(r.success for r in group) / len(group),
                mean_actions=_mean(actions),
                std_actions=_std(actions),
                mean_ttff_ms=_mean(
                    [r.time_to_first_feasible_ms for r in group
                     if r.time_to_first_feasible_ms is not None]
                ),
                mean_solve_ms=statistics.fmean(r.solve_ms for r in group),
                mean_exec_proxy_s=_mean(
                    [r.exec_proxy_s for r in group if r.exec_proxy_s is not None]
                ),
                mean_goal_depth=_mean(
                    [float(r.goal_depth) for r in group if r.goal_depth is not None]
                ),
            )
        )
    return out


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def write_rows_csv(rows: list[BenchRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(ROW_FIELDS)
        for r in rows:
            out.writerow([_csv_cell(getattr(r, f)) for f in ROW_FIELDS])


def write_summary_csv(rows: list[SummaryRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(SUMMARY_FIELDS)
        for r in rows:
            out.writerow([_csv_cell(getattr(r, f)) for f in SUMMARY_FIELDS])


# ---- ablation ------------------------------------------------------------

ABLATION_FIELDS = (
    "budget_ms",
    "buffers",
    "toggle",
    "instance",
    "seed",
    "status",
    "success",
    "actions",
    "objective",
)


@dataclass
class AblationRow:
    budget_ms: int
    buffers: int
    toggle: str
    instance: int
    seed: int
    status: str
    success: bool
    actions: Optional[int]
    objective: Optional[int]


@dataclass(frozen=True)
class AblationConfig:
    budgets_ms: tuple[int, ...] = (1_000, 5_000, 15_000)
    buffer_counts: tuple[int, ...] = (0, 2, 4, 8)
    num_objects: int = 6
    # Uneven caps that sum to num_objects: with zero buffers there is no
    # spare slot anywhere, and the tallest pile buries objects two deep.
    stack_heights: tuple[int, ...] = (3, 2, 1)
    instances_per_setting: int = 20
    seed: int = 0
    workers: int = 1
    toggles: tuple[tuple[str, ActionOptions], ...] = DEFAULT_TOGGLES


def _ablation_row(task: tuple) -> AblationRow:
    budget_ms, buffers, index, label, options, cfg_seed, size, heights = task
    seed = instance_seed(cfg_seed, size, index)
    instance = gen_multi_goal(size, seed, buffers=buffers, heights=heights)
    instance = replace(instance, options=options)
    status, success, actions, objective, _, _, _, _ = _solve_and_execute(
        instance, budget_ms, seed
    )
    return AblationRow(
        budget_ms=budget_ms,
        buffers=buffers,
        toggle=label,
        instance=index,
        seed=seed,
        status=status,
        success=success,
        actions=actions,
        objective=objective,
    )


def run_ablation(config: AblationConfig) -> list[AblationRow]:
    tasks = [
        (budget, buffers, idx, label, options, config.seed,
         config.num_objects, config.stack_heights)
        for budget in config.budgets_ms
        for buffers in config.buffer_counts
        for idx in range(config.instances_per_setting)
        for label, options in config.toggles
    ]
    rows = _run_tasks(tasks, _ablation_row, config.workers)
    rows.sort(key=lambda r: (r.budget_ms, r.buffers, r.instance, r.toggle))
    return rows


def write_ablation_csv(rows: list[AblationRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(ABLATION_FIELDS)
        for r in rows:
            out.writerow([_csv_cell(getattr(r, f)) for f in ABLATION_FIELDS])


@dataclass
class AblationMatrix:
    toggle: str
    metric: str  # "success_pct" or "mean_actions"
    budgets_ms: tuple[int, ...]
    buffer_counts: tuple[int, ...]
    grid: list[list[Optional[float]]]  # rows follow budgets, cols buffers


def ablation_matrices(rows: list[AblationRow]) -> list[AblationMatrix]:
    budgets = tuple(sorted({r.budget_ms for r in rows}))
    buffers = tuple(sorted({r.buffers for r in rows}))
    toggles = sorted({r.toggle for r in rows})
    out: list[AblationMatrix] = []
    for toggle in toggles:
        success_grid: list[list[Optional[float]]] = []
        action_grid: list[list[Optional[float]]] = []
        for b in budgets:
            srow: list[Optional[float]] = []
            arow: list[Optional[float]] = []
            for k in buffers:
                cell = [
                    r for r in rows
                    if (r.budget_ms, r.buffers, r.toggle) == (b, k, toggle)
                ]
                if not cell:
                    srow.append(None)
                    arow.append(None)
                    continue
                srow.append(100.0 * sum(r.success for r in cell) / len(cell))
                acts = [float(r.actions) for r in cell if r.actions is not None]
                arow.append(_mean(acts))
            success_grid.append(srow)
            action_grid.append(arow)
        out.append(
            AblationMatrix(toggle, "success_pct", budgets, buffers, success_grid)
        )
        out.append(
            AblationMatrix(toggle, "mean_actions", budgets, buffers, action_grid)
        )
    return out


def write_matrix_csv(matrix: AblationMatrix, path: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(
            ["budget_ms\\buffers"] + [str(b) for b in matrix.buffer_counts]
        )
        for budget, row in zip(matrix.budgets_ms, matrix.grid):
            out.writerow([str(budget)] + [_csv_cell(v) for v in row])
