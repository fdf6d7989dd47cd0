"""Exhaustive optimal planner over the symbolic domain.

Uniform-cost search on arrangements (all actions cost 1), used as the ground
truth the flow-based planner is checked against. An optional admissible
heuristic speeds up the larger calls without changing returned costs.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Iterator, Optional

from .domain import (
    ActionOptions,
    Action,
    Arrangement,
    InContainer,
    Instance,
    OnStack,
    OnTable,
    PickPlace,
    Plan,
    ScoopCarry,
    ScoopLoad,
    ScoopUnload,
    TablePick,
    Topple,
    apply,
    is_goal,
)

DEFAULT_STATE_CAP = 2_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, states_explored: int):
        super().__init__(f"state cap hit after {states_explored} states")
        self.states_explored = states_explored


@dataclass
class OptimalPlanResult:
    status: str  # "optimal" | "infeasible"
    plan: Optional[Plan]
    cost: Optional[int]
    states_explored: int


def enumerate_actions(instance: Instance, arr: Arrangement) -> Iterator[Action]:
    """All applicable actions in a fixed deterministic order."""
    specs = instance.all_stacks
    opts = instance.options
    heights = [arr.stack_height(s) for s in range(len(specs))]

    for src in range(len(specs)):
        if heights[src] == 0:
            continue
        for dst in range(len(specs)):
            if dst != src and heights[dst] < specs[dst].max_height:
                yield PickPlace(src, dst)
    if opts.topple:
        cap = instance.topple_cap()
        for stack in range(len(specs)):
            for count in range(1, min(heights[stack], cap) + 1):
                yield Topple(stack, count)
        for obj in arr.table_objects():
            for dst in range(len(specs)):
                if heights[dst] < specs[dst].max_height:
                    yield TablePick(obj, dst)
    elif any(isinstance(loc, OnTable) for loc in arr.locations):
        # Objects grounded at start remain pickable even without topple.
        for obj in arr.table_objects():
            for dst in range(len(specs)):
                if heights[dst] < specs[dst].max_height:
                    yield TablePick(obj, dst)
    if opts.scoop and instance.containers:
        for c in instance.containers:
            region = arr.container_regions[c.id]
            if len(arr.container_contents(c.id)) < c.capacity:
                for obj in arr.table_objects():
                    yield ScoopLoad(obj, c.id)
                for s, spec in enumerate(specs):
                    if spec.region == region and heights[s] > 0:
                        top = arr.top_of(s)
                        if top is not None:
                            yield ScoopLoad(top, c.id)
        for c in instance.containers:
            if arr.container_contents(c.id):
                for region in instance.regions():
                    if region != arr.container_regions[c.id]:
                        yield ScoopCarry(c.id, region)
        for c in instance.containers:
            region = arr.container_regions[c.id]
            for obj in arr.container_contents(c.id):
                for s, spec in enumerate(specs):
                    if spec.region == region and heights[s] < spec.max_height:
                        yield ScoopUnload(obj, s)


def _stack_must_move(
    instance: Instance, arr: Arrangement, cur: OnStack, target: OnStack
) -> bool:
    """Whether an on-stack object cannot reach its stack target in place.

    Objects below a resident never leave, so its height from the bottom is
    fixed until it moves; the count above it is free to change as neighbours
    come and go. Staying put works exactly when the stacks match and the
    target depth still fits under the height cap.
    """
    if cur.stack != target.stack:
        return True
    from_bottom = arr.stack_height(cur.stack) - 1 - cur.above
    return target.above + from_bottom + 1 > instance.stack_spec(cur.stack).max_height


def _heuristic(instance: Instance, arr: Arrangement) -> float:
    """Admissible lower bound on remaining actions (see module docstring)."""
    opts = instance.options
    stack_goal = 0
    table_goal = 0
    container_goal = 0
    movers: dict[int, OnStack] = {}
    for obj, target in instance.goal.targets:
        cur = arr.locations[obj]
        if isinstance(target, OnStack):
            if isinstance(cur, OnStack):
                if _stack_must_move(instance, arr, cur, target):
                    stack_goal += 1
                    movers[obj] = cur
            else:
                stack_goal += 1
        elif isinstance(target, OnTable):
            if not isinstance(cur, OnTable):
                table_goal += 1
        elif isinstance(target, InContainer):
            if cur != target:
                container_goal += 1
    h = float(stack_goal + container_goal)
    if table_goal:
        if not opts.topple:
            return math.inf
        h += math.ceil(table_goal / instance.topple_cap())
    if container_goal and not opts.scoop:
        return math.inf
    if not opts.topple:
        # Without toppling every stack exit is an individual action, so
        # objects sitting above a mover cost extra evictions. Charge each
        # unique blocker once: +1 if it is otherwise uncounted, +2 if it is
        # settled at a position its own goal pins to this stack (it must
        # leave and come back).
        goal_of = dict(instance.goal.targets)
        blocked_free: set[int] = set()
        blocked_pinned: set[int] = set()
        for obj, cur in movers.items():
            for other, loc in enumerate(arr.locations):
                if other == obj or not isinstance(loc, OnStack):
                    continue
                if loc.stack != cur.stack or loc.above >= cur.above:
                    continue
                other_target = goal_of.get(other)
                if other_target is None:
                    blocked_free.add(other)
                elif isinstance(other_target, OnStack) and other not in movers:
                    blocked_pinned.add(other)
                # movers and container-bound blockers are already counted;
                # table-bound ones cannot occur (table goals need toppling)
        h += len(blocked_free) + 2.0 * len(blocked_pinned)
    return h


def brute_force_plan(
    instance: Instance,
    options: Optional[ActionOptions] = None,
    max_states: int = DEFAULT_STATE_CAP,
    use_heuristic: bool = True,
) -> OptimalPlanResult:
    """Provably optimal plan (or infeasibility) for small instances.

    Args:
        instance: the problem; its options may be overridden.
        options: action-set override (e.g. disable topple for a paired run).
        max_states: hard cap; BudgetExceeded is raised when hit.
        use_heuristic: admissible A* acceleration; costs are unaffected.
    """
    if options is not None:
        instance = replace(instance, options=options)
    start = instance.start
    if is_goal(start, instance.goal):
        return OptimalPlanResult("optimal", Plan(()), 0, 0)

    start_key = start.canonical_key()
    parents: dict[tuple, tuple[Optional[tuple], Optional[Action]]] = {
        start_key: (None, None)
    }
    explored = 0

    def reconstruct(key: tuple, states: dict[tuple, Arrangement]) -> Plan:
        actions: list[Action] = []
        while True:
            prev, act = parents[key]
            if prev is None:
                break
            actions.append(act)  # type: ignore[arg-type]
            key = prev
        actions.reverse()
        return Plan(tuple(actions))

    states: dict[tuple, Arrangement] = {start_key: start}

    if use_heuristic:
        h0 = _heuristic(instance, start)
        if math.isinf(h0):
            return OptimalPlanResult("infeasible", None, None, 0)
        counter = 0
        heap: list[tuple[float, int, int, tuple]] = [(h0, 0, counter, start_key)]
        g_best = {start_key: 0}
        while heap:
            f, g, _, key = heapq.heappop(heap)
            if g > g_best.get(key, math.inf):
                continue
            arr = states[key]
            explored += 1
            if explored > max_states:
                raise BudgetExceeded(explored)
            if is_goal(arr, instance.goal):
                return OptimalPlanResult(
                    "optimal", reconstruct(key, states), g, explored
                )
            for action in enumerate_actions(instance, arr):
                nxt = apply(instance, arr, action)
                nkey = nxt.canonical_key()
                ng = g + 1
                if ng < g_best.get(nkey, math.inf):
                    g_best[nkey] = ng
                    states[nkey] = nxt
                    parents[nkey] = (key, action)
                    nh = _heuristic(instance, nxt)
                    if math.isinf(nh):
                        continue
                    counter += 1
                    heapq.heappush(heap, (ng + nh, ng, counter, nkey))
        return OptimalPlanResult("infeasible", None, None, explored)

    queue: deque[tuple] = deque([start_key])
    while queue:
        key = queue.popleft()
        arr = states[key]
        explored += 1
        if explored > max_states:
            raise BudgetExceeded(explored)
        for action in enumerate_actions(instance, arr):
            nxt = apply(instance, arr, action)
            nkey = nxt.canonical_key()
            if nkey in parents:
                continue
            parents[nkey] = (key, action)
            states[nkey] = nxt
            if is_goal(nxt, instance.goal):
                depth = 0
                probe = nkey
                while parents[probe][0] is not None:
                    depth += 1
                    probe = parents[probe][0]  # type: ignore[assignment]
                return OptimalPlanResult(
                    "optimal", reconstruct(nkey, states), depth, explored
                )
            queue.append(nkey)
    return OptimalPlanResult("infeasible", None, None, explored)
