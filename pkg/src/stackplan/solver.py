"""Anytime exact planner over the time-expanded gadget flow.

Iterative deepening over the horizon T; within each sweep a depth-first
branch and bound enumerates exactly one macro per timestep:

  Fire    discharge a staging node through its topple aggregate
  Carry   move a loaded container between regions
  Stage   select a stack top into its staging node
  Cross   top-to-top transfer (the shift bookkeeping rides along)
  Pick    grounded pick from a table interface onto a stack
  Load / Unload   scoop container boundary moves
  Fanout  spread one table object onto a free interface

Waiting is never enumerated: any plan with an idle step maps to a shorter
one of equal cost, so skipping waits is a sound reduction, not a pruning
heuristic. Branches are ordered by cost-plus-lower-bound with a fixed kind
rank and a seeded hash as final tie break, so completed runs are
deterministic for a given (instance, config).

The lower bound routes each displaced object through all-pairs shortest
paths where an aggregate hop costs its price divided by its capacity, then
adds eviction charges for objects stacked above a mover (they must leave
the chain; if their own goal pins them to it they must also come back).
Fractional shares are summed exactly in a scaled integer domain and rounded
up once at the end.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass
from enum import Enum
from heapq import heappop, heappush
from typing import Iterable, Optional

from .domain import Instance
from .flow import FlowMove, FlowSolution, goal_nodes
from .gadget import (
    EdgeKind,
    GadgetGraph,
    NodeKind,
    graph_for_instance,
    pebble_state,
)


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_BUDGET_EXHAUSTED = "FeasibleBudgetExhausted"
    INFEASIBLE_UP_TO_HORIZON = "InfeasibleUpToHorizon"
    NO_SOLUTION_IN_BUDGET = "NoSolutionInBudget"


@dataclass(frozen=True)
class SolveConfig:
    budget_ms: int = 10_000
    seed: int = 0
    horizon_min: Optional[int] = None
    horizon_max: Optional[int] = None
    optimality_gap_stop: float = 0.0


@dataclass(frozen=True)
class Incumbent:
    elapsed_ms: float
    objective: int
    solution: FlowSolution


@dataclass
class SolveResult:
    status: SolveStatus
    solution: Optional[FlowSolution]
    objective: Optional[int]
    lower_bound: int
    nodes_expanded: int
    elapsed_ms: float
    incumbents: tuple[Incumbent, ...]
    trace: tuple[str, ...]
    horizons_completed: int

    @property
    def time_to_first_feasible_ms(self) -> Optional[float]:
        return self.incumbents[0].elapsed_ms if self.incumbents else None


_KIND_RANK = {
    "fire": 0,
    "carry": 1,
    "stage": 2,
    "cross": 3,
    "pick": 4,
    "load": 5,
    "unload": 6,
    "fanout": 7,
}


@dataclass(frozen=True)
class _Macro:
    kind: str
    ids: tuple[int, ...]
    cost: int
    moves: tuple[tuple[int, int], ...]  # (obj, edge)
    activation: Optional[int] = None
    region_update: Optional[tuple[int, str]] = None  # (container, new region)


class _Budget(Exception):
    pass


class _Stop(Exception):
    pass


# Expansion allowances for the seeding dives (see _probe). Successful dives
# finish within a few hundred expansions; past that the caps exist to hand
# the budget back to the horizon sweep quickly.
_PROBE_CROSS_CAP = 4_000
_PROBE_FULL_CAP = 6_000


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class _Context:
    """Precomputed lookups shared by the lower bound and the search."""

    def __init__(self, instance: Instance, g: GadgetGraph):
        self.instance = instance
        self.g = g
        n = len(g.nodes)
        self.num_objects = g.num_objects

        caps = [e.capacity for e in g.aggregate_edges()]
        scale = 1
        for c in caps:
            scale = _lcm(scale, c)
        self.scale = scale

        def all_pairs(weight) -> list[list[float]]:
            inf = float("inf")
            dist: list[list[float]] = [[inf] * n for _ in range(n)]
            for src in range(n):
                row = dist[src]
                row[src] = 0
                heap: list[tuple[int, int]] = [(0, src)]
                while heap:
                    d, v = heappop(heap)
                    if d > row[v]:
                        continue
                    for eid in g.out_edges[v]:
                        e = g.edge(eid)
                        nd = d + weight(e)
                        if nd < row[e.head]:
                            row[e.head] = nd
                            heappush(heap, (nd, e.head))
            return dist

        def cost_weight(e) -> int:
            if e.is_aggregate:
                return e.cost * scale // e.capacity
            return e.cost * scale

        # A step weight counts macros where the object is the unique primary
        # mover. Shifts ride along inside other macros and aggregate edges
        # are fired by a shared step, so both are free here; every other hop
        # (stage, cross, pick, load, unload, fanout) owns its own timestep.
        def step_weight(e) -> int:
            return 0 if e.is_shift or e.is_aggregate else 1

        self.dist = all_pairs(cost_weight)
        self.step_dist = all_pairs(step_weight)

        self.goal_map = goal_nodes(instance, g)
        self.transient = set(g.staging.values()) | set(g.ifaces)
        self.slot_info = {
            v.id: (v.stack, v.level)
            for v in g.nodes
            if v.kind is NodeKind.STACK_SLOT
        }
        self.terminals = [
            v.id
            for v in g.nodes
            if v.kind in (NodeKind.STACK_SLOT, NodeKind.TABLE, NodeKind.CONTAINER)
        ]

        self.cross_edge: dict[tuple[int, int], int] = {}
        self.stage_edge: dict[int, int] = {}
        self.agg_edge: dict[int, int] = {}
        self.fanout_edge: dict[int, int] = {}  # iface node -> edge
        self.pick_edge: dict[tuple[int, int], int] = {}  # (iface node, stack)
        self.load_edge: dict[tuple[int, int], int] = {}  # (src node, cnode)
        self.carry_edge: dict[tuple[int, int], int] = {}  # (cnode from, cnode to)
        self.unload_edge: dict[tuple[int, int], int] = {}  # (cnode, stack)
        self.up_edge: dict[tuple[int, int], int] = {}  # (stack, lower level)
        self.down_edge: dict[tuple[int, int], int] = {}
        for e in g.edges:
            if e.kind is EdgeKind.CROSS_TOP:
                u = g.node(e.tail).stack
                w = g.node(e.head).stack
                self.cross_edge[(u, w)] = e.id
            elif e.kind is EdgeKind.STAGE_SELECT:
                self.stage_edge[e.stack] = e.id
            elif e.kind is EdgeKind.TOPPLE_AGGREGATE:
                self.agg_edge[e.stack] = e.id
            elif e.kind is EdgeKind.TABLE_FANOUT:
                self.fanout_edge[e.head] = e.id
            elif e.kind is EdgeKind.TABLE_PICK:
                self.pick_edge[(e.tail, g.node(e.head).stack)] = e.id
            elif e.kind is EdgeKind.SCOOP_LOAD:
                self.load_edge[(e.tail, e.head)] = e.id
            elif e.kind is EdgeKind.SCOOP_CARRY:
                self.carry_edge[(e.tail, e.head)] = e.id
            elif e.kind is EdgeKind.SCOOP_UNLOAD:
                self.unload_edge[(e.tail, g.node(e.head).stack)] = e.id
            elif e.kind is EdgeKind.SHIFT_UP:
                self.up_edge[(e.stack, g.node(e.tail).level)] = e.id
            elif e.kind is EdgeKind.SHIFT_DOWN:
                self.down_edge[(e.stack, g.node(e.head).level)] = e.id

        self.exit_share: dict[int, int] = {}
        for s in g.top:
            share = scale  # cross or load, one unit of cost
            if s in self.agg_edge:
                agg = g.edge(self.agg_edge[s])
                share = min(share, agg.cost * scale // agg.capacity)
            self.exit_share[s] = share

        goal_ids = {obj for obj, _ in instance.goal.targets}
        goal_stacks = {
            t.stack
            for _, t in instance.goal.targets
            if hasattr(t, "stack")
        }
        self.symmetric_buffers = tuple(
            sorted(
                s.id
                for s in g.stacks
                if s.is_buffer and s.id not in goal_stacks
            )
        )
        self.goal_ids = goal_ids
        self._lb_cache: dict[tuple[int, ...], int] = {}
        self._steps_cache: dict[tuple[int, ...], int] = {}

    # ---- lower bound ----------------------------------------------------

    def state_lb(self, pos: tuple[int, ...]) -> int:
        cached = self._lb_cache.get(pos)
        if cached is None:
            cached = self._lb_cache[pos] = self._state_lb(pos)
        return cached

    def _state_lb(self, pos: tuple[int, ...]) -> int:
        g, D, L = self.g, self.dist, self.scale
        total = 0.0
        mover_floor: dict[int, int] = {}  # stack -> lowest mover level
        movers: set[int] = set()
        for obj, nodes in self.goal_map.items():
            d = min(D[pos[obj]][v] for v in nodes)
            if d == float("inf"):
                return _INF_LB
            total += d
            if d > 0:
                movers.add(obj)
                info = self.slot_info.get(pos[obj])
                if info is not None:
                    s, level = info
                    mover_floor[s] = min(mover_floor.get(s, level), level)
        for obj in range(self.num_objects):
            if obj in self.goal_map:
                continue
            if pos[obj] in self.transient:
                d = min(D[pos[obj]][v] for v in self.terminals)
                total += 0 if d == float("inf") else d
        if mover_floor:
            for obj in range(self.num_objects):
                if obj in movers:
                    continue
                info = self.slot_info.get(pos[obj])
                if info is None:
                    continue
                s, level = info
                floor = mover_floor.get(s)
                if floor is None or level <= floor:
                    continue
                total += self.exit_share[s]
                if obj in self.goal_map:
                    # settled but pinned to this chain: leave and return
                    total += L
        return int((total + L - 1) // L)

    def state_steps_lb(self, pos: tuple[int, ...]) -> int:
        cached = self._steps_cache.get(pos)
        if cached is None:
            cached = self._steps_cache[pos] = self._state_steps_lb(pos)
        return cached

    def _state_steps_lb(self, pos: tuple[int, ...]) -> int:
        """Lower bound on remaining timesteps (one macro per step).

        Each plan step has exactly one primary mover, and the primary-mover
        steps of distinct objects never coincide, so per-object needs add up
        soundly. Same mover/eviction analysis as the cost bound, in step
        units: every chain exit or re-entry is at least one owned step.
        """
        D = self.step_dist
        total = 0
        mover_floor: dict[int, int] = {}
        movers: set[int] = set()
        for obj, nodes in self.goal_map.items():
            d = min(D[pos[obj]][v] for v in nodes)
            if d == float("inf"):
                return _INF_LB
            total += int(d)
            if d > 0:
                movers.add(obj)
                info = self.slot_info.get(pos[obj])
                if info is not None:
                    s, level = info
                    mover_floor[s] = min(mover_floor.get(s, level), level)
        for obj in range(self.num_objects):
            if obj in self.goal_map:
                continue
            if pos[obj] in self.transient:
                d = min(D[pos[obj]][v] for v in self.terminals)
                total += 0 if d == float("inf") else int(d)
        if mover_floor:
            for obj in range(self.num_objects):
                if obj in movers:
                    continue
                info = self.slot_info.get(pos[obj])
                if info is None:
                    continue
                s, level = info
                floor = mover_floor.get(s)
                if floor is None or level <= floor:
                    continue
                total += 2 if obj in self.goal_map else 1
        return total


_INF_LB = 10**9


def lower_bound(instance: Instance, g: Optional[GadgetGraph] = None) -> int:
    """Admissible lower bound on plan cost from the start arrangement."""
    g = g or graph_for_instance(instance)
    ctx = _Context(instance, g)
    state = pebble_state(instance.start, g)
    pos = tuple(state[o] for o in range(g.num_objects))
    return ctx.state_lb(pos)


# ---- search ------------------------------------------------------------


class _Search:
    def __init__(
        self, instance: Instance, g: GadgetGraph, config: SolveConfig
    ):
        self.ctx = _Context(instance, g)
        self.g = g
        self.instance = instance
        self.config = config
        self.start_time = time.perf_counter()
        self.deadline = self.start_time + config.budget_ms / 1000.0
        self.nodes_expanded = 0
        self.best_cost: Optional[int] = None
        self.best_solution: Optional[FlowSolution] = None
        self.incumbents: list[Incumbent] = []
        self.trace: list[str] = []
        self.memo: dict[tuple, list[tuple[int, int]]] = {}
        self.horizons_completed = 0
        state = pebble_state(instance.start, g)
        self.start_pos = tuple(state[o] for o in range(g.num_objects))
        self.start_regions = instance.start.container_regions
        self.global_lb = self.ctx.state_lb(self.start_pos)

    def elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start_time) * 1000.0

    def _tick(self) -> None:
        self.nodes_expanded += 1
        if self.nodes_expanded % 256 == 0 and time.perf_counter() > self.deadline:
            raise _Budget()

    def _tie(self, macro: _Macro) -> int:
        key = f"{self.config.seed}:{macro.kind}:{macro.ids}".encode()
        return zlib.crc32(key)

    def _goal_ok(self, pos: tuple[int, ...]) -> bool:
        for obj, nodes in self.ctx.goal_map.items():
            if pos[obj] not in nodes:
                return False
        transient = self.ctx.transient
        return all(v not in transient for v in pos)

    # ---- state decomposition -------------------------------------------

    def _layout(self, pos: tuple[int, ...]):
        chains: dict[int, list[tuple[int, int]]] = {}
        staging: dict[int, list[int]] = {}
        table: list[int] = []
        iface: dict[int, int] = {}
        cont: dict[int, list[int]] = {}
        g = self.g
        stage_of = {v: s for s, v in g.staging.items()}
        for obj, nid in enumerate(pos):
            node = g.node(nid)
            if node.kind is NodeKind.STACK_SLOT:
                chains.setdefault(node.stack, []).append((node.level, obj))
            elif node.kind is NodeKind.TOPPLE_STAGING:
                staging.setdefault(stage_of[nid], []).append(obj)
            elif node.kind is NodeKind.TABLE:
                table.append(obj)
            elif node.kind is NodeKind.TABLE_INTERFACE:
                iface[nid] = obj
            else:
                cont.setdefault(node.container, []).append(obj)
        for members in chains.values():
            members.sort(reverse=True)
        return chains, staging, table, iface, cont

    # ---- macro enumeration -----------------------------------------------

    def _macros(
        self, pos: tuple[int, ...], regions: tuple[str, ...]
    ) -> list[_Macro]:
        ctx, g = self.ctx, self.g
        chains, staging, table, iface, cont = self._layout(pos)
        heights = {s.id: s.max_height for s in g.stacks}
        out: list[_Macro] = []

        def chain_room(s: int) -> bool:
            return len(chains.get(s, ())) < heights[s]

        def staging_empty(s: int) -> bool:
            return not staging.get(s)

        def shift_ups(s: int, below_level: int) -> list[tuple[int, int]]:
            # everything strictly below the departing top rides one rung up
            return [
                (obj, ctx.up_edge[(s, level)])
                for level, obj in chains.get(s, ())
                if level < below_level
            ]

        def shift_downs(s: int) -> list[tuple[int, int]]:
            return [
                (obj, ctx.down_edge[(s, level - 1)])
                for level, obj in chains.get(s, ())
            ]

        def dedup_targets(cands: Iterable[int]) -> list[int]:
            # interchangeable fully-empty buffers collapse to the lowest id
            kept: list[int] = []
            seen_empty_buffer = False
            for s in cands:
                empty = not chains.get(s) and staging_empty(s)
                if s in ctx.symmetric_buffers and empty:
                    if seen_empty_buffer:
                        continue
                    seen_empty_buffer = True
                kept.append(s)
            return kept

        # Fire
        for s in sorted(staging):
            members = staging[s]
            if not members:
                continue
            eid = ctx.agg_edge[s]
            if len(members) <= g.edge(eid).capacity:
                out.append(
                    _Macro(
                        "fire",
                        (s, len(members)),
                        g.edge(eid).cost,
                        tuple((o, eid) for o in sorted(members)),
                        activation=eid,
                    )
                )

        # Carry
        for c in sorted(cont):
            members = cont[c]
            if not members:
                continue
            here = g.container_node[(c, regions[c])]
            for region in g.regions:
                if region == regions[c]:
                    continue
                key = (here, g.container_node[(c, region)])
                if key not in ctx.carry_edge:
                    continue
                eid = ctx.carry_edge[key]
                out.append(
                    _Macro(
                        "carry",
                        (c, g.container_node[(c, region)]),
                        g.edge(eid).cost,
                        tuple((o, eid) for o in sorted(members)),
                        activation=eid,
                        region_update=(c, region),
                    )
                )

        # Stage
        for s in sorted(ctx.stage_edge):
            members = chains.get(s)
            if not members:
                continue
            agg_cap = g.edge(ctx.agg_edge[s]).capacity
            if len(staging.get(s, ())) >= agg_cap:
                continue  # could never discharge in full
            top_level, top_obj = members[0]
            moves = [(top_obj, ctx.stage_edge[s])] + shift_ups(s, top_level)
            out.append(_Macro("stage", (s, top_obj), 0, tuple(moves)))

        # Cross
        for u in sorted(chains):
            if not chains[u] or not staging_empty(u):
                continue
            top_level, top_obj = chains[u][0]
            targets = dedup_targets(
                w for w in heights if w != u and chain_room(w) and staging_empty(w)
            )
            for w in targets:
                eid = ctx.cross_edge[(u, w)]
                moves = (
                    [(top_obj, eid)] + shift_ups(u, top_level) + shift_downs(w)
                )
                out.append(_Macro("cross", (u, w, top_obj), 1, tuple(moves)))

        # Pick
        for nid in sorted(iface):
            obj = iface[nid]
            targets = dedup_targets(
                s for s in heights if chain_room(s) and staging_empty(s)
            )
            for s in targets:
                eid = ctx.pick_edge[(nid, s)]
                moves = [(obj, eid)] + shift_downs(s)
                out.append(_Macro("pick", (obj, s), 1, tuple(moves)))

        # Load
        for c in sorted(g.container_node.keys()):
            cid, region = c
            if region != regions[cid]:
                continue
            cnode = g.container_node[c]
            cap = g.node(cnode).capacity
            if len(cont.get(cid, ())) >= cap:
                continue
            for nid in sorted(iface):
                key = (nid, cnode)
                if key in ctx.load_edge:
                    out.append(
                        _Macro(
                            "load",
                            (iface[nid], cid),
                            1,
                            ((iface[nid], ctx.load_edge[key]),),
                        )
                    )
            for s in sorted(chains):
                if not chains[s] or not staging_empty(s):
                    continue
                key = (self.g.top[s], cnode)
                if key not in ctx.load_edge:
                    continue
                top_level, top_obj = chains[s][0]
                moves = [(top_obj, ctx.load_edge[key])] + shift_ups(s, top_level)
                out.append(_Macro("load", (top_obj, cid), 1, tuple(moves)))

        # Unload
        for cid in sorted(cont):
            if not cont[cid]:
                continue
            cnode = g.container_node[(cid, regions[cid])]
            targets = dedup_targets(
                s
                for s in heights
                if (cnode, s) in ctx.unload_edge
                and chain_room(s)
                and staging_empty(s)
            )
            for obj in sorted(cont[cid]):
                for s in targets:
                    eid = ctx.unload_edge[(cnode, s)]
                    moves = [(obj, eid)] + shift_downs(s)
                    out.append(_Macro("unload", (obj, s), 1, tuple(moves)))

        # Fanout
        free_ifaces = [nid for nid in g.ifaces if nid not in iface]
        if free_ifaces and table:
            nid = free_ifaces[0]
            for obj in sorted(table):
                out.append(
                    _Macro(
                        "fanout", (obj, nid), 0, ((obj, ctx.fanout_edge[nid]),)
                    )
                )
        return out

    @staticmethod
    def _apply(
        pos: tuple[int, ...], regions: tuple[str, ...], macro: _Macro, g: GadgetGraph
    ) -> tuple[tuple[int, ...], tuple[str, ...]]:
        nxt = list(pos)
        for obj, eid in macro.moves:
            nxt[obj] = g.edge(eid).head
        if macro.region_update is not None:
            c, region = macro.region_update
            regs = list(regions)
            regs[c] = region
            regions = tuple(regs)
        return tuple(nxt), regions

    # ---- DFS -----------------------------------------------------------

    def _record(self, cost: int, t: int, path: list[_Macro]) -> None:
        moves = []
        acts = []
        for step, macro in enumerate(path):
            for obj, eid in macro.moves:
                moves.append(FlowMove(step, obj, eid))
            if macro.activation is not None:
                acts.append((step, macro.activation))
        sol = FlowSolution(horizon=t, moves=tuple(moves), activations=tuple(acts))
        self.best_cost = cost
        self.best_solution = sol
        ms = self.elapsed_ms()
        self.incumbents.append(Incumbent(ms, cost, sol))
        self.trace.append(f"{ms:.0f} {cost} {t} {self.nodes_expanded}")
        if cost <= self.global_lb:
            raise _Stop()
        gap = self.config.optimality_gap_stop
        if gap > 0 and cost - self.global_lb <= gap * cost:
            raise _Stop()

    def _dfs(
        self,
        pos: tuple[int, ...],
        regions: tuple[str, ...],
        t: int,
        cost: int,
        T: int,
        path: list[_Macro],
    ) -> None:
        if self._goal_ok(pos):
            if self.best_cost is None or cost < self.best_cost:
                self._record(cost, t, path)
            return
        if t == T:
            return
        if t + self.ctx.state_steps_lb(pos) > T:
            return
        lb = self.ctx.state_lb(pos)
        if self.best_cost is not None and cost + lb >= self.best_cost:
            return
        key = (pos, regions)
        residual = T - t
        entries = self.memo.get(key)
        if entries is not None:
            for c0, r0 in entries:
                if c0 <= cost and r0 >= residual:
                    return
            entries[:] = [
                (c0, r0)
                for c0, r0 in entries
                if not (cost <= c0 and residual >= r0)
            ]
            entries.append((cost, residual))
        else:
            self.memo[key] = [(cost, residual)]
        self._tick()

        children = []
        for macro in self._macros(pos, regions):
            child_pos, child_regions = self._apply(pos, regions, macro, self.g)
            child_lb = self.ctx.state_lb(child_pos)
            f = cost + macro.cost + child_lb
            children.append(
                (f, _KIND_RANK[macro.kind], macro.ids, self._tie(macro),
                 macro, child_pos, child_regions)
            )
        children.sort(key=lambda item: item[:4])
        for f, _, _, _, macro, child_pos, child_regions in children:
            if self.best_cost is not None and f >= self.best_cost:
                continue
            path.append(macro)
            self._dfs(child_pos, child_regions, t + 1, cost + macro.cost, T, path)
            path.pop()

    def run(self) -> SolveResult:
        cfg = self.config
        n = self.g.num_objects
        hmin = cfg.horizon_min
        if hmin is None:
            hmin = max(
                self._auto_horizon_min(),
                self.ctx.state_steps_lb(self.start_pos),
            )
            if hmin >= _INF_LB:
                hmin = 0  # unreachable; let the sweep report infeasibility
        hmax_complete = 4 * n + len(self.g.stacks) + 8
        hmax = cfg.horizon_max if cfg.horizon_max is not None else hmax_complete

        budget_hit = False
        try:
            if hmax > hmin:
                self._probe(hmax)
            for T in range(hmin, hmax + 1):
                self._dfs(self.start_pos, self.start_regions, 0, 0, T, [])
                self.horizons_completed += 1
        except _Budget:
            budget_hit = True
        except _Stop:
            pass

        if self.best_solution is not None:
            # Exhausting a caller-truncated horizon range proves optimality
            # only among schedules that fit it, so the global claim needs
            # either the lower bound or the full completeness range.
            full_range = (
                not budget_hit
                and self.horizons_completed == max(0, hmax - hmin + 1)
            )
            proved = self.best_cost <= self.global_lb or (
                full_range and hmax >= hmax_complete
            )
            status = (
                SolveStatus.OPTIMAL
                if proved
                else SolveStatus.FEASIBLE_BUDGET_EXHAUSTED
            )
        else:
            status = (
                SolveStatus.NO_SOLUTION_IN_BUDGET
                if budget_hit
                else SolveStatus.INFEASIBLE_UP_TO_HORIZON
            )
        return SolveResult(
            status=status,
            solution=self.best_solution,
            objective=self.best_cost,
            lower_bound=self.global_lb,
            nodes_expanded=self.nodes_expanded,
            elapsed_ms=self.elapsed_ms(),
            incumbents=tuple(self.incumbents),
            trace=tuple(self.trace),
            horizons_completed=self.horizons_completed,
        )

    def _probe(self, T: int) -> None:
        """Capped greedy dives at the loosest horizon to seed an incumbent.

        The sweep proper visits small horizons first, which keeps per-horizon
        trees small but can burn the whole budget proving that no solution
        fits. A greedy best-first pass usually lands a feasible (rarely good)
        plan within milliseconds, and its cost then bounds every horizon of
        the sweep. The first pass allows only top-to-top moves, whose small
        space either yields a plan almost immediately or dead-ends at once
        (no spare slot anywhere); the unrestricted pass runs only when that
        fails.
        """
        for cross_only, cap in ((True, _PROBE_CROSS_CAP), (False, _PROBE_FULL_CAP)):
            if self.best_solution is None:
                self._probe_dive(T, cross_only, cap)

    def _probe_dive(self, T: int, cross_only: bool, cap: int) -> None:
        # Entries hold (pos, regions, cost, t, parent index, arriving macro);
        # the heap orders open entries by remaining-step estimate, then
        # accumulated-plus-remaining cost, then insertion order. Re-expansion
        # is not worth bookkeeping here: first arrival wins, the sweep
        # refines costs later.
        entries: list[tuple] = []
        heap: list[tuple[int, int, int]] = []
        seen = {(self.start_pos, self.start_regions)}

        def push(
            pos: tuple[int, ...],
            regions: tuple[str, ...],
            cost: int,
            t: int,
            parent: Optional[int],
            macro: Optional[_Macro],
        ) -> None:
            steps = self.ctx.state_steps_lb(pos)
            if t + steps > T:
                return
            f = cost + self.ctx.state_lb(pos)
            entries.append((pos, regions, cost, t, parent, macro))
            heappush(heap, (steps, f, len(entries) - 1))

        push(self.start_pos, self.start_regions, 0, 0, None, None)
        popped = 0
        while heap and popped < cap:
            popped += 1
            self.nodes_expanded += 1
            if self.nodes_expanded % 256 == 0:
                if time.perf_counter() > self.deadline:
                    raise _Budget()
            _, _, idx = heappop(heap)
            pos, regions, cost, t, _, _ = entries[idx]
            if self._goal_ok(pos):
                path = []
                walk: Optional[int] = idx
                while walk is not None:
                    entry = entries[walk]
                    if entry[5] is not None:
                        path.append(entry[5])
                    walk = entry[4]
                path.reverse()
                self._record(cost, t, path)
                return
            if t == T:
                continue
            for macro in self._macros(pos, regions):
                if cross_only and macro.kind != "cross":
                    continue
                child = self._apply(pos, regions, macro, self.g)
                if child in seen:
                    continue
                seen.add(child)
                push(child[0], child[1], cost + macro.cost, t + 1, idx, macro)

    def _auto_horizon_min(self) -> int:
        """Max over constrained objects of unweighted hop distance to goal."""
        g = self.g
        best = 0
        for obj, nodes in self.ctx.goal_map.items():
            src = self.start_pos[obj]
            if src in nodes:
                continue
            seen = {src}
            frontier = [src]
            hops = 0
            found = None
            while frontier and found is None:
                hops += 1
                nxt: list[int] = []
                for v in frontier:
                    for eid in g.out_edges[v]:
                        head = g.edge(eid).head
                        if head in seen:
                            continue
                        if head in nodes:
                            found = hops
                            break
                        seen.add(head)
                        nxt.append(head)
                    if found is not None:
                        break
                frontier = nxt
            if found is not None:
                best = max(best, found)
        return best


def solve_anytime(
    instance: Instance,
    graph: Optional[GadgetGraph] = None,
    config: SolveConfig = SolveConfig(),
) -> SolveResult:
    """Plan on the flow model; anytime incumbents, exact on completion."""
    g = graph or graph_for_instance(instance)
    return _Search(instance, g, config).run()
