"""Time-expanded multi-commodity flow over a gadget graph.

Objects are unit commodities routed through T copies of the graph. Unit
edges carry one object per step at their stated cost; aggregate edges
(topples, scoop carries) charge their cost once per activation and move up
to their capacity in the same step. Waiting is free.

Constraint families (the names reappear as LP row prefixes):

  c1  conservation between consecutive time layers
  c2  start fixing at t = 0
  c3  terminal pins: goal objects at goal nodes, staging and interface
      nodes empty at the horizon
  c4  node capacities at every integer time
  c5  unit edge capacities
  c6  aggregate ridership bounded by capacity times activation
  c7  full discharge: nobody waits at an aggregate tail while it fires
  c8  at most one activation per step, pooled over all aggregate edges
  c9  no external arrivals into a stack chain while its staging holds
      anything (one linear row per witness object)
  c9b the same gate for external departures, staging selection exempt
  c10 a shift rung never runs both directions in one step
  c11 arrival gating on unit nodes and containers: non-shift arrivals plus
      occupancy minus shift departures stays within capacity, which bans
      same-step handoffs (follow/swap churn) while still allowing a
      placement to push the resident down in one step

Occupancy at time t < T is wait-plus-departures; at the horizon it is the
final wait layer. Terminal pins place a stack target at the slot implied by
its above count, which is exact for top placements (above == 0) and for
fully specified stacks; generators and the bundled demos only produce those
goal classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .domain import (
    InContainer,
    Instance,
    InvalidInstance,
    OnStack,
    OnTable,
)
from .gadget import EdgeKind, GadgetGraph, NodeKind, pebble_state

Row = tuple[str, list[tuple[str, int]], str, int]  # name, terms, sense, rhs


@dataclass(frozen=True)
class FlowMove:
    """One object traversing one edge during step t -> t+1."""

    t: int
    obj: int
    edge: int


@dataclass(frozen=True)
class FlowSolution:
    """Sparse integral solution: moves plus aggregate activations."""

    horizon: int
    moves: tuple[FlowMove, ...] = ()
    activations: tuple[tuple[int, int], ...] = ()  # (t, edge)

    def moves_at(self, t: int) -> tuple[FlowMove, ...]:
        return tuple(m for m in self.moves if m.t == t)

    def activations_at(self, t: int) -> tuple[int, ...]:
        return tuple(e for (tt, e) in self.activations if tt == t)

    def objective(self, g: GadgetGraph) -> int:
        total = 0
        for m in self.moves:
            e = g.edge(m.edge)
            if not e.is_aggregate:
                total += e.cost
        for _, eid in self.activations:
            total += g.edge(eid).cost
        return total

    def replay(self, g: GadgetGraph, start: dict[int, int]) -> list[dict[int, int]]:
        """Positions at each integer time 0..horizon; raises on incoherence."""
        positions = [dict(start)]
        cur = dict(start)
        by_t: dict[int, list[FlowMove]] = {}
        for m in self.moves:
            by_t.setdefault(m.t, []).append(m)
        for t in range(self.horizon):
            nxt = dict(cur)
            seen: set[int] = set()
            for m in by_t.get(t, ()):
                e = g.edge(m.edge)
                if m.obj in seen:
                    raise InvalidFlow(f"object {m.obj} moves twice at t={t}")
                if cur.get(m.obj) != e.tail:
                    raise InvalidFlow(
                        f"object {m.obj} not at tail of edge {m.edge} at t={t}"
                    )
                seen.add(m.obj)
                nxt[m.obj] = e.head
            cur = nxt
            positions.append(dict(cur))
        return positions


class InvalidFlow(ValueError):
    """A flow solution that does not replay coherently."""


def goal_nodes(instance: Instance, g: GadgetGraph) -> dict[int, tuple[int, ...]]:
    """Admissible terminal nodes per goal-constrained object."""
    out: dict[int, tuple[int, ...]] = {}
    for obj, target in instance.goal.targets:
        if isinstance(target, OnStack):
            spec = instance.stack_spec(target.stack)
            level = spec.max_height - target.above
            if level < 1:
                raise InvalidInstance(
                    f"goal for object {obj} deeper than stack {target.stack}"
                )
            out[obj] = (g.slot[(target.stack, level)],)
        elif isinstance(target, OnTable):
            if g.table is None:
                raise InvalidInstance("table goal without a table node")
            out[obj] = (g.table,)
        elif isinstance(target, InContainer):
            nodes = tuple(
                nid
                for (cid, _), nid in sorted(g.container_node.items())
                if cid == target.container
            )
            if not nodes:
                raise InvalidInstance(
                    f"container goal without container {target.container}"
                )
            out[obj] = nodes
    return out


@dataclass
class FlowModel:
    """Variable layout and row generators for one (instance, graph, T)."""

    instance: Instance
    graph: GadgetGraph
    horizon: int
    start: dict[int, int] = field(default_factory=dict)
    goals: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.horizon < 0:
            raise InvalidInstance("negative horizon")
        if not self.start:
            self.start = pebble_state(self.instance.start, self.graph)
        if not self.goals:
            self.goals = goal_nodes(self.instance, self.graph)

    # ---- variable names ------------------------------------------------

    @staticmethod
    def x_name(obj: int, edge: int, t: int) -> str:
        return f"x_o{obj}_e{edge}_t{t}"

    @staticmethod
    def w_name(obj: int, node: int, t: int) -> str:
        return f"w_o{obj}_v{node}_t{t}"

    @staticmethod
    def y_name(edge: int, t: int) -> str:
        return f"y_e{edge}_t{t}"

    def variables(self) -> Iterator[str]:
        g, T = self.graph, self.horizon
        n = g.num_objects
        for o in range(n):
            for e in g.edges:
                for t in range(T):
                    yield self.x_name(o, e.id, t)
        for o in range(n):
            for v in g.nodes:
                for t in range(T + 1):
                    yield self.w_name(o, v.id, t)
        for e in g.aggregate_edges():
            for t in range(T):
                yield self.y_name(e.id, t)

    def objective_terms(self) -> Iterator[tuple[str, int]]:
        g, T = self.graph, self.horizon
        for o in range(g.num_objects):
            for e in g.edges:
                if e.cost and not e.is_aggregate:
                    for t in range(T):
                        yield self.x_name(o, e.id, t), e.cost
        for e in g.aggregate_edges():
            for t in range(T):
                yield self.y_name(e.id, t), e.cost

    # ---- occupancy building blocks --------------------------------------

    def _occ_terms(self, obj: int, node: int, t: int) -> list[tuple[str, int]]:
        """Presence of obj at node at time t as variable terms."""
        g, T = self.graph, self.horizon
        if t == T:
            return [(self.w_name(obj, node, T), 1)]
        terms = [(self.w_name(obj, node, t), 1)]
        for eid in g.out_edges[node]:
            terms.append((self.x_name(obj, eid, t), 1))
        return terms

    # ---- row generators --------------------------------------------------

    def rows(self) -> Iterator[Row]:
        yield from self.conservation_rows()
        yield from self.terminal_rows()
        yield from self.node_capacity_rows()
        yield from self.edge_capacity_rows()
        yield from self.activation_rows()
        yield from self.discharge_rows()
        yield from self.exclusivity_rows()
        yield from self.quiet_staging_rows()
        yield from self.rung_swap_rows()
        yield from self.arrival_gate_rows()

    def conservation_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for o in range(g.num_objects):
            for v in g.nodes:
                at_start = 1 if self.start.get(o) == v.id else 0
                if T == 0:
                    yield (
                        f"c2_start_o{o}_v{v.id}",
                        [(self.w_name(o, v.id, 0), 1)],
                        "=",
                        at_start,
                    )
                    continue
                for t in range(T):
                    terms = [(self.w_name(o, v.id, t), 1)]
                    for eid in g.out_edges[v.id]:
                        terms.append((self.x_name(o, eid, t), 1))
                    if t == 0:
                        yield (f"c2_start_o{o}_v{v.id}", terms, "=", at_start)
                    else:
                        terms.append((self.w_name(o, v.id, t - 1), -1))
                        for eid in g.in_edges[v.id]:
                            terms.append((self.x_name(o, eid, t - 1), -1))
                        yield (f"c1_flow_o{o}_v{v.id}_t{t}", terms, "=", 0)
                terms = [(self.w_name(o, v.id, T), 1)]
                terms.append((self.w_name(o, v.id, T - 1), -1))
                for eid in g.in_edges[v.id]:
                    terms.append((self.x_name(o, eid, T - 1), -1))
                yield (f"c1_flow_o{o}_v{v.id}_t{T}", terms, "=", 0)

    def terminal_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for o in sorted(self.goals):
            terms = [(self.w_name(o, nid, T), 1) for nid in self.goals[o]]
            yield (f"c3_goal_o{o}", terms, "=", 1)
        for v in g.nodes:
            if v.kind in (NodeKind.TOPPLE_STAGING, NodeKind.TABLE_INTERFACE):
                terms = [
                    (self.w_name(o, v.id, T), 1) for o in range(g.num_objects)
                ]
                yield (f"c3_clear_v{v.id}", terms, "=", 0)

    def node_capacity_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for v in g.nodes:
            for t in range(T + 1):
                terms: list[tuple[str, int]] = []
                for o in range(g.num_objects):
                    terms.extend(self._occ_terms(o, v.id, t))
                yield (f"c4_cap_v{v.id}_t{t}", terms, "<=", v.capacity)

    def edge_capacity_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for e in g.edges:
            if e.is_aggregate:
                continue
            for t in range(T):
                terms = [
                    (self.x_name(o, e.id, t), 1) for o in range(g.num_objects)
                ]
                yield (f"c5_edge_e{e.id}_t{t}", terms, "<=", e.capacity)

    def activation_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for e in g.aggregate_edges():
            for t in range(T):
                terms = [
                    (self.x_name(o, e.id, t), 1) for o in range(g.num_objects)
                ]
                terms.append((self.y_name(e.id, t), -e.capacity))
                yield (f"c6_agg_e{e.id}_t{t}", terms, "<=", 0)

    def discharge_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for e in g.aggregate_edges():
            for t in range(T):
                for o in range(g.num_objects):
                    yield (
                        f"c7_flush_e{e.id}_o{o}_t{t}",
                        [
                            (self.w_name(o, e.tail, t), 1),
                            (self.y_name(e.id, t), 1),
                        ],
                        "<=",
                        1,
                    )

    def exclusivity_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        aggs = g.aggregate_edges()
        if not aggs:
            return
        for t in range(T):
            terms = [(self.y_name(e.id, t), 1) for e in aggs]
            yield (f"c8_one_agg_t{t}", terms, "<=", 1)

    def _external_edges(self, stack: int) -> tuple[list[int], list[int]]:
        """Non-shift edges touching a stack's top from outside the chain."""
        g = self.graph
        top = g.top[stack]
        into = [
            eid
            for eid in g.in_edges[top]
            if g.edge(eid).kind
            in (EdgeKind.CROSS_TOP, EdgeKind.TABLE_PICK, EdgeKind.SCOOP_UNLOAD)
        ]
        out = [
            eid
            for eid in g.out_edges[top]
            if g.edge(eid).kind in (EdgeKind.CROSS_TOP, EdgeKind.SCOOP_LOAD)
        ]
        return into, out

    def quiet_staging_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        n = g.num_objects
        for s, stage in sorted(g.staging.items()):
            into, out = self._external_edges(s)
            for t in range(T):
                arr_terms = [
                    (self.x_name(o, eid, t), 1) for o in range(n) for eid in into
                ]
                dep_terms = [
                    (self.x_name(o, eid, t), 1) for o in range(n) for eid in out
                ]
                for witness in range(n):
                    occ = [
                        (name, n * coef)
                        for name, coef in self._occ_terms(witness, stage, t)
                    ]
                    if arr_terms:
                        yield (
                            f"c9_quiet_in_s{s}_o{witness}_t{t}",
                            arr_terms + occ,
                            "<=",
                            n,
                        )
                    if dep_terms:
                        yield (
                            f"c9b_quiet_out_s{s}_o{witness}_t{t}",
                            dep_terms + occ,
                            "<=",
                            n,
                        )

    def rung_swap_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        ups: dict[tuple[int, int], int] = {}
        downs: dict[tuple[int, int], int] = {}
        for e in g.edges:
            if e.kind is EdgeKind.SHIFT_UP:
                ups[(e.stack, g.node(e.tail).level)] = e.id
            elif e.kind is EdgeKind.SHIFT_DOWN:
                downs[(e.stack, g.node(e.head).level)] = e.id
        for key in sorted(ups):
            up, down = ups[key], downs[key]
            s, level = key
            for t in range(T):
                terms = [
                    (self.x_name(o, up, t), 1) for o in range(g.num_objects)
                ] + [(self.x_name(o, down, t), 1) for o in range(g.num_objects)]
                yield (f"c10_rung_s{s}_l{level}_t{t}", terms, "<=", 1)

    def arrival_gate_rows(self) -> Iterator[Row]:
        g, T = self.graph, self.horizon
        for v in g.nodes:
            if v.kind is NodeKind.CONTAINER:
                pass
            elif v.capacity != 1:
                continue
            nonshift_in = [
                eid for eid in g.in_edges[v.id] if not g.edge(eid).is_shift
            ]
            if not nonshift_in:
                continue
            nonshift_out = [
                eid for eid in g.out_edges[v.id] if not g.edge(eid).is_shift
            ]
            for t in range(T):
                terms: list[tuple[str, int]] = []
                for o in range(g.num_objects):
                    for eid in nonshift_in:
                        terms.append((self.x_name(o, eid, t), 1))
                    terms.append((self.w_name(o, v.id, t), 1))
                    for eid in nonshift_out:
                        terms.append((self.x_name(o, eid, t), 1))
                yield (f"c11_gate_v{v.id}_t{t}", terms, "<=", v.capacity)

    def stats(self) -> dict[str, int]:
        g, T = self.graph, self.horizon
        n = g.num_objects
        num_x = n * len(g.edges) * T
        num_w = n * len(g.nodes) * (T + 1)
        num_y = len(g.aggregate_edges()) * T
        num_rows = sum(1 for _ in self.rows())
        return {
            "horizon": T,
            "objects": n,
            "nodes": len(g.nodes),
            "edges": len(g.edges),
            "x_vars": num_x,
            "w_vars": num_w,
            "y_vars": num_y,
            "rows": num_rows,
        }


def build_model(instance: Instance, g: GadgetGraph, horizon: int) -> FlowModel:
    return FlowModel(instance=instance, graph=g, horizon=horizon)


# ---- independent semantic check -------------------------------------------


def check_solution(
    instance: Instance,
    g: GadgetGraph,
    sol: FlowSolution,
    start: Optional[dict[int, int]] = None,
) -> list[str]:
    """Replay a solution against every constraint family; [] means valid.

    This is a from-scratch semantic check, deliberately not sharing code
    with the row generators, so model bugs and solver bugs cannot cancel.
    """
    problems: list[str] = []
    T = sol.horizon
    if start is None:
        start = pebble_state(instance.start, g)
    try:
        positions = sol.replay(g, start)
    except InvalidFlow as exc:
        return [str(exc)]

    by_t: dict[int, list[FlowMove]] = {}
    for m in sol.moves:
        if not 0 <= m.t < T:
            problems.append(f"move at t={m.t} outside horizon {T}")
            return problems
        by_t.setdefault(m.t, []).append(m)
    act_by_t: dict[int, list[int]] = {}
    for t, eid in sol.activations:
        if not 0 <= t < T:
            problems.append(f"activation at t={t} outside horizon {T}")
            return problems
        act_by_t.setdefault(t, []).append(eid)

    staging_ids = set(g.staging.values())
    iface_ids = set(g.ifaces)

    for t in range(T):
        here = positions[t]
        moves = by_t.get(t, ())
        acts = act_by_t.get(t, ())

        # c8 pooled exclusivity
        if len(acts) > 1:
            problems.append(f"t={t}: {len(acts)} aggregate activations")
        for eid in acts:
            if not g.edge(eid).is_aggregate:
                problems.append(f"t={t}: activation on non-aggregate edge {eid}")

        # c5/c6: per-edge loads
        load: dict[int, int] = {}
        for m in moves:
            load[m.edge] = load.get(m.edge, 0) + 1
        for eid, cnt in sorted(load.items()):
            e = g.edge(eid)
            if e.is_aggregate:
                if eid not in acts:
                    problems.append(f"t={t}: riders on dormant aggregate {eid}")
                if cnt > e.capacity:
                    problems.append(
                        f"t={t}: {cnt} riders exceed capacity {e.capacity} on {eid}"
                    )
            elif cnt > e.capacity:
                problems.append(f"t={t}: unit edge {eid} carries {cnt}")

        # c7: full discharge at firing tails
        for eid in acts:
            tail = g.edge(eid).tail
            riders = {m.obj for m in moves if m.edge == eid}
            present = {o for o, v in here.items() if v == tail}
            left_behind = present - riders
            # anything not riding must leave some other way this step
            for o in sorted(left_behind):
                departed = any(
                    m.obj == o and g.edge(m.edge).tail == tail for m in moves
                )
                if not departed:
                    problems.append(
                        f"t={t}: object {o} waits at firing aggregate tail {tail}"
                    )

        # c9/c9b: quiet chains while staging holds anything
        for s, stage in sorted(g.staging.items()):
            occupied = any(v == stage for v in here.values())
            if not occupied:
                continue
            top = g.top[s]
            for m in moves:
                e = g.edge(m.edge)
                if e.head == top and e.kind in (
                    EdgeKind.CROSS_TOP,
                    EdgeKind.TABLE_PICK,
                    EdgeKind.SCOOP_UNLOAD,
                ):
                    problems.append(
                        f"t={t}: arrival into stack {s} while staging occupied"
                    )
                if e.tail == top and e.kind in (
                    EdgeKind.CROSS_TOP,
                    EdgeKind.SCOOP_LOAD,
                ):
                    problems.append(
                        f"t={t}: departure from stack {s} while staging occupied"
                    )

        # c10: no rung runs both ways
        rungs: dict[tuple[int, int, EdgeKind], int] = {}
        for m in moves:
            e = g.edge(m.edge)
            if e.is_shift:
                low = min(g.node(e.tail).level, g.node(e.head).level)
                rungs[(e.stack, low, e.kind)] = 1
        for s, low, kind in list(rungs):
            other = (
                EdgeKind.SHIFT_DOWN if kind is EdgeKind.SHIFT_UP else EdgeKind.SHIFT_UP
            )
            if (s, low, other) in rungs and kind is EdgeKind.SHIFT_UP:
                problems.append(f"t={t}: rung (stack {s}, level {low}) swaps")

        # c11: arrival gating
        gate_nodes = [
            v
            for v in g.nodes
            if (v.capacity == 1 or v.kind is NodeKind.CONTAINER)
            and any(not g.edge(eid).is_shift for eid in g.in_edges[v.id])
        ]
        for v in gate_nodes:
            arrivals = sum(
                1
                for m in moves
                if g.edge(m.edge).head == v.id and not g.edge(m.edge).is_shift
            )
            occ = sum(1 for val in here.values() if val == v.id)
            shift_dep = sum(
                1
                for m in moves
                if g.edge(m.edge).tail == v.id and g.edge(m.edge).is_shift
            )
            if arrivals + occ - shift_dep > v.capacity:
                problems.append(
                    f"t={t}: node {v.id} gate {arrivals}+{occ}-{shift_dep}"
                    f" exceeds {v.capacity}"
                )

    # c4 node capacities at every time, using replayed positions
    for t, here in enumerate(positions):
        counts: dict[int, int] = {}
        for v in here.values():
            counts[v] = counts.get(v, 0) + 1
        for nid, cnt in sorted(counts.items()):
            if cnt > g.node(nid).capacity:
                problems.append(f"t={t}: node {nid} holds {cnt}")

    # c3 terminal pins
    final = positions[T]
    for obj, nodes in sorted(goal_nodes(instance, g).items()):
        if final.get(obj) not in nodes:
            problems.append(f"goal object {obj} ends at node {final.get(obj)}")
    for o, v in sorted(final.items()):
        if v in staging_ids or v in iface_ids:
            problems.append(f"object {o} ends at transient node {v}")

    return problems
