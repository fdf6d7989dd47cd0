"""Capacitated gadget graphs that encode rearrangement as pebble motion.

Each stack becomes a chain of capacity-1 slot nodes whose top node carries all
inter-stack edges, so a stack's occupants anchor at the top: an object with k
objects above it sits at level h - k. Zero-cost shift edges run both ways
inside a chain (placements bury earlier arrivals by pushing them down). The
topple extension adds a per-stack staging node, a shared table node with an
aggregate edge per stack (one activation moves up to cap objects for one unit
of cost), and per-object table interface nodes for grounded picks. The scoop
extension attaches capacity-bounded container nodes per region with aggregate
carry edges between regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .domain import (
    ActionOptions,
    Arrangement,
    ContainerSpec,
    InContainer,
    Instance,
    InvalidInstance,
    OnStack,
    OnTable,
    StackSpec,
)


class HeightOverflow(InvalidInstance):
    """An arrangement does not fit the declared stack heights."""


class NodeKind(Enum):
    STACK_SLOT = "stack_slot"
    TOPPLE_STAGING = "topple_staging"
    TABLE = "table"
    TABLE_INTERFACE = "table_interface"
    CONTAINER = "container"


class EdgeKind(Enum):
    SHIFT_UP = "shift_up"
    SHIFT_DOWN = "shift_down"
    CROSS_TOP = "cross_top"
    STAGE_SELECT = "stage_select"
    TOPPLE_AGGREGATE = "topple_aggregate"
    TABLE_FANOUT = "table_fanout"
    TABLE_PICK = "table_pick"
    SCOOP_LOAD = "scoop_load"
    SCOOP_CARRY = "scoop_carry"
    SCOOP_UNLOAD = "scoop_unload"


AGGREGATE_KINDS = (EdgeKind.TOPPLE_AGGREGATE, EdgeKind.SCOOP_CARRY)
SHIFT_KINDS = (EdgeKind.SHIFT_UP, EdgeKind.SHIFT_DOWN)


@dataclass(frozen=True)
class GadgetNode:
    id: int
    kind: NodeKind
    capacity: int
    stack: Optional[int] = None
    level: Optional[int] = None
    iface: Optional[int] = None
    container: Optional[int] = None
    region: Optional[str] = None

    def label(self) -> str:
        if self.kind is NodeKind.STACK_SLOT:
            return f"s{self.stack}l{self.level}"
        if self.kind is NodeKind.TOPPLE_STAGING:
            return f"stage{self.stack}"
        if self.kind is NodeKind.TABLE:
            return "table"
        if self.kind is NodeKind.TABLE_INTERFACE:
            return f"iface{self.iface}"
        return f"cont{self.container}@{self.region}"


@dataclass(frozen=True)
class GadgetEdge:
    id: int
    kind: EdgeKind
    tail: int
    head: int
    cost: int
    capacity: int
    stack: Optional[int] = None  # owning stack for stage/aggregate edges
    container: Optional[int] = None

    @property
    def is_aggregate(self) -> bool:
        return self.kind in AGGREGATE_KINDS

    @property
    def is_shift(self) -> bool:
        return self.kind in SHIFT_KINDS


@dataclass
class GadgetGraph:
    nodes: tuple[GadgetNode, ...]
    edges: tuple[GadgetEdge, ...]
    num_objects: int
    stacks: tuple[StackSpec, ...]
    options: ActionOptions
    containers: tuple[ContainerSpec, ...] = ()
    regions: tuple[str, ...] = ()

    slot: dict[tuple[int, int], int] = field(default_factory=dict)
    top: dict[int, int] = field(default_factory=dict)
    staging: dict[int, int] = field(default_factory=dict)
    table: Optional[int] = None
    ifaces: tuple[int, ...] = ()
    container_node: dict[tuple[int, str], int] = field(default_factory=dict)
    out_edges: dict[int, tuple[int, ...]] = field(default_factory=dict)
    in_edges: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def node(self, node_id: int) -> GadgetNode:
        return self.nodes[node_id]

    def edge(self, edge_id: int) -> GadgetEdge:
        return self.edges[edge_id]

    def aggregate_edges(self) -> tuple[GadgetEdge, ...]:
        return tuple(e for e in self.edges if e.is_aggregate)

    def finalize(self) -> "GadgetGraph":
        out: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        inc: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out[e.tail].append(e.id)
            inc[e.head].append(e.id)
        self.out_edges = {k: tuple(v) for k, v in out.items()}
        self.in_edges = {k: tuple(v) for k, v in inc.items()}
        return self


def build_pick_place_graph(
    stacks: Iterable[StackSpec], num_objects: int
) -> GadgetGraph:
    """Pick-and-place wiring only: shift chains plus top-to-top cross edges."""
    stacks = tuple(stacks)
    nodes: list[GadgetNode] = []
    edges: list[GadgetEdge] = []
    slot: dict[tuple[int, int], int] = {}
    top: dict[int, int] = {}

    for s in stacks:
        for level in range(1, s.max_height + 1):
            nid = len(nodes)
            nodes.append(
                GadgetNode(nid, NodeKind.STACK_SLOT, 1, stack=s.id, level=level)
            )
            slot[(s.id, level)] = nid
        top[s.id] = slot[(s.id, s.max_height)]

    for s in stacks:
        for level in range(1, s.max_height):
            lo, hi = slot[(s.id, level)], slot[(s.id, level + 1)]
            edges.append(
                GadgetEdge(len(edges), EdgeKind.SHIFT_UP, lo, hi, 0, 1, stack=s.id)
            )
            edges.append(
                GadgetEdge(len(edges), EdgeKind.SHIFT_DOWN, hi, lo, 0, 1, stack=s.id)
            )
    for u in stacks:
        for w in stacks:
            if u.id != w.id:
                edges.append(
                    GadgetEdge(
                        len(edges), EdgeKind.CROSS_TOP, top[u.id], top[w.id], 1, 1
                    )
                )

    g = GadgetGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        num_objects=num_objects,
        stacks=stacks,
        options=ActionOptions(topple=False, scoop=False),
        regions=tuple(dict.fromkeys(s.region for s in stacks)),
        slot=slot,
        top=top,
    )
    return g.finalize()


def build_topple_graph(
    stacks: Iterable[StackSpec],
    num_objects: int,
    options: ActionOptions = ActionOptions(),
    containers: Iterable[ContainerSpec] = (),
) -> GadgetGraph:
    """Full wiring: pick-and-place plus topple staging/table, plus scoop."""
    stacks = tuple(stacks)
    containers = tuple(containers) if options.scoop else ()
    base = build_pick_place_graph(stacks, num_objects)
    nodes = list(base.nodes)
    edges = list(base.edges)
    slot = dict(base.slot)
    top = dict(base.top)
    staging: dict[int, int] = {}
    container_node: dict[tuple[int, str], int] = {}

    cap = num_objects
    if options.max_topple is not None:
        cap = max(1, min(cap, options.max_topple))

    table_id: Optional[int] = None
    ifaces: list[int] = []
    if options.topple or options.scoop:
        if options.topple:
            for s in stacks:
                nid = len(nodes)
                nodes.append(
                    GadgetNode(
                        nid, NodeKind.TOPPLE_STAGING, num_objects, stack=s.id
                    )
                )
                staging[s.id] = nid
        table_id = len(nodes)
        nodes.append(GadgetNode(table_id, NodeKind.TABLE, num_objects))
        for i in range(num_objects):
            nid = len(nodes)
            nodes.append(GadgetNode(nid, NodeKind.TABLE_INTERFACE, 1, iface=i))
            ifaces.append(nid)

        if options.topple:
            for s in stacks:
                edges.append(
                    GadgetEdge(
                        len(edges),
                        EdgeKind.STAGE_SELECT,
                        top[s.id],
                        staging[s.id],
                        0,
                        1,
                        stack=s.id,
                    )
                )
            for s in stacks:
                edges.append(
                    GadgetEdge(
                        len(edges),
                        EdgeKind.TOPPLE_AGGREGATE,
                        staging[s.id],
                        table_id,
                        1,
                        cap,
                        stack=s.id,
                    )
                )
        for i, nid in enumerate(ifaces):
            edges.append(
                GadgetEdge(len(edges), EdgeKind.TABLE_FANOUT, table_id, nid, 0, 1)
            )
        for nid in ifaces:
            for s in stacks:
                edges.append(
                    GadgetEdge(
                        len(edges), EdgeKind.TABLE_PICK, nid, top[s.id], 1, 1
                    )
                )

    regions = tuple(
        dict.fromkeys(
            [s.region for s in stacks] + [c.region for c in containers]
        )
    )
    if containers:
        for c in containers:
            for region in regions:
                nid = len(nodes)
                nodes.append(
                    GadgetNode(
                        nid,
                        NodeKind.CONTAINER,
                        c.capacity,
                        container=c.id,
                        region=region,
                    )
                )
                container_node[(c.id, region)] = nid
        for c in containers:
            for region in regions:
                cnode = container_node[(c.id, region)]
                for nid in ifaces:
                    edges.append(
                        GadgetEdge(
                            len(edges),
                            EdgeKind.SCOOP_LOAD,
                            nid,
                            cnode,
                            1,
                            1,
                            container=c.id,
                        )
                    )
                for s in stacks:
                    if s.region == region:
                        edges.append(
                            GadgetEdge(
                                len(edges),
                                EdgeKind.SCOOP_LOAD,
                                top[s.id],
                                cnode,
                                1,
                                1,
                                container=c.id,
                            )
                        )
        for c in containers:
            for r1 in regions:
                for r2 in regions:
                    if r1 != r2:
                        edges.append(
                            GadgetEdge(
                                len(edges),
                                EdgeKind.SCOOP_CARRY,
                                container_node[(c.id, r1)],
                                container_node[(c.id, r2)],
                                1,
                                c.capacity,
                                container=c.id,
                            )
                        )
        for c in containers:
            for region in regions:
                cnode = container_node[(c.id, region)]
                for s in stacks:
                    if s.region == region:
                        edges.append(
                            GadgetEdge(
                                len(edges),
                                EdgeKind.SCOOP_UNLOAD,
                                cnode,
                                top[s.id],
                                1,
                                1,
                                container=c.id,
                            )
                        )

    g = GadgetGraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        num_objects=num_objects,
        stacks=stacks,
        options=options,
        containers=containers,
        regions=regions,
        slot=slot,
        top=top,
        staging=staging,
        table=table_id,
        ifaces=tuple(ifaces),
        container_node=container_node,
    )
    return g.finalize()


def graph_for_instance(instance: Instance) -> GadgetGraph:
    """The gadget graph matching the instance's action options."""
    if instance.options.topple or instance.options.scoop:
        return build_topple_graph(
            instance.all_stacks,
            instance.num_objects,
            instance.options,
            instance.containers,
        )
    return build_pick_place_graph(instance.all_stacks, instance.num_objects)


def pebble_state(arr: Arrangement, g: GadgetGraph) -> dict[int, int]:
    """Map each object to its gadget node for a canonical arrangement."""
    heights = {s.id: s.max_height for s in g.stacks}
    mapping: dict[int, int] = {}
    for obj, loc in enumerate(arr.locations):
        if isinstance(loc, OnStack):
            h = heights.get(loc.stack)
            if h is None:
                raise InvalidInstance(f"object {obj} on unknown stack {loc.stack}")
            level = h - loc.above
            if level < 1:
                raise HeightOverflow(
                    f"object {obj} at depth {loc.above} on stack {loc.stack} (h={h})"
                )
            mapping[obj] = g.slot[(loc.stack, level)]
        elif isinstance(loc, OnTable):
            if g.table is None:
                raise InvalidInstance("arrangement uses the table but graph has none")
            mapping[obj] = g.table
        elif isinstance(loc, InContainer):
            region = arr.container_regions[loc.container]
            key = (loc.container, region)
            if key not in g.container_node:
                raise InvalidInstance(f"graph has no node for container {key}")
            mapping[obj] = g.container_node[key]
    return mapping


def arrangement_from_pebble_state(
    g: GadgetGraph,
    mapping: dict[int, int],
    container_regions: tuple[str, ...] = (),
) -> Arrangement:
    """Inverse of pebble_state for canonical configurations (test helper)."""
    locs: list = [None] * g.num_objects
    per_stack: dict[int, list[tuple[int, int]]] = {}
    for obj, nid in mapping.items():
        node = g.node(nid)
        if node.kind is NodeKind.STACK_SLOT:
            per_stack.setdefault(node.stack, []).append((node.level, obj))
        elif node.kind is NodeKind.TABLE:
            locs[obj] = OnTable(None)
        elif node.kind is NodeKind.CONTAINER:
            locs[obj] = InContainer(node.container)
        else:
            raise InvalidInstance(
                f"object {obj} at non-terminal node {node.label()}"
            )
    heights = {s.id: s.max_height for s in g.stacks}
    for stack, members in per_stack.items():
        members.sort(reverse=True)
        h = heights[stack]
        for above, (level, obj) in enumerate(members):
            if level != h - above:
                raise InvalidInstance(
                    f"stack {stack} occupancy not anchored at the top"
                )
            locs[obj] = OnStack(stack, above)
    if any(loc is None for loc in locs):
        raise InvalidInstance("pebble state does not cover every object")
    return Arrangement(tuple(locs), container_regions)


def to_dot(g: GadgetGraph) -> str:
    """GraphViz dump for debugging."""
    lines = ["digraph gadget {", "  rankdir=LR;"]
    for n in g.nodes:
        shape = {
            NodeKind.STACK_SLOT: "box",
            NodeKind.TOPPLE_STAGING: "trapezium",
            NodeKind.TABLE: "ellipse",
            NodeKind.TABLE_INTERFACE: "circle",
            NodeKind.CONTAINER: "house",
        }[n.kind]
        lines.append(
            f'  n{n.id} [label="{n.label()} (c{n.capacity})" shape={shape}];'
        )
    for e in g.edges:
        style = "dashed" if e.cost == 0 else "solid"
        width = "2" if e.is_aggregate else "1"
        lines.append(
            f'  n{e.tail} -> n{e.head} [label="{e.kind.value}/{e.capacity}"'
            f" style={style} penwidth={width}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
