from __future__ import annotations

import random
from dataclasses import replace
from collections import Counter

import pytest

from stackplan.domain import (
    ActionOptions,
    ContainerSpec,
    InvalidInstance,
    OnStack,
    OnTable,
    StackSpec,
    arrangement_from_stacks,
)
from stackplan.gadget import (
    EdgeKind,
    HeightOverflow,
    NodeKind,
    arrangement_from_pebble_state,
    build_pick_place_graph,
    build_topple_graph,
    graph_for_instance,
    pebble_state,
    to_dot,
)

from conftest import buried_block_instance, random_stack_instance, three_stacks


def edge_kind_counts(g):
    return Counter(e.kind for e in g.edges)


def test_pick_place_graph_counts_three_by_four():
    g = build_pick_place_graph(three_stacks(4), 4)
    assert len(g.nodes) == 12
    counts = edge_kind_counts(g)
    assert counts[EdgeKind.SHIFT_UP] == 9
    assert counts[EdgeKind.SHIFT_DOWN] == 9
    assert counts[EdgeKind.CROSS_TOP] == 6
    assert len(g.edges) == 24
    assert all(n.capacity == 1 for n in g.nodes)


def test_topple_graph_adds_staging_table_interfaces():
    g = build_topple_graph(three_stacks(4), 4, ActionOptions(topple=True))
    assert len(g.nodes) == 20  # 12 slots + 3 staging + table + 4 interfaces
    counts = edge_kind_counts(g)
    assert counts[EdgeKind.STAGE_SELECT] == 3
    assert counts[EdgeKind.TOPPLE_AGGREGATE] == 3
    assert counts[EdgeKind.TABLE_FANOUT] == 4
    assert counts[EdgeKind.TABLE_PICK] == 12
    assert len(g.edges) == 24 + 22
    table = g.node(g.table)
    assert table.capacity == 4
    for s in three_stacks(4):
        assert g.node(g.staging[s.id]).capacity == 4


def test_aggregate_capacity_respects_max_topple():
    g = build_topple_graph(
        three_stacks(4), 6, ActionOptions(topple=True, max_topple=2)
    )
    for e in g.aggregate_edges():
        assert e.capacity == 2
    g2 = build_topple_graph(three_stacks(4), 6, ActionOptions(topple=True))
    for e in g2.aggregate_edges():
        assert e.capacity == 6


def test_cross_edges_cost_one_shifts_cost_zero():
    g = build_topple_graph(three_stacks(4), 4, ActionOptions(topple=True))
    for e in g.edges:
        if e.kind in (EdgeKind.SHIFT_UP, EdgeKind.SHIFT_DOWN,
                      EdgeKind.STAGE_SELECT, EdgeKind.TABLE_FANOUT):
            assert e.cost == 0
        else:
            assert e.cost == 1


def test_buffer_stack_has_single_node_and_staging():
    stacks = three_stacks(4) + (
        StackSpec(3, 1, 0.9, 0.0, is_buffer=True),
    )
    g = build_topple_graph(stacks, 4, ActionOptions(topple=True))
    assert g.top[3] == g.slot[(3, 1)]
    assert 3 in g.staging
    counts = edge_kind_counts(g)
    assert counts[EdgeKind.CROSS_TOP] == 12  # 4 * 3 ordered pairs
    # the height-1 chain has no internal shift edges
    assert not any(
        e.is_shift and e.stack == 3 for e in g.edges
    )


def test_pebble_state_top_anchoring():
    inst = buried_block_instance(ActionOptions(topple=True))
    g = graph_for_instance(inst)
    state = pebble_state(inst.start, g)
    # stack 0 holds objects 0..3 top-first in a height-4 chain
    assert state[0] == g.slot[(0, 4)]
    assert state[1] == g.slot[(0, 3)]
    assert state[2] == g.slot[(0, 2)]
    assert state[3] == g.slot[(0, 1)]


def test_partial_stack_sits_at_top_levels():
    stacks = three_stacks(4)
    arr = arrangement_from_stacks({0: [5, 6], 1: [7], 2: []}, 8, table=[0, 1, 2, 3, 4])
    g = build_topple_graph(stacks, 8, ActionOptions(topple=True))
    state = pebble_state(arr, g)
    assert state[5] == g.slot[(0, 4)]
    assert state[6] == g.slot[(0, 3)]
    assert state[7] == g.slot[(1, 4)]
    for obj in range(5):
        assert state[obj] == g.table


def test_pebble_state_rejects_overflow_and_missing_table():
    stacks = (StackSpec(0, 2, 0.4, 0.0),)
    arr = arrangement_from_stacks({0: [0, 1, 2]}, 3)
    g = build_topple_graph(stacks, 3, ActionOptions(topple=True))
    with pytest.raises(HeightOverflow):
        pebble_state(arr, g)
    g2 = build_pick_place_graph(stacks, 1)
    from stackplan.domain import Arrangement

    with pytest.raises(InvalidInstance):
        pebble_state(Arrangement((OnTable(None),)), g2)


def test_pebble_round_trip_random():
    rng = random.Random(7)
    for _ in range(25):
        inst = random_stack_instance(rng, num_objects=5, buffers=1)
        g = graph_for_instance(inst)
        state = pebble_state(inst.start, g)
        back = arrangement_from_pebble_state(g, state)
        assert back == inst.start


def test_scoop_graph_wiring():
    stacks = (
        StackSpec(0, 4, 0.40, -0.30, region="left"),
        StackSpec(1, 4, 0.40, 0.30, region="right"),
    )
    cont = ContainerSpec(0, "left", 2, 0.55, -0.22)
    g = build_topple_graph(
        stacks, 4, ActionOptions(topple=True, scoop=True), (cont,)
    )
    assert set(g.regions) == {"left", "right"}
    assert (0, "left") in g.container_node and (0, "right") in g.container_node
    counts = edge_kind_counts(g)
    # loads: 4 interfaces * 2 region nodes + 1 same-region stack top each
    assert counts[EdgeKind.SCOOP_LOAD] == 4 * 2 + 2
    assert counts[EdgeKind.SCOOP_CARRY] == 2
    assert counts[EdgeKind.SCOOP_UNLOAD] == 2
    for e in g.edges:
        if e.kind == EdgeKind.SCOOP_CARRY:
            assert e.capacity == 2 and e.is_aggregate


def test_container_pebbles_round_trip():
    stacks = (
        StackSpec(0, 4, 0.40, -0.30, region="left"),
        StackSpec(1, 4, 0.40, 0.30, region="right"),
    )
    cont = ContainerSpec(0, "left", 2, 0.55, -0.22)
    g = build_topple_graph(
        stacks, 3, ActionOptions(topple=True, scoop=True), (cont,)
    )
    arr = arrangement_from_stacks(
        {0: [0], 1: []}, 3, containers=(cont,), in_container={0: [1, 2]}
    )
    arr = replace(arr, container_regions=("right",))
    state = pebble_state(arr, g)
    assert state[1] == g.container_node[(0, "right")]
    assert state[2] == g.container_node[(0, "right")]
    back = arrangement_from_pebble_state(g, state, ("right",))
    assert back == arr


def test_adjacency_tables_cover_every_edge():
    g = build_topple_graph(three_stacks(4), 4, ActionOptions(topple=True))
    seen = set()
    for nid, eids in g.out_edges.items():
        for eid in eids:
            assert g.edge(eid).tail == nid
            seen.add(eid)
    assert seen == {e.id for e in g.edges}
    for nid, eids in g.in_edges.items():
        for eid in eids:
            assert g.edge(eid).head == nid


def test_dot_dump_mentions_every_node():
    g = build_topple_graph(three_stacks(2), 2, ActionOptions(topple=True))
    dot = to_dot(g)
    for n in g.nodes:
        assert f"n{n.id} " in dot
    assert dot.startswith("digraph")
