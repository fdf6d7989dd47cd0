"""Turn a flow solution back into an executable action plan.

Unit-cost edge traversals map one-to-one onto actions; shift, staging and
fanout traversals are bookkeeping and emit nothing. A topple aggregate
activation becomes a single topple whose count is its rider multiplicity,
which is exactly the contiguous top run of the stack at that point: the
quiet-chain constraints forbid anyone touching the stack between the
selections and the discharge.

Solutions from the native solver carry one action per timestep, but foreign
ones (say, an external MILP solve of the exported model) may bundle several
actions into a step. Those are serialized greedily by applicability on the
replayed arrangement, breaking ties by action kind then by the acting ids;
if no pending action applies the bundle is genuinely cyclic and
LinearizationCycle is raised.
"""

from __future__ import annotations

from .domain import (
    ACTION_NAMES,
    Action,
    Instance,
    PickPlace,
    Plan,
    PreconditionViolated,
    ScoopCarry,
    ScoopLoad,
    ScoopUnload,
    TablePick,
    Topple,
    apply,
)
from .flow import FlowSolution
from .gadget import EdgeKind, GadgetGraph


class LinearizationCycle(ValueError):
    """A within-step action bundle admits no sequential order."""


_RANK = {
    Topple: 0,
    ScoopCarry: 1,
    PickPlace: 2,
    TablePick: 3,
    ScoopLoad: 4,
    ScoopUnload: 5,
}


def _step_actions(
    g: GadgetGraph, sol: FlowSolution, t: int
) -> list[Action]:
    moves = sol.moves_at(t)
    out: list[Action] = []
    for eid in sol.activations_at(t):
        e = g.edge(eid)
        riders = [m.obj for m in moves if m.edge == eid]
        if not riders:
            continue  # a paid no-op; nothing to execute
        if e.kind is EdgeKind.TOPPLE_AGGREGATE:
            out.append(Topple(e.stack, len(riders)))
        else:
            region = g.node(e.head).region
            out.append(ScoopCarry(e.container, region))
    for m in moves:
        e = g.edge(m.edge)
        if e.kind is EdgeKind.CROSS_TOP:
            out.append(
                PickPlace(g.node(e.tail).stack, g.node(e.head).stack)
            )
        elif e.kind is EdgeKind.TABLE_PICK:
            out.append(TablePick(m.obj, g.node(e.head).stack))
        elif e.kind is EdgeKind.SCOOP_LOAD:
            out.append(ScoopLoad(m.obj, e.container))
        elif e.kind is EdgeKind.SCOOP_UNLOAD:
            out.append(ScoopUnload(m.obj, g.node(e.head).stack))
    return out


def _tie_key(action: Action) -> tuple:
    return (_RANK[type(action)],) + tuple(
        getattr(action, f) for f in action.__dataclass_fields__
        if isinstance(getattr(action, f), (int, str))
    )


def extract(instance: Instance, g: GadgetGraph, sol: FlowSolution) -> Plan:
    """Sequential plan equivalent to the flow; cost is preserved exactly."""
    arr = instance.start
    actions: list[Action] = []
    for t in range(sol.horizon):
        pending = sorted(_step_actions(g, sol, t), key=_tie_key)
        while pending:
            for i, action in enumerate(pending):
                try:
                    arr = apply(instance, arr, action)
                except PreconditionViolated:
                    continue
                actions.append(action)
                del pending[i]
                break
            else:
                raise LinearizationCycle(
                    f"step {t}: no order admits {pending!r}"
                )
    return Plan(tuple(actions))


def action_histogram(plan: Plan) -> dict[str, int]:
    counts: dict[str, int] = {}
    for action in plan.actions:
        name = ACTION_NAMES[type(action)]
        counts[name] = counts.get(name, 0) + 1
    return counts
