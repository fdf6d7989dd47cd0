"""Structured text (JSON) serialization for instances, plans, and reports.

Field names are part of the public contract and documented in the README.
parse(serialize(value)) == value holds for instances and plans.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from .domain import (
    ActionOptions,
    Action,
    Arrangement,
    ContainerSpec,
    GoalSpec,
    InContainer,
    Instance,
    Location,
    OnStack,
    OnTable,
    PickPlace,
    Plan,
    ScoopCarry,
    ScoopLoad,
    ScoopUnload,
    InvalidInstance,
    StackSpec,
    TablePick,
    Topple,
    initial_container_regions,
    validate_instance,
)

INSTANCE_FORMAT = "stackplan-instance"
PLAN_FORMAT = "stackplan-plan"
FORMAT_VERSION = 1


class InvalidDescriptor(ValueError):
    """Raised when a serialized document cannot be decoded."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidDescriptor(msg)


def location_to_dict(loc: Location) -> dict[str, Any]:
    if isinstance(loc, OnStack):
        return {"stack": loc.stack, "above": loc.above}
    if isinstance(loc, OnTable):
        return {"table": list(loc.pose) if loc.pose is not None else None}
    if isinstance(loc, InContainer):
        return {"container": loc.container}
    raise InvalidDescriptor(f"unknown location {loc!r}")


def location_from_dict(d: dict[str, Any]) -> Location:
    if "stack" in d:
        return OnStack(int(d["stack"]), int(d["above"]))
    if "table" in d:
        pose = d["table"]
        return OnTable(tuple(pose) if pose is not None else None)
    if "container" in d:
        return InContainer(int(d["container"]))
    raise InvalidDescriptor(f"undecodable location {d!r}")


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    return {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "stacks": [
            {
                "id": s.id,
                "max_height": s.max_height,
                "x": s.x,
                "y": s.y,
                "region": s.region,
            }
            for s in instance.stacks
        ],
        "buffers": instance.buffers,
        "objects": [
            {"id": obj, **location_to_dict(loc)}
            for obj, loc in enumerate(instance.start.locations)
        ],
        "goal": {
            "kind": instance.goal.kind(instance.num_objects),
            "targets": [
                {"object": obj, **location_to_dict(loc)}
                for obj, loc in instance.goal.targets
            ],
        },
        "options": {
            "topple": instance.options.topple,
            "max_topple": instance.options.max_topple,
            "scoop": instance.options.scoop,
        },
        "containers": [
            {
                "id": c.id,
                "region": c.region,
                "capacity": c.capacity,
                "x": c.x,
                "y": c.y,
            }
            for c in instance.containers
        ],
    }


def instance_from_dict(d: dict[str, Any]) -> Instance:
    _require(isinstance(d, dict), "instance document must be an object")
    _require(d.get("format") == INSTANCE_FORMAT, "not an instance document")
    _require(int(d.get("version", -1)) == FORMAT_VERSION, "unsupported version")
    try:
        stacks = tuple(
            StackSpec(
                id=int(s["id"]),
                max_height=int(s["max_height"]),
                x=float(s["x"]),
                y=float(s["y"]),
                region=str(s.get("region", "default")),
            )
            for s in d["stacks"]
        )
        containers = tuple(
            ContainerSpec(
                id=int(c["id"]),
                region=str(c["region"]),
                capacity=int(c["capacity"]),
                x=float(c["x"]),
                y=float(c["y"]),
            )
            for c in d.get("containers", [])
        )
        objs = sorted(d["objects"], key=lambda o: int(o["id"]))
        _require(
            [int(o["id"]) for o in objs] == list(range(len(objs))),
            "object ids must cover 0..n-1",
        )
        locations = tuple(location_from_dict(o) for o in objs)
        goal = GoalSpec(
            targets=tuple(
                (int(t["object"]), location_from_dict(t))
                for t in d["goal"]["targets"]
            )
        )
        opts = d.get("options", {})
        options = ActionOptions(
            topple=bool(opts.get("topple", True)),
            max_topple=(
                None if opts.get("max_topple") is None else int(opts["max_topple"])
            ),
            scoop=bool(opts.get("scoop", False)),
        )
        instance = Instance(
            stacks=stacks,
            buffers=int(d.get("buffers", 0)),
            start=Arrangement(
                locations=locations,
                container_regions=initial_container_regions(containers),
            ),
            goal=goal,
            options=options,
            containers=containers,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDescriptor(f"malformed instance document: {exc}") from exc
    try:
        validate_instance(instance)
    except InvalidInstance as exc:
        raise InvalidDescriptor(f"invalid instance: {exc}") from exc
    return instance


def action_to_dict(action: Action) -> dict[str, Any]:
    if isinstance(action, PickPlace):
        return {"kind": "pick_place", "from": action.src, "to": action.dst}
    if isinstance(action, Topple):
        return {"kind": "topple", "stack": action.stack, "count": action.count}
    if isinstance(action, TablePick):
        return {"kind": "table_pick", "object": action.obj, "to": action.dst}
    if isinstance(action, ScoopLoad):
        return {"kind": "scoop_load", "object": action.obj, "container": action.container}
    if isinstance(action, ScoopCarry):
        return {"kind": "scoop_carry", "container": action.container, "to_region": action.to_region}
    if isinstance(action, ScoopUnload):
        return {"kind": "scoop_unload", "object": action.obj, "to": action.dst}
    raise InvalidDescriptor(f"unknown action {action!r}")


def action_from_dict(d: dict[str, Any]) -> Action:
    try:
        kind = d["kind"]
        if kind == "pick_place":
            return PickPlace(int(d["from"]), int(d["to"]))
        if kind == "topple":
            return Topple(int(d["stack"]), int(d["count"]))
        if kind == "table_pick":
            return TablePick(int(d["object"]), int(d["to"]))
        if kind == "scoop_load":
            return ScoopLoad(int(d["object"]), int(d["container"]))
        if kind == "scoop_carry":
            return ScoopCarry(int(d["container"]), str(d["to_region"]))
        if kind == "scoop_unload":
            return ScoopUnload(int(d["object"]), int(d["to"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDescriptor(f"malformed action: {exc}") from exc
    raise InvalidDescriptor(f"unknown action kind {d.get('kind')!r}")


def plan_to_dict(plan: Plan) -> dict[str, Any]:
    return {
        "format": PLAN_FORMAT,
        "version": FORMAT_VERSION,
        "actions": [action_to_dict(a) for a in plan.actions],
    }


def plan_from_dict(d: dict[str, Any]) -> Plan:
    _require(isinstance(d, dict), "plan document must be an object")
    _require(d.get("format") == PLAN_FORMAT, "not a plan document")
    _require(int(d.get("version", -1)) == FORMAT_VERSION, "unsupported version")
    return Plan(tuple(action_from_dict(a) for a in d.get("actions", [])))


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict[str, Any]:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDescriptor(f"invalid JSON: {exc}") from exc


def serialize_instance(instance: Instance) -> str:
    return dumps(instance_to_dict(instance))


def parse_instance(text: str) -> Instance:
    return instance_from_dict(loads(text))


def serialize_plan(plan: Plan) -> str:
    return dumps(plan_to_dict(plan))


def parse_plan(text: str) -> Plan:
    return plan_from_dict(loads(text))


def read_instance(path: Union[str, Path]) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(instance: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_instance(instance))


def read_plan(path: Union[str, Path]) -> Plan:
    return parse_plan(Path(path).read_text())


def write_plan(plan: Plan, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_plan(plan))
