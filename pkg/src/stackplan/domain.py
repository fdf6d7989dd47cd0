"""Symbolic rearrangement domain: stacks of distinguishable objects on a table.

State is an Arrangement mapping each object to a location. Stack locations are
addressed by the number of objects above (0 = top), so a stack's occupants
always carry the contiguous counts 0..m-1. Actions follow LIFO physics: only
the top of a stack can be picked, a topple throws the top m objects of one
stack onto the table in a single action, and a table pick returns one grounded
object to a stack top.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Union

ObjectId = int
StackId = int

DEFAULT_REGION = "default"

# Buffer slots are laid out on a circle of this radius around the table
# origin, rotated away from collisions in deterministic steps.
BUFFER_RING_RADIUS = 0.62
BUFFER_MIN_CLEARANCE = 0.11
# Keep buffers out of the four axis-aligned lanes through each real stack:
# toppled objects land in such a lane, and a buffer parked there would leave
# the stack with no valid landing strip.
BUFFER_LANE_HALF_WIDTH = 0.18


class InvalidInstance(ValueError):
    """Raised when an instance or arrangement violates a structural invariant."""


class CapacityExceeded(InvalidInstance):
    """Raised when objects cannot fit the declared stack heights."""


class PreconditionViolated(Exception):
    """An action was applied in a state that does not admit it."""

    def __init__(self, action: "Action", reason: str):
        super().__init__(f"{action}: {reason}")
        self.action = action
        self.reason = reason


@dataclass(frozen=True)
class StackSpec:
    """One stack location: a base position on the table plus a height limit."""

    id: StackId
    max_height: int
    x: float
    y: float
    region: str = DEFAULT_REGION
    is_buffer: bool = False


@dataclass(frozen=True)
class ContainerSpec:
    """A carryable container (scoop) attached to one region at a time."""

    id: int
    region: str
    capacity: int
    x: float
    y: float


@dataclass(frozen=True)
class ActionOptions:
    """Which action families the planner may use, and the topple size cap."""

    topple: bool = True
    max_topple: Optional[int] = None
    scoop: bool = False


@dataclass(frozen=True)
class OnStack:
    stack: StackId
    above: int  # number of objects sitting on top of this one


@dataclass(frozen=True)
class OnTable:
    # Planar pose once grounded by the execution model; None while symbolic.
    pose: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class InContainer:
    container: int


Location = Union[OnStack, OnTable, InContainer]


def _locations_equal(a: Location, b: Location) -> bool:
    """Location equality with ungrounded table poses treated as wildcards."""
    if isinstance(a, OnTable) and isinstance(b, OnTable):
        if a.pose is None or b.pose is None:
            return True
        return a.pose == b.pose
    return a == b


@dataclass(frozen=True)
class Arrangement:
    """Immutable world state: one location per object, by object id."""

    locations: tuple[Location, ...]
    # Current region of each container, by container id. Empty when the
    # instance has no containers.
    container_regions: tuple[str, ...] = ()

    @property
    def num_objects(self) -> int:
        return len(self.locations)

    def location_of(self, obj: ObjectId) -> Location:
        return self.locations[obj]

    def stack_contents(self, stack: StackId) -> tuple[ObjectId, ...]:
        """Objects on a stack, ordered top first."""
        members = [
            (loc.above, obj)
            for obj, loc in enumerate(self.locations)
            if isinstance(loc, OnStack) and loc.stack == stack
        ]
        members.sort()
        return tuple(obj for _, obj in members)

    def stack_height(self, stack: StackId) -> int:
        return sum(
            1
            for loc in self.locations
            if isinstance(loc, OnStack) and loc.stack == stack
        )

    def table_objects(self) -> tuple[ObjectId, ...]:
        return tuple(
            obj
            for obj, loc in enumerate(self.locations)
            if isinstance(loc, OnTable)
        )

    def container_contents(self, container: int) -> tuple[ObjectId, ...]:
        return tuple(
            obj
            for obj, loc in enumerate(self.locations)
            if isinstance(loc, InContainer) and loc.container == container
        )

    def top_of(self, stack: StackId) -> Optional[ObjectId]:
        for obj, loc in enumerate(self.locations):
            if isinstance(loc, OnStack) and loc.stack == stack and loc.above == 0:
                return obj
        return None

    def canonical_key(self) -> tuple:
        """Hashable key identifying the state up to table-pose grounding."""
        parts = []
        for loc in self.locations:
            if isinstance(loc, OnStack):
                parts.append(("s", loc.stack, loc.above))
            elif isinstance(loc, OnTable):
                parts.append(("t",))
            else:
                parts.append(("c", loc.container))
        return (tuple(parts), self.container_regions)


@dataclass(frozen=True)
class PickPlace:
    src: StackId
    dst: StackId


@dataclass(frozen=True)
class Topple:
    stack: StackId
    count: int


@dataclass(frozen=True)
class TablePick:
    obj: ObjectId
    dst: StackId


@dataclass(frozen=True)
class ScoopLoad:
    obj: ObjectId
    container: int


@dataclass(frozen=True)
class ScoopCarry:
    container: int
    to_region: str


@dataclass(frozen=True)
class ScoopUnload:
    obj: ObjectId
    dst: StackId


Action = Union[PickPlace, Topple, TablePick, ScoopLoad, ScoopCarry, ScoopUnload]

ACTION_NAMES = {
    PickPlace: "pick_place",
    Topple: "topple",
    TablePick: "table_pick",
    ScoopLoad: "scoop_load",
    ScoopCarry: "scoop_carry",
    ScoopUnload: "scoop_unload",
}


@dataclass(frozen=True)
class Plan:
    actions: tuple[Action, ...]

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class GoalSpec:
    """Target locations for a subset of objects.

    kind is derived: one target is a single-object goal, a target for every
    object is a full multi goal, anything in between is partial.
    """

    targets: tuple[tuple[ObjectId, Location], ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.targets, key=lambda t: t[0]))
        object.__setattr__(self, "targets", ordered)
        seen = [o for o, _ in ordered]
        if len(set(seen)) != len(seen):
            raise InvalidInstance("goal constrains an object twice")

    def kind(self, num_objects: int) -> str:
        if len(self.targets) == 1:
            return "single"
        if len(self.targets) == num_objects:
            return "multi"
        return "partial"

    def target_of(self, obj: ObjectId) -> Optional[Location]:
        for o, loc in self.targets:
            if o == obj:
                return loc
        return None


@dataclass(frozen=True)
class Instance:
    """A planning problem: geometry, start state, goal, and action options."""

    stacks: tuple[StackSpec, ...]  # real stacks only
    buffers: int
    start: Arrangement
    goal: GoalSpec
    options: ActionOptions = ActionOptions()
    containers: tuple[ContainerSpec, ...] = ()

    @property
    def num_objects(self) -> int:
        return self.start.num_objects

    @property
    def all_stacks(self) -> tuple[StackSpec, ...]:
        return self.stacks + buffer_specs(self.stacks, self.buffers)

    @property
    def num_stacks(self) -> int:
        return len(self.stacks) + self.buffers

    def stack_spec(self, stack: StackId) -> StackSpec:
        return self.all_stacks[stack]

    def regions(self) -> tuple[str, ...]:
        seen: list[str] = []
        for spec in self.all_stacks:
            if spec.region not in seen:
                seen.append(spec.region)
        for c in self.containers:
            if c.region not in seen:
                seen.append(c.region)
        return tuple(seen)

    def topple_cap(self) -> int:
        cap = self.num_objects
        if self.options.max_topple is not None:
            cap = min(cap, self.options.max_topple)
        return max(cap, 1)


def _in_axis_lane(x: float, y: float, real: tuple[StackSpec, ...]) -> bool:
    for s in real:
        dx = x - s.x
        dy = y - s.y
        if abs(dx) < BUFFER_LANE_HALF_WIDTH or abs(dy) < BUFFER_LANE_HALF_WIDTH:
            return True
    return False


def buffer_specs(real: Iterable[StackSpec], count: int) -> tuple[StackSpec, ...]:
    """Deterministic single-slot buffer stacks on a ring around the origin.

    Candidate positions are evenly spaced ring angles, filtered to keep every
    buffer clear of real-stack footprints and out of their axis-aligned
    landing lanes; the survivors are thinned to an even spread. If fewer than
    `count` candidates survive the ring radius is nudged outward, so the
    layout is a pure function of the real stacks and the count.
    """
    return _buffer_specs_cached(tuple(real), count)


@functools.lru_cache(maxsize=256)
def _buffer_specs_cached(
    real: tuple[StackSpec, ...], count: int
) -> tuple[StackSpec, ...]:
    import math

    if count == 0:
        return ()
    next_id = max((s.id for s in real), default=-1) + 1
    radius = BUFFER_RING_RADIUS
    while True:
        eligible: list[tuple[float, float]] = []
        for i in range(256):
            ang = 2.0 * math.pi * i / 256
            x = round(radius * math.cos(ang), 6)
            y = round(radius * math.sin(ang), 6)
            if _in_axis_lane(x, y, real):
                continue
            if any(math.hypot(x - s.x, y - s.y) < BUFFER_MIN_CLEARANCE for s in real):
                continue
            if any(math.hypot(x - px, y - py) < BUFFER_MIN_CLEARANCE
                   for px, py in eligible):
                continue
            eligible.append((x, y))
        if len(eligible) >= count:
            picked = [eligible[(i * len(eligible)) // count] for i in range(count)]
            return tuple(
                StackSpec(
                    id=next_id + i,
                    max_height=1,
                    x=x,
                    y=y,
                    region=DEFAULT_REGION,
                    is_buffer=True,
                )
                for i, (x, y) in enumerate(picked)
            )
        radius += 0.05


def validate_arrangement(instance: Instance, arr: Arrangement) -> None:
    """Check structural invariants; raise InvalidInstance on violation."""
    specs = instance.all_stacks
    if arr.num_objects != instance.num_objects:
        raise InvalidInstance("object count mismatch")
    if len(arr.container_regions) != len(instance.containers):
        raise InvalidInstance("container region vector mismatch")
    for cid, region in enumerate(arr.container_regions):
        if region not in instance.regions():
            raise InvalidInstance(f"container {cid} in unknown region {region!r}")
    per_stack: dict[int, list[int]] = {}
    for obj, loc in enumerate(arr.locations):
        if isinstance(loc, OnStack):
            if not 0 <= loc.stack < len(specs):
                raise InvalidInstance(f"object {obj} on unknown stack {loc.stack}")
            per_stack.setdefault(loc.stack, []).append(loc.above)
        elif isinstance(loc, InContainer):
            if not 0 <= loc.container < len(instance.containers):
                raise InvalidInstance(f"object {obj} in unknown container")
    for stack, aboves in per_stack.items():
        aboves.sort()
        if aboves != list(range(len(aboves))):
            raise InvalidInstance(
                f"stack {stack} above-counts not contiguous: {aboves}"
            )
        if len(aboves) > specs[stack].max_height:
            raise CapacityExceeded(
                f"stack {stack} holds {len(aboves)} > {specs[stack].max_height}"
            )
    for c in instance.containers:
        n = len(arr.container_contents(c.id))
        if n > c.capacity:
            raise CapacityExceeded(f"container {c.id} holds {n} > {c.capacity}")


def validate_instance(instance: Instance) -> None:
    for i, s in enumerate(instance.stacks):
        if s.id != i:
            raise InvalidInstance("real stack ids must be 0..n-1 in order")
        if s.max_height < 1:
            raise InvalidInstance(f"stack {i} has non-positive height")
        if s.is_buffer:
            raise InvalidInstance("buffers are implicit; remove from stacks")
    for i, c in enumerate(instance.containers):
        if c.id != i:
            raise InvalidInstance("container ids must be 0..n-1 in order")
        if c.capacity < 1:
            raise InvalidInstance(f"container {i} has non-positive capacity")
    # Containers may be declared while scoop is toggled off (paired runs on
    # the same instance); they are simply inert then.
    if instance.options.max_topple is not None and instance.options.max_topple < 1:
        raise InvalidInstance("max_topple must be >= 1 when set")
    validate_arrangement(instance, instance.start)
    for obj, loc in instance.goal.targets:
        if not 0 <= obj < instance.num_objects:
            raise InvalidInstance(f"goal names unknown object {obj}")
        if isinstance(loc, OnStack):
            if not 0 <= loc.stack < instance.num_stacks:
                raise InvalidInstance("goal names unknown stack")
            if loc.above >= instance.stack_spec(loc.stack).max_height:
                raise InvalidInstance("goal depth exceeds stack height")
        elif isinstance(loc, InContainer):
            if not 0 <= loc.container < len(instance.containers):
                raise InvalidInstance("goal names unknown container")
    has_table = instance.options.topple or instance.options.scoop
    if not has_table:
        if any(isinstance(loc, OnTable) for loc in instance.start.locations):
            raise InvalidInstance(
                "table start positions need topple or scoop enabled"
            )


def apply(instance: Instance, arr: Arrangement, action: Action) -> Arrangement:
    """Apply one action; raise PreconditionViolated if the state forbids it."""
    locs = list(arr.locations)
    specs = instance.all_stacks

    def room(stack: StackId) -> bool:
        return arr.stack_height(stack) < specs[stack].max_height

    if isinstance(action, PickPlace):
        if action.src == action.dst:
            raise PreconditionViolated(action, "source equals destination")
        if not 0 <= action.src < len(specs) or not 0 <= action.dst < len(specs):
            raise PreconditionViolated(action, "unknown stack")
        top = arr.top_of(action.src)
        if top is None:
            raise PreconditionViolated(action, "source stack empty")
        if not room(action.dst):
            raise PreconditionViolated(action, "destination stack full")
        for obj, loc in enumerate(locs):
            if isinstance(loc, OnStack):
                if loc.stack == action.src and loc.above > 0:
                    locs[obj] = OnStack(action.src, loc.above - 1)
                elif loc.stack == action.dst:
                    locs[obj] = OnStack(action.dst, loc.above + 1)
        locs[top] = OnStack(action.dst, 0)
        return replace(arr, locations=tuple(locs))

    if isinstance(action, Topple):
        if not instance.options.topple:
            raise PreconditionViolated(action, "topple disabled")
        if not 0 <= action.stack < len(specs):
            raise PreconditionViolated(action, "unknown stack")
        height = arr.stack_height(action.stack)
        if not 1 <= action.count <= height:
            raise PreconditionViolated(action, f"count {action.count} vs height {height}")
        if action.count > instance.topple_cap():
            raise PreconditionViolated(action, "count above topple cap")
        for obj, loc in enumerate(locs):
            if isinstance(loc, OnStack) and loc.stack == action.stack:
                if loc.above < action.count:
                    locs[obj] = OnTable(None)
                else:
                    locs[obj] = OnStack(action.stack, loc.above - action.count)
        return replace(arr, locations=tuple(locs))

    if isinstance(action, TablePick):
        if not 0 <= action.obj < len(locs):
            raise PreconditionViolated(action, "unknown object")
        if not isinstance(locs[action.obj], OnTable):
            raise PreconditionViolated(action, "object not on the table")
        if not 0 <= action.dst < len(specs):
            raise PreconditionViolated(action, "unknown stack")
        if not room(action.dst):
            raise PreconditionViolated(action, "destination stack full")
        for obj, loc in enumerate(locs):
            if isinstance(loc, OnStack) and loc.stack == action.dst:
                locs[obj] = OnStack(action.dst, loc.above + 1)
        locs[action.obj] = OnStack(action.dst, 0)
        return replace(arr, locations=tuple(locs))

    if isinstance(action, ScoopLoad):
        if not instance.options.scoop:
            raise PreconditionViolated(action, "scoop disabled")
        if not 0 <= action.container < len(instance.containers):
            raise PreconditionViolated(action, "unknown container")
        spec = instance.containers[action.container]
        region = arr.container_regions[action.container]
        if len(arr.container_contents(action.container)) >= spec.capacity:
            raise PreconditionViolated(action, "container full")
        loc = locs[action.obj] if 0 <= action.obj < len(locs) else None
        if isinstance(loc, OnTable):
            pass
        elif isinstance(loc, OnStack) and loc.above == 0:
            if specs[loc.stack].region != region:
                raise PreconditionViolated(action, "stack not in container region")
        else:
            raise PreconditionViolated(
                action, "object must be on the table or a same-region stack top"
            )
        if isinstance(loc, OnStack):
            for obj, other in enumerate(locs):
                if (
                    isinstance(other, OnStack)
                    and other.stack == loc.stack
                    and other.above > 0
                ):
                    locs[obj] = OnStack(other.stack, other.above - 1)
        locs[action.obj] = InContainer(action.container)
        return replace(arr, locations=tuple(locs))

    if isinstance(action, ScoopCarry):
        if not instance.options.scoop:
            raise PreconditionViolated(action, "scoop disabled")
        if not 0 <= action.container < len(instance.containers):
            raise PreconditionViolated(action, "unknown container")
        regions = instance.regions()
        if action.to_region not in regions:
            raise PreconditionViolated(action, f"unknown region {action.to_region!r}")
        if arr.container_regions[action.container] == action.to_region:
            raise PreconditionViolated(action, "container already in region")
        if not arr.container_contents(action.container):
            raise PreconditionViolated(action, "container empty")
        new_regions = list(arr.container_regions)
        new_regions[action.container] = action.to_region
        return replace(arr, container_regions=tuple(new_regions))

    if isinstance(action, ScoopUnload):
        if not instance.options.scoop:
            raise PreconditionViolated(action, "scoop disabled")
        loc = locs[action.obj] if 0 <= action.obj < len(locs) else None
        if not isinstance(loc, InContainer):
            raise PreconditionViolated(action, "object not in a container")
        region = arr.container_regions[loc.container]
        if not 0 <= action.dst < len(specs):
            raise PreconditionViolated(action, "unknown stack")
        if specs[action.dst].region != region:
            raise PreconditionViolated(action, "stack not in container region")
        if not room(action.dst):
            raise PreconditionViolated(action, "destination stack full")
        for obj, other in enumerate(locs):
            if isinstance(other, OnStack) and other.stack == action.dst:
                locs[obj] = OnStack(action.dst, other.above + 1)
        locs[action.obj] = OnStack(action.dst, 0)
        return replace(arr, locations=tuple(locs))

    raise PreconditionViolated(action, "unknown action type")


def is_goal(arr: Arrangement, goal: GoalSpec) -> bool:
    return all(
        _locations_equal(arr.locations[obj], target) for obj, target in goal.targets
    )


@dataclass
class ValidationReport:
    ok: bool
    failing_step: Optional[int]
    error: Optional[str]
    final: Arrangement
    action_counts: dict[str, int] = field(default_factory=dict)
    reached_goal: bool = False


def validate_plan(instance: Instance, plan: Plan) -> ValidationReport:
    """Replay a plan from the start state, checking every precondition."""
    arr = instance.start
    counts: dict[str, int] = {}
    for step, action in enumerate(plan.actions):
        try:
            arr = apply(instance, arr, action)
        except PreconditionViolated as exc:
            return ValidationReport(
                ok=False,
                failing_step=step,
                error=str(exc),
                final=arr,
                action_counts=counts,
            )
        counts[ACTION_NAMES[type(action)]] = (
            counts.get(ACTION_NAMES[type(action)], 0) + 1
        )
    return ValidationReport(
        ok=True,
        failing_step=None,
        error=None,
        final=arr,
        action_counts=counts,
        reached_goal=is_goal(arr, instance.goal),
    )


def initial_container_regions(containers: Iterable[ContainerSpec]) -> tuple[str, ...]:
    return tuple(c.region for c in containers)


def arrangement_from_stacks(
    stacks_contents: dict[StackId, Iterable[ObjectId]],
    num_objects: int,
    table: Iterable[ObjectId] = (),
    containers: Iterable[ContainerSpec] = (),
    in_container: dict[int, Iterable[ObjectId]] | None = None,
) -> Arrangement:
    """Build an Arrangement from top-first stack listings (test/demo helper)."""
    locs: list[Optional[Location]] = [None] * num_objects
    for stack, objs in stacks_contents.items():
        for above, obj in enumerate(objs):
            locs[obj] = OnStack(stack, above)
    for obj in table:
        locs[obj] = OnTable(None)
    for cid, objs in (in_container or {}).items():
        for obj in objs:
            locs[obj] = InContainer(cid)
    if any(loc is None for loc in locs):
        missing = [i for i, loc in enumerate(locs) if loc is None]
        raise InvalidInstance(f"objects without a location: {missing}")
    return Arrangement(
        locations=tuple(locs),  # type: ignore[arg-type]
        container_regions=initial_container_regions(containers),
    )
