from __future__ import annotations

import random

from stackplan.domain import (
    ActionOptions,
    Arrangement,
    GoalSpec,
    Instance,
    OnStack,
    StackSpec,
    arrangement_from_stacks,
    buffer_specs,
)


def three_stacks(h: int = 4) -> tuple[StackSpec, ...]:
    return tuple(
        StackSpec(i, h, 0.45, -0.25 + 0.25 * i) for i in range(3)
    )


def make_instance(
    stacks_contents: list[list[int]],
    goal_targets: dict[int, OnStack],
    h: int = 4,
    buffers: int = 0,
    options: ActionOptions = ActionOptions(),
) -> Instance:
    stacks = three_stacks(h)[: len(stacks_contents)]
    stacks = tuple(
        StackSpec(i, h, 0.45, -0.25 + 0.25 * i) for i in range(len(stacks_contents))
    )
    num_objects = sum(len(c) for c in stacks_contents)
    start = arrangement_from_stacks(
        {s.id: stacks_contents[i] for i, s in enumerate(stacks)}, num_objects
    )
    return Instance(
        stacks=stacks,
        buffers=buffers,
        start=start,
        goal=GoalSpec(tuple(sorted(goal_targets.items()))),
        options=options,
    )


def buried_block_instance(options: ActionOptions = ActionOptions()) -> Instance:
    """Three stacks of height 4; object 3 is buried under three others on
    stack 0 and must reach the bottom-free slot of stack 2. The cheapest
    pick-and-place plan costs 4 and a single topple plus one grounded pick
    costs 2."""
    return make_instance(
        [[0, 1, 2, 3], [], []],
        {3: OnStack(2, 0)},
        options=options,
    )


def random_stack_instance(
    rng: random.Random,
    num_stacks: int = 3,
    h: int = 4,
    num_objects: int = 5,
    buffers: int = 1,
    options: ActionOptions = ActionOptions(topple=True),
) -> Instance:
    """Random start/goal pair over real stacks, always satisfiable."""
    stacks = tuple(
        StackSpec(i, h, 0.45, -0.25 + 0.22 * i) for i in range(num_stacks)
    )

    def random_fill() -> Arrangement:
        contents: dict[int, list[int]] = {s.id: [] for s in stacks}
        order = list(range(num_objects))
        rng.shuffle(order)
        for obj in order:
            open_stacks = [
                s.id for s in stacks if len(contents[s.id]) < s.max_height
            ]
            pick = rng.choice(open_stacks)
            contents[pick].insert(0, obj)
        return arrangement_from_stacks(contents, num_objects)

    start = random_fill()
    goal_arr = random_fill()
    targets = tuple(
        (obj, goal_arr.locations[obj]) for obj in range(num_objects)
    )
    return Instance(
        stacks=stacks,
        buffers=buffers,
        start=start,
        goal=GoalSpec(targets),
        options=options,
    )
