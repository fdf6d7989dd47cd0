"""Container demo: two buried blocks must cross the table.

Two full four-block stacks sit in the left region, two empty goal stacks in
the right region, and a two-slot carryable container starts on the left. The
bottom block of each full stack has to end up on top of a designated right
stack. Pick-and-place alone pays for six uncoverings plus two transfers;
with toppling and the container enabled the optimum collapses to four
actions. The instance also ships as a JSON data file so the CLI can load it
without code.
"""

from __future__ import annotations

from dataclasses import replace
from importlib import resources

from .domain import (
    ActionOptions,
    ContainerSpec,
    GoalSpec,
    Instance,
    OnStack,
    StackSpec,
    arrangement_from_stacks,
    validate_instance,
)
from . import textio

LEFT = "left"
RIGHT = "right"

DEMO_DATA_FILE = "scoop_demo.json"


def build_scoop_demo_instance() -> Instance:
    stacks = (
        StackSpec(0, 4, 0.40, -0.30, region=LEFT),
        StackSpec(1, 4, 0.40, -0.15, region=LEFT),
        StackSpec(2, 4, 0.40, 0.15, region=RIGHT),
        StackSpec(3, 4, 0.40, 0.30, region=RIGHT),
    )
    containers = (ContainerSpec(0, LEFT, 2, 0.55, -0.22),)
    start = arrangement_from_stacks(
        {0: [0, 1, 2, 3], 1: [4, 5, 6, 7]},
        num_objects=8,
        containers=containers,
    )
    goal = GoalSpec(targets=((3, OnStack(2, 0)), (7, OnStack(3, 0))))
    instance = Instance(
        stacks=stacks,
        buffers=0,
        start=start,
        goal=goal,
        options=ActionOptions(topple=True, scoop=True),
        containers=containers,
    )
    validate_instance(instance)
    return instance


def pap_only(instance: Instance) -> Instance:
    """The same task restricted to plain pick-and-place."""
    return replace(
        instance, options=ActionOptions(topple=False, scoop=False)
    )


def load_scoop_demo() -> Instance:
    """The shipped copy of the demo instance."""
    text = (
        resources.files("stackplan")
        .joinpath("data")
        .joinpath(DEMO_DATA_FILE)
        .read_text()
    )
    return textio.parse_instance(text)
