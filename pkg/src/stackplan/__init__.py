"""Stack rearrangement planning with topple and scoop actions.

The package splits into a task model (`domain`, `textio`), a planning core
(`gadget`, `flow`, `solver`, `extract`, `oracle`, `lptext`), an execution
simulator (`execution`), and benchmarking utilities (`bench`, `heatmap`,
`scoop`). The `stackplan` console script in `cli` fronts all of it.
"""

from .domain import (
    ActionOptions,
    Arrangement,
    ContainerSpec,
    GoalSpec,
    InContainer,
    Instance,
    OnStack,
    OnTable,
    PickPlace,
    Plan,
    ScoopCarry,
    ScoopLoad,
    ScoopUnload,
    StackSpec,
    TablePick,
    Topple,
    validate_instance,
    validate_plan,
)
from .execution import ExecConfig, ExecReport, execute, monte_carlo_success
from .extract import extract
from .gadget import graph_for_instance
from .oracle import brute_force_plan
from .solver import SolveConfig, SolveResult, SolveStatus, lower_bound, solve_anytime

__version__ = "0.1.0"

__all__ = [
    "ActionOptions",
    "Arrangement",
    "ContainerSpec",
    "ExecConfig",
    "ExecReport",
    "GoalSpec",
    "InContainer",
    "Instance",
    "OnStack",
    "OnTable",
    "PickPlace",
    "Plan",
    "ScoopCarry",
    "ScoopLoad",
    "ScoopUnload",
    "SolveConfig",
    "SolveResult",
    "SolveStatus",
    "StackSpec",
    "TablePick",
    "Topple",
    "brute_force_plan",
    "execute",
    "extract",
    "graph_for_instance",
    "lower_bound",
    "monte_carlo_success",
    "solve_anytime",
    "validate_instance",
    "validate_plan",
    "__version__",
]
