"""Plain-text MILP export in the classic LP file dialect.

One row per line, rows in the fixed order the model generates them, so the
same model always serializes to the same bytes. All variables are binary;
aggregate activations are the y block, traversals x, waits w.
"""

from __future__ import annotations

from .flow import FlowModel


def _terms(terms: list[tuple[str, int]]) -> str:
    parts: list[str] = []
    for name, coef in terms:
        if coef >= 0:
            sign = "+" if parts else ""
            mag = coef
        else:
            sign = "-"
            mag = -coef
        if mag == 1:
            parts.append(f"{sign} {name}" if parts else f"{sign}{name}")
        else:
            parts.append(f"{sign} {mag} {name}" if parts else f"{sign}{mag} {name}")
    return " ".join(parts)


def export_lp(model: FlowModel) -> str:
    lines: list[str] = []
    lines.append("\\ stackplan time-expanded flow")
    lines.append(
        f"\\ horizon={model.horizon} objects={model.graph.num_objects}"
        f" nodes={len(model.graph.nodes)} edges={len(model.graph.edges)}"
    )
    lines.append("Minimize")
    obj = list(model.objective_terms())
    if obj:
        lines.append(f" obj: {_terms(obj)}")
    else:
        first = next(iter(model.variables()))
        lines.append(f" obj: 0 {first}")
    lines.append("Subject To")
    for name, terms, sense, rhs in model.rows():
        op = {"<=": "<=", ">=": ">=", "=": "="}[sense]
        lines.append(f" {name}: {_terms(terms)} {op} {rhs}")
    lines.append("Binary")
    for var in model.variables():
        lines.append(f" {var}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(model: FlowModel, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(export_lp(model))
