"""Tiny LP-text reader used to cross-check exports with an external solver.

Parses the subset the exporter emits (Minimize / Subject To / Binary / End,
integer coefficients, one row per line) into scipy.optimize.milp inputs.
Kept deliberately independent of the package's own model code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_TERM = re.compile(r"([+-]?)\s*(\d+)?\s*([A-Za-z_][A-Za-z0-9_]*)")


@dataclass
class ParsedLP:
    objective: dict[str, int] = field(default_factory=dict)
    rows: list[tuple[str, dict[str, int], str, int]] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)


def _parse_terms(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for sign, mag, name in _TERM.findall(text):
        coef = int(mag) if mag else 1
        if sign == "-":
            coef = -coef
        out[name] = out.get(name, 0) + coef
    return out


def parse_lp(text: str) -> ParsedLP:
    lp = ParsedLP()
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "maximize"):
            section = "obj"
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "binary":
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            body = line.split(":", 1)[1] if ":" in line else line
            lp.objective.update(_parse_terms(body))
        elif section == "rows":
            name, body = line.split(":", 1)
            m = re.search(r"(<=|>=|=)\s*(-?\d+)\s*$", body)
            if not m:
                raise ValueError(f"unparseable row: {line!r}")
            sense, rhs = m.group(1), int(m.group(2))
            lp.rows.append(
                (name.strip(), _parse_terms(body[: m.start()]), sense, rhs)
            )
        elif section == "bin":
            lp.binaries.append(line)
    return lp


def solve_lp(text: str, time_limit: float = 120.0):
    """Optimal objective value via scipy's MILP front end, or None if
    infeasible."""
    import numpy as np
    from scipy.optimize import LinearConstraint, milp
    from scipy.sparse import lil_matrix

    lp = parse_lp(text)
    index = {name: i for i, name in enumerate(lp.binaries)}
    n = len(index)
    c = np.zeros(n)
    for name, coef in lp.objective.items():
        c[index[name]] = coef

    m = len(lp.rows)
    a = lil_matrix((m, n))
    lo = np.full(m, -np.inf)
    hi = np.full(m, np.inf)
    for i, (_, terms, sense, rhs) in enumerate(lp.rows):
        for name, coef in terms.items():
            a[i, index[name]] = coef
        if sense == "<=":
            hi[i] = rhs
        elif sense == ">=":
            lo[i] = rhs
        else:
            lo[i] = hi[i] = rhs

    res = milp(
        c,
        constraints=LinearConstraint(a.tocsr(), lo, hi),
        integrality=np.ones(n),
        bounds=(0, 1),
        options={"time_limit": time_limit},
    )
    if res.status == 2:  # infeasible
        return None
    if not res.success:
        raise RuntimeError(f"external solve failed: {res.message}")
    return int(round(res.fun))
