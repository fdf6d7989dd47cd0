"""Self-contained SVG heatmaps for result matrices. No plotting dependency;
the files are small enough to hand-assemble and diff in review."""

from __future__ import annotations

from typing import Optional, Sequence

CELL_W = 84
CELL_H = 44
LEFT = 110
TOP = 64
FONT = "font-family='monospace' font-size='13'"

# Linear two-colour ramp; lo maps to the light end, hi to the dark end.
_LIGHT = (239, 246, 255)
_DARK = (18, 60, 115)
_EMPTY = "#d9d9d9"


def _colour(value: float, lo: float, hi: float) -> str:
    if hi <= lo:
        t = 0.0
    else:
        t = min(1.0, max(0.0, (value - lo) / (hi - lo)))
    rgb = tuple(
        round(a + (b - a) * t) for a, b in zip(_LIGHT, _DARK)
    )
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def _text_colour(value: float, lo: float, hi: float) -> str:
    t = 0.0 if hi <= lo else (value - lo) / (hi - lo)
    return "#ffffff" if t > 0.55 else "#111111"


def render_heatmap(
    grid: Sequence[Sequence[Optional[float]]],
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    *,
    title: str,
    row_axis: str = "",
    col_axis: str = "",
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    fmt: str = "{:.0f}",
) -> str:
    values = [v for row in grid for v in row if v is not None]
    if lo is None:
        lo = min(values, default=0.0)
    if hi is None:
        hi = max(values, default=1.0)
    width = LEFT + CELL_W * len(col_labels) + 20
    height = TOP + CELL_H * len(row_labels) + 46
    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}'"
        f" height='{height}' viewBox='0 0 {width} {height}'>",
        f"<rect width='{width}' height='{height}' fill='white'/>",
        f"<text x='{LEFT}' y='22' {FONT} font-size='15'>{title}</text>",
        f"<text x='{LEFT}' y='40' {FONT} fill='#555555'>"
        f"{col_axis} → / {row_axis} ↓, linear scale"
        f" {fmt.format(lo)}..{fmt.format(hi)}</text>",
    ]
    for j, label in enumerate(col_labels):
        x = LEFT + j * CELL_W + CELL_W // 2
        parts.append(
            f"<text x='{x}' y='{TOP - 8}' text-anchor='middle' {FONT}>"
            f"{label}</text>"
        )
    for i, (label, row) in enumerate(zip(row_labels, grid)):
        y = TOP + i * CELL_H
        parts.append(
            f"<text x='{LEFT - 10}' y='{y + CELL_H // 2 + 4}'"
            f" text-anchor='end' {FONT}>{label}</text>"
        )
        for j, value in enumerate(row):
            x = LEFT + j * CELL_W
            if value is None:
                fill, text, tcol = _EMPTY, "-", "#555555"
            else:
                fill = _colour(value, lo, hi)
                text = fmt.format(value)
                tcol = _text_colour(value, lo, hi)
            parts.append(
                f"<rect x='{x}' y='{y}' width='{CELL_W - 2}'"
                f" height='{CELL_H - 2}' fill='{fill}' stroke='#ffffff'/>"
            )
            parts.append(
                f"<text x='{x + (CELL_W - 2) // 2}' y='{y + CELL_H // 2 + 4}'"
                f" text-anchor='middle' {FONT} fill='{tcol}'>{text}</text>"
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_heatmap(path: str, *args, **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(render_heatmap(*args, **kwargs))
