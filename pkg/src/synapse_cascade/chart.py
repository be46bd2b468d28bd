"""Static SVG line charts for trace and metric CSV files.

Self-contained output: no scripts, no external assets, no timestamps, so a
rerun over the same data produces the identical file.
"""

from __future__ import annotations

import math
from pathlib import Path

from .errors import IngestionError, InvalidInputError
from .traceio import atomic_write_text

WIDTH, HEIGHT = 800, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 160, 30, 50
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def read_csv_columns(path) -> dict[str, list]:
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise IngestionError(f"{path}: empty file")
    header = lines[0].split(",")
    cols: dict[str, list] = {h: [] for h in header}
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise IngestionError(f"{path}:{ln}: expected {len(header)} fields")
        for h, v in zip(header, parts):
            cols[h].append(v)
    return cols


def _numeric(values: list, name: str) -> list[float]:
    try:
        return [float(v) for v in values]
    except ValueError as exc:
        raise InvalidInputError(f"column {name!r} is not numeric: {exc}") from exc


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / n))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-12 * span:
        out.append(round(v, 12))
        v += step
    return out or [lo]


def emit_chart(
    csv_path,
    columns: list[str],
    out_path,
    x_column: str | None = None,
    log_x: bool = False,
    title: str | None = None,
) -> None:
    """Render the named CSV columns against the x column as one SVG chart."""
    cols = read_csv_columns(csv_path)
    names = list(cols.keys())
    if not columns:
        raise InvalidInputError("no y columns requested")
    x_name = x_column if x_column is not None else names[0]
    for c in [x_name, *columns]:
        if c not in cols:
            raise InvalidInputError(f"unknown column {c!r} (file has {names})")
    xs = _numeric(cols[x_name], x_name)
    if not xs:
        raise InvalidInputError("no data rows to plot")
    series = {c: _numeric(cols[c], c) for c in columns}

    def xmap_raw(v: float) -> float:
        if log_x:
            if v <= 0.0:
                raise InvalidInputError("log-x needs strictly positive x values")
            return math.log10(v)
        return v

    tx = [xmap_raw(v) for v in xs]
    x_lo, x_hi = min(tx), max(tx)
    ys_all = [v for vals in series.values() for v in vals]
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        label = f"1e{t:g}" if log_x else f"{t:g}"
        parts.append(
            f'<line x1="{x:.2f}" y1="{MARGIN_T + plot_h}" x2="{x:.2f}" '
            f'y2="{MARGIN_T + plot_h + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{MARGIN_T + plot_h + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{label}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{y:.2f}" x2="{MARGIN_L}" y2="{y:.2f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 9}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_name}</text>'
    )
    for idx, (name, vals) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in zip(tx, vals))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = MARGIN_T + 18 + 18 * idx
        lx = MARGIN_L + plot_w + 12
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    atomic_write_text(out_path, "\n".join(parts) + "\n")
