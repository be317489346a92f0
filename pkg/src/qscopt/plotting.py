"""Deterministic SVG line charts from trace CSVs (no timestamps, fixed layout)."""

from __future__ import annotations

import csv
import os

from .errors import ConfigError

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 20, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _read_trace(csv_path: str):
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {csv_path}: {exc}") from None
    if not rows:
        raise ConfigError(f"{csv_path}: empty file")
    header, data = rows[0], rows[1:]
    if len(header) < 2:
        raise ConfigError(f"{csv_path}: need at least two columns")
    if not data:
        raise ConfigError(f"{csv_path}: no data rows")
    try:
        values = [[float(cell) for cell in row] for row in data]
    except ValueError as exc:
        raise ConfigError(f"{csv_path}: non-numeric cell ({exc})") from None
    if any(len(row) != len(header) for row in values):
        raise ConfigError(f"{csv_path}: ragged rows")
    return header, values


def emit_plot(csv_path: str, out_path: str):
    """Render a two-or-more column CSV as a polyline chart with axis labels
    from the header row and a legend when several series are present."""
    header, values = _read_trace(csv_path)
    xs = [row[0] for row in values]
    series = [(header[i], [row[i] for row in values]) for i in range(1, len(header))]

    x_lo, x_hi = min(xs), max(xs)
    ys_all = [y for _, ys in series for y in ys]
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'font-family="sans-serif" font-size="13">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(f'<text x="{_fmt(px(xv))}" y="{HEIGHT - MARGIN_B + 18}" '
                     f'text-anchor="middle">{_fmt(xv)}</text>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py(yv) + 4)}" '
                     f'text-anchor="end">{_fmt(yv)}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2:.6g}" y="{HEIGHT - 12}" '
                 f'text-anchor="middle">{header[0]}</text>')

    for i, (name, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
    if len(series) == 1:
        parts.append(f'<text x="16" y="{MARGIN_T + plot_h / 2:.6g}" '
                     f'transform="rotate(-90 16 {MARGIN_T + plot_h / 2:.6g})" '
                     f'text-anchor="middle">{series[0][0]}</text>')
    else:
        for i, (name, _) in enumerate(series):
            y = MARGIN_T + 16 + 18 * i
            color = PALETTE[i % len(PALETTE)]
            parts.append(f'<line x1="{MARGIN_L + 10}" y1="{y - 4}" '
                         f'x2="{MARGIN_L + 34}" y2="{y - 4}" stroke="{color}" '
                         f'stroke-width="1.5"/>')
            parts.append(f'<text x="{MARGIN_L + 40}" y="{y}">{name}</text>')
    parts.append("</svg>")

    tmp = out_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    os.replace(tmp, out_path)
