"""Minimal deterministic SVG rendering of tidy CSV plot data."""

from __future__ import annotations

import csv
import math

WIDTH, HEIGHT, MARGIN = 640, 420, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def read_series(path, x: str, y: str, series=None):
    """``{label: [(x, y), ...]}`` in file order; rows with empty cells are skipped."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for col in (x, y, series):
            if col is not None and col not in (reader.fieldnames or ()):
                raise ValueError(f"{path}: no column {col!r}")
        out = {}
        for row in reader:
            if row[x] == "" or row[y] == "":
                continue
            label = row[series] if series else y
            out.setdefault(label, []).append((float(row[x]), float(row[y])))
    return out


def render_svg(data, kind="line", x_label="", y_label="", title="") -> str:
    pts = [p for s in data.values() for p in s if math.isfinite(p[0]) and math.isfinite(p[1])]
    if not pts:
        raise ValueError("nothing to plot")
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" font-size="10">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{sy(t) + 3:.2f}" text-anchor="end" font-size="10">{_fmt(t)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{x_label}</text>')
    out.append(f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {HEIGHT / 2})">{y_label}</text>')
    for i, (label, series) in enumerate(data.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = [(sx(a), sy(b)) for a, b in series if math.isfinite(a) and math.isfinite(b)]
        if kind == "line":
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in coords)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{d}"/>')
        else:
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>' for a, b in coords)
        ly = MARGIN + 14 * i
        out.append(f'<rect x="{WIDTH - MARGIN + 4}" y="{ly - 8}" width="8" height="8" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN + 16}" y="{ly}" font-size="10">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(path, out_path, kind="line", x="snr", y="value", series="method", title="") -> None:
    """Render the CSV at ``path`` to an SVG file; identical input gives identical bytes."""
    if kind not in ("line", "scatter"):
        raise ValueError("kind must be 'line' or 'scatter'")
    svg = render_svg(read_series(path, x, y, series), kind, x, y, title)
    with open(out_path, "w", newline="\n") as fh:
        fh.write(svg)
