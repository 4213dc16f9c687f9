"""SVG 1.1 pictures of a decomposition in the Poincare disk.

The fundamental domain is drawn around its centre; each curve appears as the
pieces of its axis lifts that cross the domain.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from . import geodesy as gd

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
]

SIZE = 640
RADIUS = 280.0
LEGEND_LINE = 18


def to_disk(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[1:] / (1.0 + X[0])


def _screen(p):
    c = SIZE / 2.0
    return c + RADIUS * p[0], c - RADIUS * p[1]


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def geodesic_arc(p, q) -> str:
    """Path data for the geodesic segment between two disk points (no move-to)."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    x2, y2 = _screen(q)
    det = p[0] * q[1] - p[1] * q[0]
    if abs(det) < 1e-9:
        return f"L {_fmt(x2)} {_fmt(y2)}"
    # circle orthogonal to the unit circle: 2 c.p = |p|^2 + 1, same for q
    A = 2.0 * np.array([p, q])
    c = np.linalg.solve(A, [p @ p + 1.0, q @ q + 1.0])
    r = float(np.sqrt(max(c @ c - 1.0, 0.0)))
    cs = np.array(_screen(c))
    ps, qs = np.array(_screen(p)), np.array(_screen(q))
    u, v = ps - cs, qs - cs
    sweep = 1 if u[0] * v[1] - u[1] * v[0] > 0 else 0
    rs = r * RADIUS
    return f"A {_fmt(rs)} {_fmt(rs)} 0 0 {sweep} {_fmt(x2)} {_fmt(y2)}"


def _polyline(points) -> str:
    x, y = _screen(points[0])
    parts = [f"M {_fmt(x)} {_fmt(y)}"]
    for a, b in zip(points[:-1], points[1:]):
        parts.append(geodesic_arc(a, b))
    return " ".join(parts)


def render_svg(group, curves) -> str:
    """SVG text for the domain of ``group`` and the given curve classes."""
    geo = gd.geometry(group)
    D = geo.domain
    verts = [to_disk(v) for v in D.vertices]
    height = SIZE + LEGEND_LINE * (len(curves) + 1)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{height}" '
        f'viewBox="0 0 {SIZE} {height}">',
        f"<title>{escape(f'genus {group.genus}: {len(curves)} curves')}</title>",
        f'<circle cx="{SIZE / 2:.1f}" cy="{SIZE / 2:.1f}" r="{RADIUS:.1f}" fill="none" stroke="#bbbbbb" stroke-width="1"/>',
        f'<path id="domain" d="{_polyline(verts + verts[:1])} Z" fill="#f4f4f4" stroke="#000000" stroke-width="1.2"/>',
    ]
    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        d = " ".join(_polyline([to_disk(ch.start), to_disk(ch.end)]) for ch in c.chords)
        out.append(f'<path id="curve-{i}" d="{d}" fill="none" stroke="{color}" stroke-width="2"/>')
    y = SIZE + LEGEND_LINE * 0.5
    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        y += LEGEND_LINE
        out.append(f'<rect x="12" y="{y - 10:.1f}" width="12" height="12" fill="{color}"/>')
        label = escape(f"curve {i}: length {c.length:.9g}")
        out.append(f'<text x="30" y="{y:.1f}" font-family="sans-serif" font-size="13">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
