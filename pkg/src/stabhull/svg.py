"""Deterministic SVG drawing of an instance and a result."""

from __future__ import annotations

import math

import numpy as np

from .geom_core import bounding_box
from .io import Instance, Result

W = H = 600
MARGIN = 30


def _fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


def render_svg(result: Result, inst: Instance) -> str:
    """SVG 1.1 text: objects in gray, polygon or path outlined, witnesses as dots.

    The canvas transform depends only on the instance bounding box, padded
    by a quarter of its span. Unbounded objects are clipped to that box.
    """
    xmin, ymin, xmax, ymax = bounding_box(inst.objects)
    span = max(xmax - xmin, ymax - ymin, 1e-9)
    pad = 0.25 * span
    xmin, ymin, xmax, ymax = xmin - pad, ymin - pad, xmax + pad, ymax + pad
    span = max(xmax - xmin, ymax - ymin)
    s = (W - 2 * MARGIN) / span
    box = (xmin, ymin, xmin + span, ymin + span)

    def tx(p):
        return _fmt(MARGIN + (p[0] - xmin) * s), _fmt(H - MARGIN - (p[1] - ymin) * s)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        '<g id="objects" stroke="#888888" fill="#cccccc" stroke-width="2">',
    ]
    for o in inst.objects:
        S = o.shape(box)
        if len(S) == 0:
            continue
        if len(S) == 1:
            x, y = tx(S[0])
            out.append(f'<circle cx="{x}" cy="{y}" r="3"/>')
        elif len(S) == 2:
            (x1, y1), (x2, y2) = tx(S[0]), tx(S[1])
            out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        else:
            pts = " ".join(",".join(tx(p)) for p in S)
            out.append(f'<polygon points="{pts}" fill-opacity="0.5"/>')
    out.append("</g>")
    has_poly = result.polygon is not None and len(result.polygon) > 0 and math.isfinite(result.value)
    if has_poly:
        P = np.asarray(result.polygon, dtype=float).reshape(-1, 2)
        cmds = " ".join(("M" if i == 0 else "L") + " " + " ".join(tx(p)) for i, p in enumerate(P))
        if result.objective != "tour":
            cmds += " Z"
        out.append(f'<path id="solution" d="{cmds}" fill="none" stroke="#c0392b" stroke-width="2"/>')
        out.append('<g id="witnesses" fill="#1f5fa8">')
        for k in sorted(result.witnesses):
            x, y = tx(result.witnesses[k])
            out.append(f'<circle cx="{x}" cy="{y}" r="4"/>')
        out.append("</g>")
    else:
        out.append(f'<text x="{W // 2}" y="{MARGIN}" text-anchor="middle" font-family="monospace" '
                   f'font-size="16" fill="#c0392b">no solution ({result.status})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
