"""SVG 1.1 rendering of floorplans, pins, and feedthrough overlays.

Module regions are painted row by row with crisp rectilinear outlines on
top. Assigned pins show as black boundary dots; feedthrough paths as
polylines through their pin chains, colored by feedthrough module count
(deeper color = more crossed modules). Pre-placed modules render grey.
"""

import numpy as np

from . import geometry
from .model import FloorplanState

_PPM_FILL = "#b0b0b0"


def _module_fill(mid: int) -> str:
    hue = (mid * 47) % 360
    return f"hsl({hue},62%,80%)"


def _ft_color(ft_num: int, max_ft: int) -> str:
    # light to deep red ramp
    frac = min(1.0, ft_num / max(1, max_ft))
    light = 78 - int(48 * frac)
    return f"hsl(4,82%,{light}%)"


def render_svg(
    state: FloorplanState,
    assignment=None,
    filter_module: int | None = None,
    cell_px: float = 4.0,
) -> str:
    """Render the layout (plus optional assignment overlay) to SVG text."""
    p = state.problem
    w_px, h_px = p.width * cell_px, p.height * cell_px

    def sx(x: float) -> float:
        return x * cell_px

    def sy(y: float) -> float:
        return (p.height - y) * cell_px  # grid y up, SVG y down

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w_px:.0f}" height="{h_px:.0f}" viewBox="0 0 {w_px:.0f} {h_px:.0f}">',
        f'<rect x="0" y="0" width="{w_px:.0f}" height="{h_px:.0f}" fill="white"/>',
    ]

    for m in p.modules:
        mask = state.region_mask(m.id)
        if not mask.any():
            continue
        fill = _PPM_FILL if m.preplaced else _module_fill(m.id)
        rows = []
        for y in np.nonzero(mask.any(axis=1))[0]:
            xs = np.nonzero(mask[y])[0]
            brk = np.nonzero(np.diff(xs) != 1)[0] + 1
            for run in np.split(xs, brk):
                rows.append(
                    f'<rect x="{sx(run[0]):.2f}" y="{sy(y + 1):.2f}" '
                    f'width="{run.size * cell_px:.2f}" height="{cell_px:.2f}" '
                    f'fill="{fill}" stroke="{fill}" stroke-width="0.4"/>'
                )
        parts.append(f'<g id="module-{m.id}">' + "".join(rows) + "</g>")
        for seg in geometry.boundary_segments(state.canvas, m.id):
            (x1, y1) = seg.point_at(0.0)
            (x2, y2) = seg.point_at(float(seg.length))
            parts.append(
                f'<line x1="{sx(x1):.2f}" y1="{sy(y1):.2f}" x2="{sx(x2):.2f}" '
                f'y2="{sy(y2):.2f}" stroke="black" stroke-width="0.9"/>'
            )
        cx, cy = geometry.region_center(mask)
        parts.append(
            f'<text x="{sx(cx):.2f}" y="{sy(cy):.2f}" font-size="{3 * cell_px:.1f}" '
            f'text-anchor="middle" dominant-baseline="middle" '
            f'font-family="sans-serif">{m.name}</text>'
        )

    if assignment is not None:
        centers = state.centers()
        ft = [
            o for o in assignment.outcomes
            if o.kind == "feedthrough"
            and (filter_module is None or filter_module in o.path)
        ]
        chain_pts: dict[int, list[tuple[float, float]]] = {}
        for net_id, mid, px, py in assignment.pins:
            chain_pts.setdefault(net_id, [])
            pt = (px, py)
            if pt not in chain_pts[net_id]:
                chain_pts[net_id].append(pt)
        max_ft = max((o.ft_num for o in ft), default=1)
        for o in ft:
            pts = (
                [centers[o.path[0]]] + chain_pts.get(o.net_id, []) + [centers[o.path[-1]]]
            )
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" '
                f'stroke="{_ft_color(o.ft_num, max_ft)}" stroke-width="1.4" '
                f'opacity="0.9"/>'
            )
        keep_nets = None
        if filter_module is not None:
            keep_nets = {o.net_id for o in ft}
            for o in assignment.outcomes:
                if o.kind == "direct" and filter_module in o.path:
                    keep_nets.add(o.net_id)
        for net_id, mid, px, py in assignment.pins:
            if keep_nets is not None and net_id not in keep_nets:
                continue
            parts.append(
                f'<circle cx="{sx(px):.2f}" cy="{sy(py):.2f}" r="{0.35 * cell_px:.2f}" '
                f'fill="black"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
