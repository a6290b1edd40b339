"""SVG rendering of a layout: one line per node, optional path traces."""

from __future__ import annotations

import colorsys
from dataclasses import dataclass

import numpy as np

from .errors import CountMismatch, EmptyGraph
from .graph import PangenomeGraph
from .layout import Layout

MARGIN = 0.02
MIN_STROKE_PX = 0.5
MAX_STROKE_PX = 4.0


@dataclass(frozen=True)
class RenderOptions:
    width_px: int = 1600
    stroke_scale: float = 1.0
    color_by_path: bool = False


def path_colors(n: int) -> list[str]:
    """``n`` distinct hex colours spread around the hue circle."""
    out = []
    for k in range(n):
        hue = (k * 0.618033988749895) % 1.0
        r, g, b = colorsys.hls_to_rgb(hue, 0.45, 0.75)
        out.append(f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}")
    # the golden-ratio walk never repeats, but rounding to 24 bits could
    seen = set()
    for k, c in enumerate(out):
        while c in seen:
            c = f"#{(int(c[1:], 16) + 1) % 0x1000000:06x}"
        out[k] = c
        seen.add(c)
    return out


def view_box(layout: Layout) -> tuple[float, float, float, float]:
    """(min_x, min_y, width, height) of the bounding box plus a 2% margin.

    The margin is taken from the larger side so flat layouts keep a
    non-zero height.
    """
    xs = layout.coords[:, 0::2]
    ys = layout.coords[:, 1::2]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = max(x1 - x0, y1 - y0)
    m = MARGIN * span if span > 0 else 1.0
    return x0 - m, y0 - m, (x1 - x0) + 2 * m, (y1 - y0) + 2 * m


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_svg(graph: PangenomeGraph, layout: Layout, options: RenderOptions = RenderOptions(),
               **kwargs) -> str:
    """Render ``layout`` as SVG 1.1 text using only svg/g/line/polyline."""
    if kwargs:
        options = RenderOptions(**{**options.__dict__, **kwargs})
    if graph.n_nodes == 0:
        raise EmptyGraph("nothing to render")
    if layout.n_nodes != graph.n_nodes:
        raise CountMismatch(f"layout has {layout.n_nodes} rows, graph has {graph.n_nodes} nodes")

    vx, vy, vw, vh = view_box(layout)
    units_per_px = vw / options.width_px
    height_px = max(1, round(options.width_px * vh / vw))
    seg = np.hypot(layout.coords[:, 2] - layout.coords[:, 0], layout.coords[:, 3] - layout.coords[:, 1])
    median_px = float(np.median(seg)) / units_per_px
    stroke = min(max(median_px, MIN_STROKE_PX), MAX_STROKE_PX) * units_per_px * options.stroke_scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{options.width_px}" '
        f'height="{height_px}" viewBox="{_fmt(vx)} {_fmt(vy)} {_fmt(vw)} {_fmt(vh)}">',
        f'<g id="nodes" stroke="#000000" stroke-width="{_fmt(stroke)}" stroke-linecap="round">',
    ]
    for sx, sy, ex, ey in layout.coords.tolist():
        out.append(f'<line x1="{_fmt(sx)}" y1="{_fmt(sy)}" x2="{_fmt(ex)}" y2="{_fmt(ey)}"/>')
    out.append("</g>")

    if options.color_by_path and graph.paths:
        mid = (layout.starts + layout.ends) / 2
        out.append(f'<g id="paths" fill="none" stroke-width="{_fmt(stroke / 2)}" stroke-opacity="0.6">')
        for path, color in zip(graph.paths, path_colors(len(graph.paths))):
            pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in mid[path.node_ids].tolist())
            out.append(f'<polyline stroke="{color}" points="{pts}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
