"""Deterministic SVG rendering of scenes, chains, and animation frames.

Output is byte-identical for identical inputs: a fixed canvas transform
derived from the scene domain, fixed-precision coordinate formatting, and
no timestamps or volatile attributes.  Element boundaries are drawn as
polylines (images of boundary samples); frames evaluate the chain at
interpolation times via per-stage displacement scaling, so every frame is
itself a homeomorphism.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .geometry import Disc, Region, Segment, StarlikeSet
from .maps import HomeoChain
from .shrink import RecursiveSet

CANVAS = 720.0
MARGIN = 24.0

_STAGE_COLORS = ["#1f6fb2", "#2ca05a", "#8a4fb8", "#d07a28", "#c23b4e"]


def region_outline(region: Region, n: int = 256) -> np.ndarray:
    if isinstance(region, Disc):
        ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
        return region.center + region.radius * np.column_stack([np.cos(ang), np.sin(ang)])
    if isinstance(region, StarlikeSet):
        b = region.boundary(n)
        return np.vstack([b, b[:1]])
    if isinstance(region, Segment):
        return np.vstack([region.a, region.b])
    raise ValueError(f"no outline for region kind {type(region).__name__}")


class CanvasTransform:
    """Fixed affine map from scene coordinates to SVG pixels."""

    def __init__(self, domain: Region):
        xmin, ymin, xmax, ymax = domain.bounds()
        span = max(xmax - xmin, ymax - ymin, 1e-9)
        self.scale = (CANVAS - 2.0 * MARGIN) / span
        self.cx = (xmin + xmax) / 2.0
        self.cy = (ymin + ymax) / 2.0

    def map(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts)
        out[:, 0] = CANVAS / 2.0 + (pts[:, 0] - self.cx) * self.scale
        out[:, 1] = CANVAS / 2.0 - (pts[:, 1] - self.cy) * self.scale
        return out


def _poly(points: np.ndarray, stroke: str, width: float, fill: str = "none",
          dash: Optional[str] = None) -> str:
    coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in points)
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline points="{coords}" fill="{fill}" stroke="{stroke}" '
        f'stroke-width="{width:.2f}"{dash_attr} stroke-linejoin="round"/>'
    )


def element_outlines(element: RecursiveSet) -> list[tuple[int, np.ndarray]]:
    """(stage index, closed boundary polyline) per filtration stage."""
    out = []
    for i, sc in enumerate(element.stage_charts):
        bdy = sc.image.boundary(192)
        bdy = np.vstack([bdy, bdy[:1]])
        out.append((i, sc.chart.map.inverse().apply(bdy)))
    return out


def render_svg(scene, rse, chain: HomeoChain) -> str:
    """One SVG snapshot: domain, U outline, element boundaries under the chain."""
    tf = CanvasTransform(scene.domain)
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS:.0f}" '
        f'height="{CANVAS:.0f}" viewBox="0 0 {CANVAS:.0f} {CANVAS:.0f}">',
        f'<rect width="{CANVAS:.0f}" height="{CANVAS:.0f}" fill="#ffffff"/>',
        _poly(tf.map(region_outline(scene.domain)), "#202020", 1.5),
        _poly(tf.map(region_outline(rse.u_region)), "#808080", 1.0, dash="6 4"),
    ]
    for element in rse.elements:
        for stage_idx, outline in element_outlines(element):
            color = _STAGE_COLORS[stage_idx % len(_STAGE_COLORS)]
            body.append(_poly(tf.map(chain.apply(outline)), color, 1.8))
    body.append("</svg>")
    return "\n".join(body) + "\n"


def emit_svg(scene, rse, chain: HomeoChain, path) -> None:
    """Write one deterministic SVG snapshot."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(scene, rse, chain))


def emit_frames(scene, rse, chain: HomeoChain, frame_count: int, out_dir) -> list[str]:
    """Write frame_count snapshots at evenly spaced interpolation times."""
    import os

    paths = []
    for f in range(frame_count):
        time = f / max(frame_count - 1, 1)
        partial = chain.partial(time)
        path = os.path.join(out_dir, f"frame_{f:03d}.svg")
        emit_svg(scene, rse, partial, path)
        paths.append(path)
    return paths
