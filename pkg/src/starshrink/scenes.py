"""Shipped scene catalog.

Every scene is a plain spec dict (the parsed form of its scene file), so
the file round-trip is exact; ``build(name)`` assembles the bundle.  All
element geometry sits inside the open unit disc so charts satisfy the
image bound, and null families are laid out in radial-excess bands with a
clear gap so squeeze band selection has room.

The segment scene used by the quotient-metric oracle is built
programmatically (its one-dimensional element has no file form).
"""

from __future__ import annotations

import math

import numpy as np

from .decomposition import Decomposition, Scene
from .geometry import CompactSample, Disc, RadiusFunction, Segment, StarlikeSet
from .scene_io import SceneBundle, assemble_scene
from .starlike import NullCollection, eccentric_disc_radii


def _starlike_element(el_id, origin, radii, collar):
    return {
        "id": el_id,
        "kind": "starlike",
        "origin": tuple(float(v) for v in origin),
        "radii": [float(r) for r in radii],
        "collar": float(collar),
    }


def _stage(chart, domain, image_origin, image_radii, activation_center, activation_radius, collar):
    return {
        "chart": chart,
        "domain": domain,
        "image_origin": tuple(float(v) for v in image_origin),
        "image_radii": [float(r) for r in image_radii],
        "activation_center": tuple(float(v) for v in activation_center),
        "activation_radius": float(activation_radius),
        "collar": float(collar),
    }


def _null_family_specs() -> list[dict]:
    """Fifty discs: four avoidably big, the rest in a carried excess band."""
    main = _NULL_FAMILY_MAIN
    rho = RadiusFunction(main)
    elements = []
    big_angles = [0.3, 1.9, 3.5, 5.1]
    for k in range(1, 5):
        r = 0.1 / k
        ang = big_angles[k - 1]
        t = rho(ang) + 0.28 + r
        center = (t * math.cos(ang), t * math.sin(ang))
        elements.append(_starlike_element(f"t{k:02d}", center, [r] * 8, 0.02))
    ang = 0.0
    ring_gap = 0.022
    for k in range(5, 51):
        r = 0.1 / k
        t_prev = rho(ang) + 0.025 + r
        ang += (2.0 * (0.1 / max(k - 1, 4)) + ring_gap) / t_prev if k > 5 else 0.0
        t = rho(ang) + 0.025 + r
        center = (t * math.cos(ang), t * math.sin(ang))
        elements.append(_starlike_element(f"t{k:02d}", center, [r] * 8, 0.01))
    return elements


_PL_STAR_RADII = [0.55, 0.42, 0.6, 0.35, 0.5, 0.28, 0.45, 0.38,
                  0.62, 0.3, 0.52, 0.4, 0.58, 0.33, 0.48, 0.44]
_ECC_STAR_RADII = [0.45, 0.3, 0.5, 0.25, 0.42, 0.35, 0.48, 0.28,
                   0.44, 0.32, 0.5, 0.3, 0.46, 0.27, 0.52, 0.36]
_NULL_FAMILY_MAIN = [0.38, 0.4, 0.37, 0.39, 0.41, 0.38, 0.36, 0.39,
                     0.4, 0.38, 0.37, 0.4, 0.39, 0.37, 0.38, 0.4]
_TWO_LOBE_A = [0.26, 0.25, 0.235, 0.225, 0.23, 0.245, 0.26, 0.27,
               0.275, 0.265, 0.25, 0.24, 0.23, 0.235, 0.25, 0.26]
_THREE_STAGE_A = [0.29, 0.28, 0.27, 0.28, 0.29, 0.3, 0.29, 0.28,
                  0.27, 0.26, 0.27, 0.28, 0.29, 0.3, 0.29, 0.28]
_THREE_STAGE_B = [0.25, 0.24, 0.25, 0.26, 0.25, 0.24, 0.25, 0.26,
                  0.25, 0.24, 0.25, 0.26, 0.25, 0.24, 0.25, 0.26]


def scene_specs() -> dict[str, dict]:
    """All shipped scene specs, keyed by name."""
    two_lobe_b = eccentric_disc_radii((0.0, 0.0), (0.15, 0.0), 0.175, 16)
    three_stage_c = eccentric_disc_radii((0.3, 0.0), (0.45, 0.0), 0.18, 16)
    specs = {
        "single_disc": {
            "name": "single_disc",
            "mesh": 0.03,
            "domain": ["disc", 0.0, 0.0, 1.2],
            "u": ["disc", 0.0, 0.0, 0.9],
            "elements": [_starlike_element("disc", (0.0, 0.0), [0.5] * 16, 0.15)],
        },
        "four_spike_star": {
            "name": "four_spike_star",
            "mesh": 0.025,
            "domain": ["disc", 0.0, 0.0, 1.1],
            "u": ["disc", 0.0, 0.0, 0.95],
            "elements": [
                _starlike_element("spikes", (0.0, 0.0), [0.6, 0.12] * 4, 0.1)
            ],
        },
        "pl_star": {
            "name": "pl_star",
            "mesh": 0.025,
            "domain": ["disc", 0.0, 0.0, 1.1],
            "u": ["disc", 0.0, 0.0, 0.95],
            "elements": [_starlike_element("star", (0.0, 0.0), _PL_STAR_RADII, 0.1)],
        },
        "eccentric_star": {
            "name": "eccentric_star",
            "mesh": 0.025,
            "domain": ["disc", 0.0, 0.0, 1.1],
            "u": ["disc", 0.0, 0.0, 0.95],
            "elements": [
                _starlike_element("star", (0.15, -0.1), _ECC_STAR_RADII, 0.1)
            ],
        },
        "null_family_star": {
            "name": "null_family_star",
            "mesh": 0.02,
            "domain": ["disc", 0.0, 0.0, 1.15],
            "u": ["disc", 0.0, 0.0, 0.98],
            "elements": [
                _starlike_element("main", (0.0, 0.0), _NULL_FAMILY_MAIN, 0.12)
            ] + _null_family_specs(),
        },
        "mixed_five": {
            "name": "mixed_five",
            "mesh": 0.025,
            "domain": ["disc", 0.0, 0.0, 1.2],
            "u": ["disc", 0.0, 0.0, 0.98],
            "elements": [
                _starlike_element("a", (-0.35, 0.1), [0.4] * 16, 0.08),
                _starlike_element("b", (0.48, -0.3), [0.25] * 16, 0.07),
                _starlike_element("c", (0.28, 0.55), [0.15] * 16, 0.07),
                _starlike_element("d", (-0.3, -0.52), [0.025] * 16, 0.02),
                _starlike_element("e", (0.62, 0.3), [0.01] * 16, 0.01),
            ],
        },
        "two_lobe": {
            "name": "two_lobe",
            "mesh": 0.0095,
            "domain": ["disc", 0.0, 0.0, 0.65],
            "u": ["disc", 0.0, 0.0, 0.55],
            "elements": [
                {
                    "id": "main",
                    "kind": "recursive",
                    "tail": (0.0, 0.0),
                    "stages": [
                        _stage(["identity"], ["disc", 0.0, 0.0, 0.42],
                               (0.0, 0.0), _TWO_LOBE_A, (0.0, 0.0), 0.2, 0.05),
                        _stage(["identity"], ["disc", 0.15, 0.0, 0.28],
                               (0.0, 0.0), list(two_lobe_b.radii), (0.0, 0.0), 0.06, 0.03),
                    ],
                },
                _starlike_element("blip1", (-0.42, 0.28), [0.012] * 8, 0.012),
                _starlike_element("blip2", (0.33, -0.38), [0.012] * 8, 0.012),
            ],
        },
        "three_stage": {
            "name": "three_stage",
            "mesh": 0.015,
            "domain": ["disc", 0.3, 0.0, 0.9],
            "u": ["disc", 0.3, 0.0, 0.8],
            "elements": [
                {
                    "id": "chain",
                    "kind": "recursive",
                    "tail": (0.3, 0.0),
                    "stages": [
                        _stage(["identity"], ["disc", 0.3, 0.0, 0.55],
                               (0.3, 0.0), _THREE_STAGE_A, (0.3, 0.0), 0.24, 0.08),
                        _stage(["identity"], ["disc", 0.3, 0.0, 0.5],
                               (0.3, 0.0), _THREE_STAGE_B, (0.3, 0.0), 0.2, 0.07),
                        _stage(["identity"], ["disc", 0.45, 0.0, 0.3],
                               (0.3, 0.0), list(three_stage_c.radii), (0.3, 0.0), 0.1, 0.05),
                    ],
                },
                _starlike_element("blip", (-0.25, 0.45), [0.02] * 8, 0.02),
            ],
        },
    }
    return specs


SCENE_NAMES = [
    "single_disc",
    "four_spike_star",
    "pl_star",
    "eccentric_star",
    "null_family_star",
    "mixed_five",
    "two_lobe",
    "three_stage",
]

SQUEEZE_SCENES = SCENE_NAMES[:5]


def build(name: str) -> SceneBundle:
    specs = scene_specs()
    if name not in specs:
        raise KeyError(f"unknown scene {name!r}; shipped: {', '.join(SCENE_NAMES)}")
    return assemble_scene(specs[name])


def segment_scene(length: float = 3.0, mesh: float = 0.05,
                  covered: tuple[float, float] = (1.0, 2.0)):
    """One-dimensional strip scene with one element covering a sub-segment.

    Returns (scene, decomposition).  The quotient distance between the two
    strip ends is the uncovered length, up to sampling error.
    """
    domain = Segment((0.0, 0.0), (length, 0.0))
    scene = Scene.build(domain, mesh, name="segment")
    pts = scene.sample.points
    lo, hi = covered
    mask = (pts[:, 0] >= lo - 1e-9) & (pts[:, 0] <= hi + 1e-9)
    element = CompactSample(pts[mask], mesh)
    mid = (lo + hi) / 2.0
    u = Disc((mid, 0.0), (hi - lo) / 2.0 + 4.0 * mesh)
    decomp = Decomposition(scene, NullCollection([element], ["mid"]), u)
    return scene, decomp


def tiny_disc_scene(mesh: float = 0.09):
    """A small disc scene (well under 200 samples) for exact graph oracles."""
    domain = Disc((0.0, 0.0), 0.42)
    star = StarlikeSet((-0.12, 0.0), RadiusFunction([0.08] * 8))
    from .geometry import epsilon_net

    carrier = epsilon_net(star, mesh)
    scene = Scene.build(domain, mesh, extra_points=carrier.points, name="tiny")
    u = Disc((-0.12, 0.0), 0.22)
    decomp = Decomposition(scene, NullCollection([carrier], ["core"]), u)
    return scene, decomp
