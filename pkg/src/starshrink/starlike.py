"""Starlike bodies and the staged radial squeeze.

The squeeze construction turns a starlike body, a strictly larger collar,
a null collection of bystander sets, and a size target into a chain of
radial piecewise-linear stages that

  1. is the identity outside the collar body,
  2. maps the body to diameter below the target, and
  3. leaves every bystander either small or pointwise fixed.

The composite of same-origin radial stages is itself a single radial map,
so what matters is the composite per-ray profile.  The profile used here
scales everything out to a chosen inner shell uniformly toward the origin
(so carried bystanders contract exactly), concentrates all radial stretch
in a shell band free of bystander samples, and is the identity beyond that
band (so outer bystanders are fixed bit-exactly).  The band is selected
adaptively from the gaps in the bystander radial-excess profile, and each
accepted profile is factored into stages of bounded distortion by linear
displacement interpolation.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .errors import ShrinkError
from .geometry import CompactSample, RadiusFunction, StarlikeSet, diameter
from .maps import HomeoChain, RadialMap

MAX_STAGES = 32
MAX_BAND_ATTEMPTS = 32


class NullCollection:
    """Finite, pairwise disjoint collection of tagged compact samples.

    Disjointness (positive inter-element distance) is verified up front;
    the stored diameters are the collection's nullity certificate.
    """

    def __init__(self, elements: Sequence[CompactSample], ids: Sequence[str] | None = None):
        elements = list(elements)
        if ids is None:
            ids = [f"e{k}" for k in range(len(elements))]
        ids = [str(i) for i in ids]
        if len(ids) != len(elements):
            raise ValueError("one id per element")
        if len(set(ids)) != len(ids):
            raise ValueError("element ids must be unique")
        min_gap = math.inf
        closest = None
        for a in range(len(elements)):
            for b in range(a + 1, len(elements)):
                d, _ = elements[a].kdtree.query(elements[b].points)
                gap = float(d.min())
                if gap < min_gap:
                    min_gap, closest = gap, (ids[a], ids[b])
        if elements and min_gap <= 0:
            raise ValueError(f"elements {closest[0]} and {closest[1]} are not disjoint")
        self.elements = elements
        self.ids = ids
        self.min_gap = min_gap if len(elements) > 1 else math.inf
        self.diameters = [el.diameter for el in elements]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(zip(self.ids, self.elements))


def contains(e: StarlikeSet, p) -> bool | np.ndarray:
    """Membership in a starlike body; scalar for a single point."""
    arr = np.asarray(p, dtype=float)
    if arr.shape == (2,):
        return bool(e.contains(arr.reshape(1, 2))[0])
    return e.contains(arr)


def eccentric_disc_radii(origin, center, radius: float, m: int = 16) -> RadiusFunction:
    """Radius profile of a disc seen from an interior origin, at m knots.

    The resulting PL body approximates the disc; treat the PL body itself
    as the defined set.
    """
    o = np.asarray(origin, dtype=float)
    c = np.asarray(center, dtype=float)
    d = float(np.linalg.norm(c - o))
    if d >= radius:
        raise ValueError("origin must lie inside the disc")
    phi = math.atan2(c[1] - o[1], c[0] - o[0])
    ang = np.arange(m) * (2.0 * math.pi / m) - phi
    rho = d * np.cos(ang) + np.sqrt(radius**2 - (d * np.sin(ang)) ** 2)
    return RadiusFunction(rho)


def _certify_chain(
    chain: HomeoChain,
    body_pts: np.ndarray,
    bystanders: Optional[NullCollection],
    eps: float,
) -> bool:
    img = chain.apply(body_pts)
    if diameter(img) >= eps:
        return False
    if bystanders is not None:
        for _, el in bystanders:
            el_img = chain.apply(el.points)
            if np.array_equal(el_img, el.points):
                continue
            if diameter(el_img) >= eps:
                return False
    return True


def _stage_factorization(origin, src: np.ndarray, dst: np.ndarray) -> list[RadialMap]:
    """Factor a radial profile into stages of bounded per-stage distortion.

    Stage k maps the knots at displacement fraction (k-1)/K to fraction
    k/K; convex combinations keep knot columns strictly increasing, so all
    stages are valid radial maps and their composite realizes the profile.
    """
    seg_src = np.diff(np.vstack([np.zeros(src.shape[1]), src]), axis=0)
    seg_dst = np.diff(np.vstack([np.zeros(dst.shape[1]), dst]), axis=0)
    max_slope = float((seg_dst / seg_src).max())
    k_stages = min(MAX_STAGES, max(1, math.ceil(math.log2(max(max_slope, 1.0))) + 1))

    def blend(tau: float) -> np.ndarray:
        knots = (1.0 - tau) * src + tau * dst
        knots[-1] = src[-1]  # keep the pinned boundary bit-exact at every time
        return knots

    stages = []
    for k in range(1, k_stages + 1):
        stages.append(RadialMap(origin, blend((k - 1) / k_stages), blend(k / k_stages)))
    return stages


def _candidate_bands(excess_values: np.ndarray, cap: float) -> list[tuple[float, float]]:
    """Sample-free bands (u, v) inside (0, cap), widest first."""
    vals = np.unique(excess_values[(excess_values > 0) & (excess_values < cap)])
    edges = np.concatenate([[0.0], vals, [cap]])
    bands = [
        (float(edges[i]), float(edges[i + 1]))
        for i in range(len(edges) - 1)
        if edges[i + 1] - edges[i] > 1e-9
    ]
    bands.sort(key=lambda b: (-(b[1] - b[0]), b[0]))
    return bands[:MAX_BAND_ATTEMPTS]


def radial_squeeze(
    e: StarlikeSet,
    collar: RadiusFunction,
    bystanders: Optional[NullCollection] = None,
    eps: float = 0.1,
) -> HomeoChain:
    """Staged radial squeeze of a starlike body inside its collar.

    Raises :class:`ShrinkError` with "collar too tight" when the collar
    does not strictly contain the body, "big obstacle inside collar" when a
    bystander of diameter >= eps cannot be avoided by shrinking the working
    collar, and "stage budget exceeded" when no stretch band certifies.
    """
    if not (eps > 0):
        raise ValueError("eps must be > 0")
    rho = e.radius
    if collar.m != rho.m:
        raise ValueError("collar must share the body's angular grid")
    knot_margin = collar.radii - rho.radii
    if knot_margin.min() <= 0:
        raise ShrinkError("collar too tight: body reaches the collar boundary")

    boundary_pts = e.boundary(2048)
    slack = 2.0 * rho.max_radius * (2.0 * math.pi / 2048)
    diam_body = diameter(boundary_pts)
    if diam_body + slack < eps:
        return HomeoChain([])

    m_cap = float(knot_margin.min())
    all_excess = []
    if bystanders is not None:
        for el_id, el in bystanders:
            excess = e.radial_excess(el.points)
            if excess.min() <= 0:
                raise ValueError(f"bystander {el_id} intersects the starlike body")
            all_excess.append(excess)
            if el.diameter >= eps:
                if excess.min() <= 1e-12:
                    raise ShrinkError(f"big obstacle inside collar: element {el_id}")
                m_cap = min(m_cap, 0.5 * float(excess.min()))
    if m_cap < 1e-9:
        raise ShrinkError("big obstacle inside collar: no usable working margin left")

    excess_values = np.concatenate(all_excess) if all_excess else np.empty(0)
    kappa = min(1.0, (eps / 4.0) / max(diam_body, 1e-12))

    for u, v in _candidate_bands(excess_values, m_cap):
        u_eff = max(u, 1e-6 * v)
        src0 = rho.radii + u_eff
        src1 = rho.radii + v
        src = np.vstack([src0, src1])
        dst = np.vstack([kappa * src0, src1])
        stages = _stage_factorization(e.origin, src, dst)
        chain = HomeoChain(stages)
        if _certify_chain(chain, boundary_pts, bystanders, eps):
            return chain
    raise ShrinkError("stage budget exceeded: no stretch band satisfies the size conditions")
