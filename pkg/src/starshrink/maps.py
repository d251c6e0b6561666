"""Composable, exactly invertible planar homeomorphisms with declared supports.

The catalog is closed: identity, affine, radial piecewise-linear maps about
an origin, and chart conjugates of other catalog maps.  Each map carries a
hand-written analytic inverse, so inverse-composition errors stay at float
rounding scale and certification reports can be trusted.

Support semantics are exact: points outside a map's support region are
returned bit-identical (copied, never recomputed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    TWO_PI,
    CompactSample,
    Point2,
    PullbackRegion,
    RadiusFunction,
    Region,
    StarlikeSet,
    as_point_array,
)


class PlanarMap:
    """Base class for catalog maps. Subclasses are immutable values."""

    support: Optional[Region] = None  # None means the whole plane

    def apply(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "PlanarMap":
        raise NotImplementedError

    def __call__(self, p):
        arr, single = as_point_array(p)
        out = self.apply(arr)
        return Point2(*out[0]) if single else out

    def to_spec(self) -> list:
        raise NotImplementedError


class Identity(PlanarMap):
    def apply(self, pts: np.ndarray) -> np.ndarray:
        return np.array(pts, dtype=float, copy=True)

    def inverse(self) -> "Identity":
        return self

    def time_scaled(self, tau: float) -> "Identity":
        return self

    def to_spec(self) -> list:
        return ["identity"]


class Affine(PlanarMap):
    """p -> A p + b with invertible A; inverse computed in closed form."""

    def __init__(self, matrix, offset):
        a = np.asarray(matrix, dtype=float).reshape(2, 2)
        b = np.asarray(offset, dtype=float).reshape(2)
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if abs(det) < 1e-14:
            raise ValueError("affine matrix is singular")
        self.matrix = a
        self.offset = b
        self._det = det

    @staticmethod
    def scaling(factor: float, about=(0.0, 0.0)) -> "Affine":
        c = np.asarray(about, dtype=float)
        return Affine(np.eye(2) * factor, c - factor * c)

    @staticmethod
    def translation(dx: float, dy: float) -> "Affine":
        return Affine(np.eye(2), (dx, dy))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.matrix.T + self.offset

    def inverse(self) -> "Affine":
        a = self.matrix
        inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / self._det
        return Affine(inv, -inv @ self.offset)

    @property
    def is_translation(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(2)))

    def to_spec(self) -> list:
        a = self.matrix
        return ["affine", a[0, 0], a[0, 1], a[1, 0], a[1, 1], self.offset[0], self.offset[1]]


class RadialMap(PlanarMap):
    """Piecewise-linear radial map about an origin.

    ``src`` and ``dst`` are (K, M) knot arrays over M uniform angles: on the
    ray at sampled angle j the map sends radial coordinate src[k, j] to
    dst[k, j], is linear between knots (with the implicit knot 0 -> 0), and
    is the identity at and beyond src[-1, j].  Knot radii interpolate
    piecewise-linearly in angle, so the map is a homeomorphism of the plane
    that preserves every ray through the origin.  Requiring
    dst[-1] == src[-1] pins the boundary, making the support exactly the
    starlike body with radius profile src[-1].
    """

    def __init__(self, origin, src, dst):
        o = np.asarray(origin, dtype=float).reshape(2)
        s = np.asarray(src, dtype=float)
        d = np.asarray(dst, dtype=float)
        if s.ndim != 2 or s.shape != d.shape or s.shape[1] < 8:
            raise ValueError("knot arrays must be (K, M) with M >= 8 and equal shapes")
        if np.any(s[0] <= 0) or np.any(d[0] <= 0):
            raise ValueError("first knot radii must be positive")
        if np.any(np.diff(s, axis=0) <= 0) or np.any(np.diff(d, axis=0) <= 0):
            raise ValueError("knot radii must be strictly increasing along each ray")
        if not np.array_equal(s[-1], d[-1]):
            raise ValueError("outermost knots must be fixed (identity outside support)")
        self.origin = o
        self.src = s
        self.dst = d
        self.m = s.shape[1]

    @property
    def support(self) -> StarlikeSet:
        return StarlikeSet(self.origin, RadiusFunction(self.src[-1]))

    def _knots_at(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = (theta % TWO_PI) * (self.m / TWO_PI)
        j = np.floor(a).astype(int) % self.m
        lam = a - np.floor(a)
        jn = (j + 1) % self.m
        s = (1.0 - lam) * self.src[:, j] + lam * self.src[:, jn]
        d = (1.0 - lam) * self.dst[:, j] + lam * self.dst[:, jn]
        return s, d

    def apply(self, pts: np.ndarray) -> np.ndarray:
        out = np.array(pts, dtype=float, copy=True)
        v = pts - self.origin
        t = np.linalg.norm(v, axis=1)
        theta = np.arctan2(v[:, 1], v[:, 0])
        s, d = self._knots_at(theta)
        inside = (t < s[-1]) & (t > 0.0)
        if not np.any(inside):
            return out
        ti = t[inside]
        si = s[:, inside]
        di = d[:, inside]
        k = np.sum(ti >= si, axis=0)  # index of segment containing ti
        cols = np.arange(len(ti))
        lo_s = np.where(k == 0, 0.0, si[np.maximum(k - 1, 0), cols])
        lo_d = np.where(k == 0, 0.0, di[np.maximum(k - 1, 0), cols])
        hi_s = si[k, cols]
        hi_d = di[k, cols]
        g = lo_d + (ti - lo_s) * (hi_d - lo_d) / (hi_s - lo_s)
        out[inside] = self.origin + v[inside] * (g / ti)[:, None]
        return out

    def inverse(self) -> "RadialMap":
        return RadialMap(self.origin, self.dst, self.src)

    def time_scaled(self, tau: float) -> "RadialMap":
        """Map with knot displacements scaled by tau in [0, 1].

        Convex combinations of strictly increasing knot columns stay
        strictly increasing, so every intermediate time is a homeomorphism.
        """
        d = (1.0 - tau) * self.src + tau * self.dst
        d[-1] = self.src[-1]  # boundary row stays pinned bit-exactly
        return RadialMap(self.origin, self.src, d)

    def to_spec(self) -> list:
        return ["radial", self.origin[0], self.origin[1], self.src.tolist(), self.dst.tolist()]


class Conjugate(PlanarMap):
    """Chart conjugate f^{-1} . g . f of an inner map g by a chart map f.

    The support is the pullback of the inner support through the chart;
    points outside it are copied bit-exactly.
    """

    def __init__(self, chart: PlanarMap, inner: PlanarMap):
        if inner.support is None:
            raise ValueError("conjugated inner map needs a bounded support")
        self.chart = chart
        self.inner = inner
        self._chart_inv = chart.inverse()

    @property
    def support(self) -> PullbackRegion:
        return PullbackRegion(self.chart, self.inner.support)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        out = np.array(pts, dtype=float, copy=True)
        q = self.chart.apply(pts)
        mask = self.inner.support.contains(q)
        if np.any(mask):
            out[mask] = self._chart_inv.apply(self.inner.apply(q[mask]))
        return out

    def inverse(self) -> "Conjugate":
        return Conjugate(self.chart, self.inner.inverse())

    def time_scaled(self, tau: float) -> "Conjugate":
        return Conjugate(self.chart, self.inner.time_scaled(tau))

    def to_spec(self) -> list:
        return ["conjugate", self.chart.to_spec(), self.inner.to_spec()]


class Composed(PlanarMap):
    """Composition of catalog maps as a single map, applied left to right.

    Used where an operation needs one map object (e.g. a transported chart)
    rather than a chain of scene homeomorphisms.
    """

    def __init__(self, maps: list[PlanarMap]):
        if not maps:
            raise ValueError("composition needs at least one map")
        self.maps = list(maps)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        out = np.array(pts, dtype=float, copy=True)
        for h in self.maps:
            out = h.apply(out)
        return out

    def inverse(self) -> "Composed":
        return Composed([h.inverse() for h in reversed(self.maps)])

    def to_spec(self) -> list:
        return ["composed"] + [h.to_spec() for h in self.maps]


def compose_affine(outer: Affine, inner: Affine) -> Affine:
    """The affine map outer(inner(p)), merged in closed form."""
    return Affine(outer.matrix @ inner.matrix, outer.matrix @ inner.offset + outer.offset)


class HomeoChain:
    """Ordered composition of catalog maps, applied left to right."""

    def __init__(self, maps: list[PlanarMap] | None = None):
        self.maps = list(maps or [])

    def apply(self, pts: np.ndarray) -> np.ndarray:
        out = np.array(pts, dtype=float, copy=True)
        for h in self.maps:
            out = h.apply(out)
        return out

    def inverse(self) -> "HomeoChain":
        return HomeoChain([h.inverse() for h in reversed(self.maps)])

    def __call__(self, p):
        arr, single = as_point_array(p)
        out = self.apply(arr)
        return Point2(*out[0]) if single else out

    def __len__(self) -> int:
        return len(self.maps)

    def __add__(self, other: "HomeoChain") -> "HomeoChain":
        return HomeoChain(self.maps + other.maps)

    def partial(self, time: float) -> "HomeoChain":
        """Chain truncated at a global time in [0, 1].

        Whole stages before the cut apply fully; the stage containing the
        cut runs at the fractional time via displacement scaling, so every
        intermediate chain is itself a homeomorphism.
        """
        if not self.maps or time >= 1.0:
            return HomeoChain(self.maps)
        if time <= 0.0:
            return HomeoChain([])
        scaled = time * len(self.maps)
        whole = int(math.floor(scaled))
        frac = scaled - whole
        maps = self.maps[:whole]
        if frac > 0.0 and whole < len(self.maps):
            maps = maps + [self.maps[whole].time_scaled(frac)]
        return HomeoChain(maps)

    def to_spec(self) -> list:
        return [h.to_spec() for h in self.maps]


def map_from_spec(spec: list) -> PlanarMap:
    kind = spec[0]
    if kind == "identity":
        return Identity()
    if kind == "affine":
        a11, a12, a21, a22, b1, b2 = spec[1:]
        return Affine([[a11, a12], [a21, a22]], [b1, b2])
    if kind == "radial":
        return RadialMap((spec[1], spec[2]), spec[3], spec[4])
    if kind == "conjugate":
        return Conjugate(map_from_spec(spec[1]), map_from_spec(spec[2]))
    if kind == "composed":
        return Composed([map_from_spec(s) for s in spec[1:]])
    raise ValueError(f"unknown map constructor {kind!r}")


def chain_from_spec(spec: list) -> HomeoChain:
    return HomeoChain([map_from_spec(s) for s in spec])


def evaluate(h, p):
    """Image of a point (or point batch) under a map or chain."""
    return h(p)


def inverse(h):
    """Exact catalog inverse of a map or chain."""
    return h.inverse()


def uniform_distance(f, g, sample: CompactSample, metric=None) -> float:
    """Sup over samples of the target distance between f(x) and g(x).

    ``metric`` maps two (n, 2) arrays to per-row distances; Euclidean when
    omitted.  Pass a quotient pseudometric to measure distances in a
    decomposition quotient.
    """
    a = f.apply(sample.points) if hasattr(f, "apply") else f(sample.points)
    b = g.apply(sample.points) if hasattr(g, "apply") else g(sample.points)
    if metric is None:
        d = np.linalg.norm(a - b, axis=1)
    else:
        d = np.asarray(metric(a, b), dtype=float)
    return float(d.max()) if len(d) else 0.0


@dataclass
class HomeoReport:
    """Numeric certificate that a map behaves as a homeomorphism on a sample."""

    inverse_error: float
    separation_ratio: float
    collisions: int
    support_violations: int
    jacobian_min: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.inverse_error < self.tolerance
            and self.collisions == 0
            and self.support_violations == 0
        )


def check_homeo(h, sample: CompactSample, tol: float) -> HomeoReport:
    """Certify inverse composition, injectivity proxy, and support soundness.

    Failures are reported, not raised.  The separation ratio is the min over
    near pairs of image distance over source distance; the Jacobian column
    is a finite-difference orientation check.
    """
    if not (tol > 0):
        raise ValueError("tol must be > 0")
    pts = sample.points
    hinv = h.inverse()
    img = h.apply(pts)
    err_fwd = np.linalg.norm(hinv.apply(img) - pts, axis=1)
    err_bwd = np.linalg.norm(h.apply(hinv.apply(pts)) - pts, axis=1)
    inverse_error = float(max(err_fwd.max(), err_bwd.max()))

    collisions = 0
    separation_ratio = math.inf
    if len(pts) > 1:
        tree = cKDTree(img)
        collisions = len(tree.query_pairs(1e-12))
        k = min(8, len(pts) - 1)
        d_src, idx = sample.kdtree.query(pts, k=k + 1)
        d_src = d_src[:, 1:]
        idx = idx[:, 1:]
        d_img = np.linalg.norm(img[:, None, :] - img[idx], axis=2)
        ok = d_src > 0
        if np.any(ok):
            separation_ratio = float((d_img[ok] / d_src[ok]).min())

    support_violations = 0
    support = getattr(h, "support", None)
    if support is not None:
        outside = ~support.contains(pts)
        if np.any(outside):
            support_violations = int(np.sum(np.any(img[outside] != pts[outside], axis=1)))

    delta = max(1e-7, 1e-7 * float(np.abs(pts).max() or 1.0))
    fx = h.apply(pts + [delta, 0.0]) - h.apply(pts - [delta, 0.0])
    fy = h.apply(pts + [0.0, delta]) - h.apply(pts - [0.0, delta])
    jac = (fx[:, 0] * fy[:, 1] - fx[:, 1] * fy[:, 0]) / (4.0 * delta * delta)
    jacobian_min = float(jac.min())

    return HomeoReport(
        inverse_error=inverse_error,
        separation_ratio=separation_ratio,
        collisions=collisions,
        support_violations=support_violations,
        jacobian_min=jacobian_min,
        tolerance=tol,
    )
