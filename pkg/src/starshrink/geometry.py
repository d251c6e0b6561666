"""Planar metric substrate: points, sampled compact sets, regions, nets.

All geometry is plain float64.  Comparisons take explicit tolerances from
callers; nothing in this module hides a global epsilon.  Sampled sets stand
for closed compact sets; open sets are only ever represented as ``Region``
membership predicates.  Every object is treated as immutable after
construction, so evaluation is safe to fan out over points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

TWO_PI = 2.0 * math.pi

# Duplicate-point resolution for sampled sets.
DUP_TOL = 1e-12


class Point2(NamedTuple):
    """A point of the plane. Coordinates must be finite."""

    x: float
    y: float


def as_point_array(p) -> tuple[np.ndarray, bool]:
    """Coerce a point or an (n, 2) batch to an (n, 2) float array.

    Returns the array and whether the input was a single point.
    """
    a = np.asarray(p, dtype=float)
    if a.shape == (2,):
        return a.reshape(1, 2), True
    if a.ndim == 2 and a.shape[1] == 2:
        return a, False
    raise ValueError(f"expected a point or an (n, 2) array, got shape {a.shape}")


def check_finite(a: np.ndarray, what: str = "coordinates") -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} must be finite (no NaN/inf)")


@dataclass
class CompactSample:
    """Finite sample of a compact planar set.

    ``mesh`` is the guaranteed sampling density: every point of the
    underlying set lies within ``mesh`` of some sample.  Samples are
    duplicate-free up to 1e-12.
    """

    points: np.ndarray
    mesh: float

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("empty set")
        check_finite(pts, "sample coordinates")
        if not (self.mesh > 0):
            raise ValueError("mesh must be > 0")
        if len(pts) > 1:
            tree = cKDTree(pts)
            pairs = tree.query_pairs(DUP_TOL)
            if pairs:
                i, j = next(iter(pairs))
                raise ValueError(f"duplicate samples at indices {i} and {j}")
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def kdtree(self) -> cKDTree:
        return cKDTree(self.points)

    @cached_property
    def diameter(self) -> float:
        return diameter(self)


def _brute_diameter(pts: np.ndarray) -> float:
    best = 0.0
    step = 512
    for i in range(0, len(pts), step):
        block = pts[i : i + step]
        d = np.linalg.norm(block[:, None, :] - pts[None, :, :], axis=2)
        best = max(best, float(d.max()))
    return best


def diameter(s: CompactSample | np.ndarray) -> float:
    """Max pairwise Euclidean distance over samples (0 for singletons)."""
    pts = s.points if isinstance(s, CompactSample) else np.asarray(s, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("empty set")
    if len(pts) == 1:
        return 0.0
    if len(pts) > 64:
        # The diameter of a finite set is attained on its convex hull.
        try:
            hull = ConvexHull(pts)
            pts = pts[hull.vertices]
        except QhullError:
            pass  # degenerate (collinear) input: fall through to brute force
    return _brute_diameter(pts)


def hausdorff(s: CompactSample, t: CompactSample) -> float:
    """Symmetric Hausdorff distance between two sample sets."""
    if len(s) == 0 or len(t) == 0:
        raise ValueError("empty set")
    d_st, _ = t.kdtree.query(s.points)
    d_ts, _ = s.kdtree.query(t.points)
    return float(max(d_st.max(), d_ts.max()))


# ---------------------------------------------------------------------------
# Radius functions and starlike bodies
# ---------------------------------------------------------------------------


class RadiusFunction:
    """Piecewise-linear periodic radius profile on M >= 8 uniform angles."""

    def __init__(self, radii: Sequence[float] | np.ndarray):
        r = np.asarray(radii, dtype=float)
        if r.ndim != 1 or len(r) < 8:
            raise ValueError("need at least 8 radii at uniform angles")
        check_finite(r, "radii")
        if np.any(r < 0):
            raise ValueError("radii must be non-negative")
        self.radii = r
        self.m = len(r)

    def __call__(self, theta) -> np.ndarray:
        """Interpolated radius at angle(s) theta (radians, any branch)."""
        th = np.asarray(theta, dtype=float)
        a = (th % TWO_PI) * (self.m / TWO_PI)
        j = np.floor(a).astype(int) % self.m
        lam = a - np.floor(a)
        jn = (j + 1) % self.m
        return (1.0 - lam) * self.radii[j] + lam * self.radii[jn]

    @property
    def max_radius(self) -> float:
        return float(self.radii.max())

    @property
    def angular_slope(self) -> float:
        """Max |d rho / d theta| over the knot segments."""
        step = TWO_PI / self.m
        diffs = np.abs(np.diff(np.concatenate([self.radii, self.radii[:1]])))
        return float(diffs.max() / step)

    def offset(self, margin: float) -> "RadiusFunction":
        return RadiusFunction(self.radii + margin)

    def __eq__(self, other) -> bool:
        return isinstance(other, RadiusFunction) and np.array_equal(self.radii, other.radii)


class Region:
    """Membership predicate for a subset of the plane.

    Bounded catalog regions can produce covering samples via
    :func:`epsilon_net`; pullback regions only answer membership.
    """

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def contains_point(self, p) -> bool:
        arr, _ = as_point_array(p)
        return bool(self.contains(arr)[0])

    def bounds(self):
        """Axis-aligned bounding box (xmin, ymin, xmax, ymax) or None."""
        return None


@dataclass
class Disc(Region):
    """Closed disc; radius 0 is the single center point."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(2)
        check_finite(c, "disc center")
        if self.radius < 0 or not math.isfinite(self.radius):
            raise ValueError("disc radius must be finite and >= 0")
        self.center = c

    def contains(self, pts) -> np.ndarray:
        arr, _ = as_point_array(pts)
        return np.linalg.norm(arr - self.center, axis=1) <= self.radius

    def bounds(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)


class StarlikeSet(Region):
    """Starlike body: all radial segments from an origin out to a PL radius.

    Membership is exactly ``|p - origin| <= radius(angle(p - origin))`` with
    the radius interpolated piecewise-linearly; the origin always belongs.
    """

    def __init__(self, origin, radius: RadiusFunction):
        o = np.asarray(origin, dtype=float).reshape(2)
        check_finite(o, "origin")
        self.origin = o
        self.radius = radius

    def polar(self, pts) -> tuple[np.ndarray, np.ndarray]:
        arr, _ = as_point_array(pts)
        v = arr - self.origin
        t = np.linalg.norm(v, axis=1)
        theta = np.arctan2(v[:, 1], v[:, 0]) % TWO_PI
        return t, theta

    def contains(self, pts) -> np.ndarray:
        t, theta = self.polar(pts)
        return t <= self.radius(theta)

    def radial_excess(self, pts) -> np.ndarray:
        """Signed radial distance past the body boundary, per point."""
        t, theta = self.polar(pts)
        return t - self.radius(theta)

    def boundary(self, n: int = 512) -> np.ndarray:
        """Ordered boundary polyline through all knots plus n fill angles."""
        knots = np.arange(self.radius.m) * (TWO_PI / self.radius.m)
        fill = np.arange(n) * (TWO_PI / n)
        ang = np.unique(np.concatenate([knots, fill]))
        r = self.radius(ang)
        return self.origin + np.column_stack([r * np.cos(ang), r * np.sin(ang)])

    def diameter_estimate(self, n: int = 2048) -> float:
        return diameter(self.boundary(n))

    def bounds(self):
        b = self.boundary(512)
        return (b[:, 0].min(), b[:, 1].min(), b[:, 0].max(), b[:, 1].max())


@dataclass
class Segment(Region):
    """Closed line segment (the zero-width strip)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).reshape(2)
        self.b = np.asarray(self.b, dtype=float).reshape(2)
        check_finite(self.a)
        check_finite(self.b)

    def contains(self, pts) -> np.ndarray:
        arr, _ = as_point_array(pts)
        d = self.b - self.a
        L2 = float(d @ d)
        if L2 == 0.0:
            return np.linalg.norm(arr - self.a, axis=1) <= DUP_TOL
        u = np.clip((arr - self.a) @ d / L2, 0.0, 1.0)
        proj = self.a + u[:, None] * d
        return np.linalg.norm(arr - proj, axis=1) <= DUP_TOL

    def bounds(self):
        lo = np.minimum(self.a, self.b)
        hi = np.maximum(self.a, self.b)
        return (lo[0], lo[1], hi[0], hi[1])


@dataclass
class RegionUnion(Region):
    parts: list

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty region")

    def contains(self, pts) -> np.ndarray:
        arr, _ = as_point_array(pts)
        out = np.zeros(len(arr), dtype=bool)
        for part in self.parts:
            out |= part.contains(arr)
        return out

    def bounds(self):
        boxes = [p.bounds() for p in self.parts]
        if any(b is None for b in boxes):
            return None
        boxes = np.asarray(boxes)
        return (boxes[:, 0].min(), boxes[:, 1].min(), boxes[:, 2].max(), boxes[:, 3].max())


@dataclass
class PullbackRegion(Region):
    """Preimage of a region under an exactly evaluable planar map.

    Membership is decided by pushing the query point through ``through``
    and testing the inner region.  Not samplable by :func:`epsilon_net`.
    """

    through: object  # anything with .apply(pts) -> pts
    inner: Region

    def contains(self, pts) -> np.ndarray:
        arr, _ = as_point_array(pts)
        return self.inner.contains(self.through.apply(arr))


# ---------------------------------------------------------------------------
# epsilon nets
# ---------------------------------------------------------------------------


def _dedupe(points: np.ndarray) -> np.ndarray:
    """Drop later points lying within DUP_TOL of an earlier one."""
    if len(points) < 2:
        return points
    tree = cKDTree(points)
    drop = np.zeros(len(points), dtype=bool)
    for i, j in tree.query_pairs(DUP_TOL):
        drop[max(i, j)] = True
    return points[~drop]


def _level_intervals(rho: RadiusFunction, level: float) -> list[tuple[float, float]]:
    """Angular intervals where the PL radius is >= level (exact crossings)."""
    m = rho.m
    step = TWO_PI / m
    r = rho.radii
    raw = []
    for j in range(m):
        r0 = r[j]
        r1 = r[(j + 1) % m]
        a = j * step
        if r0 >= level and r1 >= level:
            raw.append((a, a + step))
        elif r0 >= level:
            lam = (r0 - level) / (r0 - r1)
            raw.append((a, a + lam * step))
        elif r1 >= level:
            lam = (level - r0) / (r1 - r0)
            raw.append((a + lam * step, a + step))
    if not raw:
        return []
    merged = [list(raw[0])]
    for a, b in raw[1:]:
        if abs(a - merged[-1][1]) < 1e-12:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    if len(merged) > 1 and abs(merged[0][0]) < 1e-12 and abs(merged[-1][1] - TWO_PI) < 1e-12:
        merged[0][0] = merged.pop()[0] - TWO_PI
    return [(a, b) for a, b in merged]


def _star_net(origin: np.ndarray, rho: RadiusFunction, mesh: float) -> np.ndarray:
    """Covering sample of a starlike body by rings plus its boundary curve.

    A body point is within dr/2 of some ring level that still reaches its
    angle (then within da/2 along that ring), or within dr/2 of the
    boundary (then within da/2 along the boundary polyline); with
    dr = da = 0.85 * mesh both cases stay under the mesh.
    """
    r_max = rho.max_radius
    if r_max == 0.0:
        return origin.reshape(1, 2)
    delta = 0.85 * mesh
    chunks = [origin.reshape(1, 2)]

    speed = r_max + rho.angular_slope
    per_knot = max(1, math.ceil((TWO_PI / rho.m) * speed / delta))
    n_b = rho.m * per_knot
    ang_b = np.arange(n_b) * (TWO_PI / n_b)
    r_b = rho(ang_b)
    keep = r_b > 0
    chunks.append(origin + np.column_stack([r_b[keep] * np.cos(ang_b[keep]),
                                            r_b[keep] * np.sin(ang_b[keep])]))

    n_rings = math.ceil(r_max / delta)
    for k in range(1, n_rings):
        level = k * delta if k * delta < r_max else r_max * (1.0 - 1e-12)
        for a, b in _level_intervals(rho, level):
            arc = (b - a) * level
            n = max(1, math.ceil(arc / delta))
            full = b - a >= TWO_PI - 1e-12
            ang = a + (b - a) * (np.arange(n) / n if full else np.arange(n + 1) / n)
            chunks.append(origin + level * np.column_stack([np.cos(ang), np.sin(ang)]))
    return _dedupe(np.concatenate(chunks))


def epsilon_net(region: Region, mesh: float) -> CompactSample:
    """Sample a bounded catalog region with guaranteed density ``mesh``."""
    if not (mesh > 0):
        raise ValueError("mesh must be > 0")
    if isinstance(region, Disc):
        radii = np.full(16, region.radius)
        pts = _star_net(region.center, RadiusFunction(radii), mesh)
    elif isinstance(region, StarlikeSet):
        pts = _star_net(region.origin, region.radius, mesh)
    elif isinstance(region, Segment):
        length = float(np.linalg.norm(region.b - region.a))
        n = max(1, math.ceil(length / (0.9 * mesh)))
        ts = np.linspace(0.0, 1.0, n + 1)
        pts = region.a + np.outer(ts, region.b - region.a)
        pts = _dedupe(pts)
    elif isinstance(region, RegionUnion):
        pts = np.concatenate([epsilon_net(p, mesh).points for p in region.parts])
        pts = _dedupe(pts)
    else:
        raise ValueError(f"cannot sample region of type {type(region).__name__}")
    if len(pts) == 0:
        raise ValueError("empty region")
    return CompactSample(pts, mesh)


def probe_grid(bounds, n: int = 200) -> np.ndarray:
    """n x n rectangular probe grid over a bounding box."""
    xmin, ymin, xmax, ymax = bounds
    xs = np.linspace(xmin, xmax, n)
    ys = np.linspace(ymin, ymax, n)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])
