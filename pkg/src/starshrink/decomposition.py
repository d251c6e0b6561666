"""Decompositions of a planar scene and their certification machinery.

A scene is a bounded region sampled at a declared density; a decomposition
is a disjoint collection of compact elements (each a subset of the scene
sample) together with an open region containing all of them.  The quotient
is realized as a contracted graph: mesh-neighbor edges weighted by length,
with each element collapsed to a single vertex.

Edge lengths are quantized to an integer number of quanta (one quantum is
2^-20 of the mesh) before any shortest-path work, so path sums are exact
integer arithmetic in float64: Dijkstra and Floyd-Warshall agree exactly,
and the pseudometric axioms hold exactly on sampled triples.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .geometry import CompactSample, Point2, Region, diameter, epsilon_net
from .maps import HomeoChain
from .reports import ElementOutcome, ShrinkReport
from .starlike import NullCollection

MATCH_TOL = 1e-12
POINT_TOL = 1e-9


@dataclass
class Scene:
    """Sampled compact scene. The sample covers the domain at density mesh."""

    domain: Region
    mesh: float
    sample: CompactSample
    name: str = "scene"

    @staticmethod
    def build(domain: Region, mesh: float, extra_points=None, name: str = "scene") -> "Scene":
        """Sample the domain and merge in extra points (kept verbatim)."""
        net = epsilon_net(domain, mesh).points
        if extra_points is not None and len(extra_points):
            extra = np.asarray(extra_points, dtype=float)
            d, _ = CompactSample(extra, mesh).kdtree.query(net)
            net = net[d > MATCH_TOL]
            pts = np.concatenate([extra, net])
        else:
            pts = net
        return Scene(domain, mesh, CompactSample(pts, mesh), name=name)


class Decomposition:
    """Disjoint compact elements of a scene, all inside an open region.

    Every element sample must coincide (to 1e-12) with a scene sample, so
    saturation and quotient contraction are exact index operations.
    """

    def __init__(self, scene: Scene, elements: NullCollection, u_region: Region):
        self.scene = scene
        self.elements = elements
        self.u_region = u_region
        n = len(scene.sample)
        owner = np.full(n, -1, dtype=int)
        index_sets = []
        for k, (el_id, el) in enumerate(elements):
            d, idx = scene.sample.kdtree.query(el.points)
            if d.max() > MATCH_TOL:
                raise ValueError(f"element {el_id} has samples off the scene sample")
            if not np.all(u_region.contains(el.points)):
                raise ValueError(f"element {el_id} is not contained in U")
            if not np.all(scene.domain.contains(el.points)):
                raise ValueError(f"element {el_id} leaves the scene domain")
            if np.any(owner[idx] >= 0):
                other = elements.ids[owner[idx][owner[idx] >= 0][0]]
                raise ValueError(f"elements {el_id} and {other} overlap")
            owner[idx] = k
            index_sets.append(np.sort(idx))
        self.owner = owner
        self.index_sets = index_sets

    @property
    def ids(self) -> list[str]:
        return self.elements.ids

    def element_of(self, sample_indices) -> np.ndarray:
        return self.owner[np.asarray(sample_indices, dtype=int)]


def project(d: Decomposition, p, tol: float = POINT_TOL):
    """Quotient id of a point: the element id, or the point itself."""
    arr = np.asarray(p, dtype=float).reshape(2)
    if not d.scene.domain.contains_point(arr):
        raise ValueError("point outside the scene domain")
    for el_id, el in d.elements:
        dist, _ = el.kdtree.query(arr)
        if dist <= tol:
            return el_id
    return Point2(*arr)


def saturate(d: Decomposition, indices) -> np.ndarray:
    """Union of the index set with every element it meets."""
    s = np.zeros(len(d.scene.sample), dtype=bool)
    s[np.asarray(indices, dtype=int)] = True
    for idx in d.index_sets:
        if s[idx].any():
            s[idx] = True
    return np.flatnonzero(s)


def largest_saturated(d: Decomposition, indices) -> np.ndarray:
    """The index set minus every element not wholly inside it."""
    s = np.zeros(len(d.scene.sample), dtype=bool)
    s[np.asarray(indices, dtype=int)] = True
    for idx in d.index_sets:
        if not s[idx].all():
            s[idx] = False
    return np.flatnonzero(s)


@dataclass
class NullCertificate:
    thresholds: list[float]
    counts: list[int]
    verdict: bool

    def rows(self) -> list[tuple[float, int]]:
        return list(zip(self.thresholds, self.counts))


def is_null(c: NullCollection, thresholds: Sequence[float]) -> NullCertificate:
    """Count-vs-threshold table certifying the nullity profile.

    Any finite collection is null; the table is the quantitative evidence
    standing in for the infinite-family condition.
    """
    th = [float(t) for t in thresholds]
    if any(t <= 0 for t in th):
        raise ValueError("thresholds must be positive")
    if any(a <= b for a, b in zip(th, th[1:])):
        raise ValueError("thresholds must be strictly descending")
    diams = np.asarray(c.diameters, dtype=float)
    counts = [int(np.sum(diams > t)) for t in th]
    return NullCertificate(th, counts, True)


@dataclass
class UscReport:
    passed: bool
    element_count: int
    certificate: NullCertificate


def check_usc(d: Decomposition, thresholds: Sequence[float] | None = None) -> UscReport:
    """Sufficient-condition check: null certificate plus compact elements.

    Element compactness, closedness, and disjointness are enforced at
    construction, so the check reduces to producing the null certificate.
    """
    if thresholds is None:
        top = max(d.elements.diameters, default=1.0)
        top = max(top, 1e-6)
        thresholds = [top * (2.0**-k) for k in range(6)]
    cert = is_null(d.elements, thresholds)
    return UscReport(passed=True, element_count=len(d.elements), certificate=cert)


class QuotientGraph:
    """Contracted mesh-neighbor graph realizing the quotient pseudometric."""

    def __init__(self, scene: Scene, decomposition: Decomposition, neighbor_factor: float = 1.3):
        self.scene = scene
        self.decomposition = decomposition
        self.quantum = scene.mesh * 2.0**-20

        owner = decomposition.owner
        n_samples = len(scene.sample)
        free = owner < 0
        n_free = int(free.sum())
        n_elements = len(decomposition.elements)
        vertex_of_sample = np.empty(n_samples, dtype=int)
        vertex_of_sample[free] = np.arange(n_free)
        vertex_of_sample[~free] = n_free + owner[~free]
        self.vertex_of_sample = vertex_of_sample
        self.n_vertices = n_free + n_elements
        self.element_vertices = np.arange(n_free, n_free + n_elements)

        pairs = scene.sample.kdtree.query_pairs(neighbor_factor * scene.mesh, output_type="ndarray")
        if len(pairs) == 0:
            data = np.empty(0)
            vi = vj = np.empty(0, dtype=int)
        else:
            lengths = np.linalg.norm(
                scene.sample.points[pairs[:, 0]] - scene.sample.points[pairs[:, 1]], axis=1
            )
            # ceil keeps every quantized edge at least its true length, so
            # graph distances never undercut Euclidean ones
            w = np.maximum(1.0, np.ceil(lengths / self.quantum))
            vi = vertex_of_sample[pairs[:, 0]]
            vj = vertex_of_sample[pairs[:, 1]]
            keep = vi != vj  # edges inside one element contract away
            vi, vj, w = vi[keep], vj[keep], w[keep]
            lo = np.minimum(vi, vj)
            hi = np.maximum(vi, vj)
            order = np.lexsort((w, hi, lo))
            lo, hi, w = lo[order], hi[order], w[order]
            first = np.ones(len(lo), dtype=bool)
            first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
            vi, vj, data = lo[first], hi[first], w[first]
        self.matrix = csr_matrix(
            (np.concatenate([data, data]), (np.concatenate([vi, vj]), np.concatenate([vj, vi]))),
            shape=(self.n_vertices, self.n_vertices),
        )
        self.n_components = connected_components(self.matrix, directed=False, return_labels=False)

    # -- vertex helpers ----------------------------------------------------

    def vertex_of_id(self, quotient_id) -> int:
        """Vertex of a quotient id (element id string or a sample point)."""
        if isinstance(quotient_id, str):
            k = self.decomposition.ids.index(quotient_id)
            return int(self.element_vertices[k])
        arr = np.asarray(quotient_id, dtype=float).reshape(2)
        dist, idx = self.scene.sample.kdtree.query(arr)
        if dist > POINT_TOL:
            raise ValueError("point is not a scene sample")
        return int(self.vertex_of_sample[idx])

    def samples_of_vertices(self, vertices) -> np.ndarray:
        mask = np.isin(self.vertex_of_sample, np.asarray(vertices, dtype=int))
        return np.flatnonzero(mask)

    # -- distances ----------------------------------------------------------

    def distances_from(self, vertices, limit: float = np.inf) -> np.ndarray:
        """Rows of quantized shortest-path distances from given vertices."""
        return dijkstra(self.matrix, directed=False, indices=np.asarray(vertices, dtype=int), limit=limit)

    def distance_quanta(self, va: int, vb: int) -> float:
        if va == vb:
            return 0.0
        a, b = (va, vb) if va < vb else (vb, va)
        row = dijkstra(self.matrix, directed=False, indices=[a])[0]
        return float(row[b])

    def pair_distances_quanta(self, src, tgt, scale_hint: float = np.inf) -> np.ndarray:
        """Exact shortest-path quanta for aligned src/tgt vertex pairs.

        Runs chunked limited Dijkstra from the unique sources, escalating
        the limit for pairs the initial radius did not reach.
        """
        src = np.asarray(src, dtype=int)
        tgt = np.asarray(tgt, dtype=int)
        out = np.full(len(src), np.inf)
        out[src == tgt] = 0.0
        todo = src != tgt
        limit = scale_hint
        chunk_size = 64
        for escalation in range(5):
            pending = np.flatnonzero(todo)
            if len(pending) == 0:
                break
            uniq, inv = np.unique(src[pending], return_inverse=True)
            for c0 in range(0, len(uniq), chunk_size):
                chunk = uniq[c0 : c0 + chunk_size]
                rows = self.distances_from(chunk, limit=limit)
                sel = (inv >= c0) & (inv < c0 + len(chunk))
                pp = pending[sel]
                out[pp] = rows[inv[sel] - c0, tgt[pp]]
            todo = (src != tgt) & ~np.isfinite(out)
            if not math.isfinite(limit):
                break  # remaining inf pairs are genuinely disconnected
            limit = np.inf if escalation >= 2 else limit * 4.0
        return out

    def full_matrix_quanta(self) -> np.ndarray:
        return self.distances_from(np.arange(self.n_vertices))

    def floyd_warshall_quanta(self) -> np.ndarray:
        """Brute-force min-plus oracle; exact under integer quanta."""
        n = self.n_vertices
        d = np.full((n, n), np.inf)
        np.fill_diagonal(d, 0.0)
        coo = self.matrix.tocoo()
        d[coo.row, coo.col] = np.minimum(d[coo.row, coo.col], coo.data)
        for k in range(n):
            np.minimum(d, np.add.outer(d[:, k], d[k, :]), out=d)
        return d

    def quotient_ball(self, element_index: int, radius: float) -> np.ndarray:
        """Sample indices within quotient distance < radius of an element."""
        v = int(self.element_vertices[element_index])
        row = self.distances_from([v], limit=radius / self.quantum)[0]
        verts = np.flatnonzero(row < radius / self.quantum)
        return self.samples_of_vertices(verts)


def quotient_distance(graph: QuotientGraph, a, b) -> float:
    """Shortest-path distance between two quotient ids (inf if disconnected)."""
    va = graph.vertex_of_id(a) if not isinstance(a, (int, np.integer)) else int(a)
    vb = graph.vertex_of_id(b) if not isinstance(b, (int, np.integer)) else int(b)
    q = graph.distance_quanta(va, vb)
    return float(q * graph.quantum) if math.isfinite(q) else math.inf


def quotient_pseudometric(d: Decomposition, graph: QuotientGraph):
    """Point-pair pseudometric on the scene induced by the quotient graph.

    Both arguments are (n, 2) arrays; each point is snapped to its nearest
    scene sample and the snap distances are added, giving a conservative
    value that vanishes exactly on equal samples of one element.
    """

    def metric(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        da, ia = d.scene.sample.kdtree.query(a)
        db, ib = d.scene.sample.kdtree.query(b)
        va = graph.vertex_of_sample[ia]
        vb = graph.vertex_of_sample[ib]
        hint = 16.0 * d.scene.mesh / graph.quantum
        quanta = graph.pair_distances_quanta(va, vb, scale_hint=hint)
        return quanta * graph.quantum + da + db

    return metric


def bing_check(
    d: Decomposition,
    chain: HomeoChain,
    eps: float,
    graph: Optional[QuotientGraph] = None,
    scene_name: Optional[str] = None,
) -> ShrinkReport:
    """Certify the two shrinking conditions for a chain at size eps.

    Condition (i) is the sup over moved samples of the quotient distance
    between a point's class and its image's class; condition (ii) is the
    max image diameter over elements.  Failures are reported, not raised.
    """
    t0 = time.perf_counter()
    scene = d.scene
    if graph is None:
        graph = QuotientGraph(scene, d)
    pts = scene.sample.points
    img = chain.apply(pts)

    moved = np.any(img != pts, axis=1)
    if moved.any():
        midx = np.flatnonzero(moved)
        snap_d, snap_i = scene.sample.kdtree.query(img[midx])
        vsrc = graph.vertex_of_sample[midx]
        vtgt = graph.vertex_of_sample[snap_i]
        hint = (eps + 2.0 * scene.mesh) / graph.quantum
        quanta = graph.pair_distances_quanta(vtgt, vsrc, scale_hint=hint)
        condition_i = float(np.max(quanta * graph.quantum + snap_d))
    else:
        condition_i = 0.0

    outcomes = []
    condition_ii = 0.0
    for el_id, el in d.elements:
        el_img = chain.apply(el.points)
        fixed = np.array_equal(el_img, el.points)
        after = float(diameter(el_img))
        outcomes.append(ElementOutcome(el_id, el.diameter, after, fixed))
        condition_ii = max(condition_ii, after)

    outside_u = ~d.u_region.contains(pts)
    support_violations = int(np.sum(moved & outside_u))

    inv = chain.inverse()
    inverse_error = float(np.linalg.norm(inv.apply(img) - pts, axis=1).max()) if len(pts) else 0.0
    collisions = len(cKDTree(img).query_pairs(1e-12)) if len(img) > 1 else 0

    return ShrinkReport(
        scene=scene_name or scene.name,
        epsilon=eps,
        chain_length=len(chain),
        condition_i_sup=condition_i,
        condition_ii_max=condition_ii,
        support_violations=support_violations,
        inverse_error=inverse_error,
        collisions=collisions,
        elements=outcomes,
        wall_time=time.perf_counter() - t0,
    )
