"""Shrinking pipelines: chart-conjugated squeezes, null iterations, recursion.

Three layers, each certified on samples:

* ``shrink_se`` conjugates a radial squeeze through a chart so that a
  starlike-equivalent set shrinks in scene coordinates, bystanders stay
  small or fixed, and nothing outside the chart domain moves.
* ``shrink_null_se`` iterates over the elements of diameter at least the
  target, in descending order, confining each elementary squeeze to a
  pulled-back quotient-ball neighborhood disjoint from everything still
  pending.
* ``shrink_recursive`` inducts on filtration length: inner stages are
  first shrunk below their activation radii by a recursive call (the
  near-quotient homeomorphism), carriers are transported through it, and
  the now-valid outermost charts drive a null-SE shrink at the target.

Inner-stage movement is quotient-invisible because it happens inside the
full elements, which the quotient contracts anyway; that is what lets the
inner target follow activation radii instead of the final size target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ShrinkError
from .geometry import (
    CompactSample,
    Disc,
    PullbackRegion,
    RadiusFunction,
    Region,
    StarlikeSet,
    diameter,
    epsilon_net,
)
from .maps import Affine, Composed, Conjugate, HomeoChain, Identity, PlanarMap, compose_affine
from .decomposition import Decomposition, QuotientGraph, bing_check, largest_saturated
from .reports import StepRecord
from .starlike import NullCollection, radial_squeeze

CHART_TOL = 1e-9
CARRIER_TOL = 1e-9


@dataclass
class Chart:
    """Invertible catalog map restricted to a closed planar domain.

    Charts must map their domain into the open unit disc; ``validate``
    certifies that and the inverse-composition error on a domain sample.
    """

    map: PlanarMap
    domain: Region

    def validate(self, mesh: float) -> None:
        sample = epsilon_net(self.domain, mesh)
        img = self.map.apply(sample.points)
        if np.linalg.norm(img, axis=1).max() >= 1.0:
            raise ValueError("chart does not map its domain into the open unit disc")
        back = self.map.inverse().apply(img)
        err = np.linalg.norm(back - sample.points, axis=1).max()
        if err >= CHART_TOL:
            raise ValueError(f"chart inverse-composition error {err:g} exceeds tolerance")

    def shrunk(self, radius: float) -> "Chart":
        if not isinstance(self.domain, Disc):
            raise ShrinkError("chart margin violated: cannot shrink a non-disc chart domain")
        return Chart(self.map, Disc(self.domain.center, radius))


class StarlikeEquivalentSet:
    """A compact carrier whose chart image lies in a declared starlike body."""

    def __init__(self, carrier: CompactSample, chart: Chart, image: StarlikeSet, tol: float = CARRIER_TOL):
        img_pts = chart.map.apply(carrier.points)
        excess = image.radial_excess(img_pts)
        if excess.max() > tol:
            raise ValueError(f"carrier leaves the chart image body by {float(excess.max()):g}")
        if not np.all(chart.domain.contains(carrier.points)):
            raise ValueError("carrier is not contained in the chart domain")
        self.carrier = carrier
        self.chart = chart
        self.image = image

    @property
    def origin(self) -> np.ndarray:
        """Pullback of the image origin (the set's distinguished point)."""
        return self.chart.map.inverse().apply(self.image.origin.reshape(1, 2))[0]


@dataclass
class StageChart:
    """Chart for one filtration stage plus its activation ball.

    The chart is declared valid for the stage set once the next-inner
    stage lies inside the ball around the stage origin.
    """

    chart: Chart
    image: StarlikeSet
    activation_center: np.ndarray
    activation_radius: float

    def __post_init__(self):
        self.activation_center = np.asarray(self.activation_center, dtype=float).reshape(2)
        if not (self.activation_radius > 0):
            raise ValueError("activation radius must be > 0")

    def ball_inside_domain(self) -> bool:
        ring = self.activation_center + self.activation_radius * np.column_stack(
            [np.cos(np.linspace(0, 2 * math.pi, 64, endpoint=False)),
             np.sin(np.linspace(0, 2 * math.pi, 64, endpoint=False))]
        )
        probe = np.vstack([self.activation_center.reshape(1, 2), ring])
        return bool(np.all(self.chart.domain.contains(probe)))


class RecursiveSet:
    """Nested filtration of compact stages ending in a point, with charts.

    ``stages`` runs from the full set down to the singleton; each stage set
    must be an exact point-subset of the previous one.  Equal trailing
    singletons are allowed (padding for mixed filtration lengths).
    """

    def __init__(self, stages: Sequence[CompactSample], stage_charts: Sequence[StageChart], id: str = "e"):
        stages = list(stages)
        stage_charts = list(stage_charts)
        if len(stages) < 2:
            raise ValueError("a filtration needs at least the full set and the tail point")
        if len(stage_charts) != len(stages) - 1:
            raise ValueError("need one stage chart per non-tail stage")
        if len(stages[-1]) != 1:
            raise ValueError("the last stage must be a single point")
        for i in range(len(stages) - 1):
            outer, inner = stages[i], stages[i + 1]
            d, _ = outer.kdtree.query(inner.points)
            if d.max() > 1e-12:
                raise ValueError(f"stage {i + 1} is not a subset of stage {i}")
            if len(inner) >= len(outer) and not (len(inner) == 1 and len(outer) == 1):
                raise ValueError(f"stage {i + 1} does not strictly nest inside stage {i}")
        for i, sc in enumerate(stage_charts):
            if not sc.ball_inside_domain():
                raise ValueError(f"activation ball of stage {i} leaves the chart domain")
        self.stages = stages
        self.stage_charts = stage_charts
        self.id = str(id)

    @property
    def length(self) -> int:
        return len(self.stages) - 2

    @property
    def carrier(self) -> CompactSample:
        return self.stages[0]

    @property
    def tail_point(self) -> np.ndarray:
        return self.stages[-1].points[0]

    def inner(self) -> "RecursiveSet":
        """The stage-1 filtration (length one less)."""
        return RecursiveSet(self.stages[1:], self.stage_charts[1:], id=self.id)


def pad_filtration(element: RecursiveSet, length: int, pad_radius: float) -> RecursiveSet:
    """Pad to a longer filtration by repeating the tail singleton.

    Padded stages carry identity charts over a small disc at the tail
    point, which activate trivially.
    """
    if element.length > length:
        raise ValueError("element filtration exceeds the target length")
    stages = list(element.stages)
    charts = list(element.stage_charts)
    e = element.tail_point
    while len(stages) - 2 < length:
        tiny = StageChart(
            chart=Chart(Identity(), Disc(e, 2.0 * pad_radius)),
            image=StarlikeSet(e, RadiusFunction(np.full(8, pad_radius))),
            activation_center=e,
            activation_radius=pad_radius,
        )
        stages.append(stages[-1])
        charts.append(tiny)
    return RecursiveSet(stages, charts, id=element.id)


class RSEDecomposition:
    """Decomposition whose elements share one filtration length."""

    def __init__(self, elements: Sequence[RecursiveSet], u_region: Region):
        elements = list(elements)
        if elements:
            lengths = {el.length for el in elements}
            if len(lengths) != 1:
                raise ValueError(f"elements must share one filtration length, got {sorted(lengths)}")
        self.elements = elements
        self.u_region = u_region

    @property
    def length(self) -> int:
        return self.elements[0].length if self.elements else 0

    @property
    def ids(self) -> list[str]:
        return [el.id for el in self.elements]

    def carriers(self) -> NullCollection:
        return NullCollection([el.carrier for el in self.elements], self.ids)

    def inner(self) -> "RSEDecomposition":
        return RSEDecomposition([el.inner() for el in self.elements], self.u_region)


# ---------------------------------------------------------------------------
# shrink_se: one starlike-equivalent set
# ---------------------------------------------------------------------------


def _domain_boundary(region: Region, n: int = 256) -> np.ndarray:
    if isinstance(region, Disc):
        ang = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return region.center + region.radius * np.column_stack([np.cos(ang), np.sin(ang)])
    if isinstance(region, StarlikeSet):
        return region.boundary(n)
    raise ShrinkError("chart margin violated: unsupported chart domain kind")


def _inverse_stretch(chart: Chart, mesh: float) -> float:
    """Max neighbor-pair stretch of the chart inverse on a domain sample."""
    sample = epsilon_net(chart.domain, mesh)
    if len(sample) < 2:
        return 1.0
    img = chart.map.apply(sample.points)
    k = min(6, len(sample) - 1)
    _, idx = sample.kdtree.query(sample.points, k=k + 1)
    idx = idx[:, 1:]
    d_scene = np.linalg.norm(sample.points[:, None, :] - sample.points[idx], axis=2)
    d_img = np.linalg.norm(img[:, None, :] - img[idx], axis=2)
    ok = d_img > 0
    return float((d_scene[ok] / d_img[ok]).max())


def shrink_se(
    scene,
    se: StarlikeEquivalentSet,
    u_region: Region,
    bystanders: Optional[NullCollection],
    eps: float,
    collar: Optional[RadiusFunction] = None,
    support_within: Optional[np.ndarray] = None,
) -> HomeoChain:
    """Shrink a starlike-equivalent set below eps in scene coordinates.

    The radial squeeze runs in chart-image coordinates at a target derived
    from the numeric modulus of continuity of the chart inverse, and is
    conjugated back.  ``support_within`` optionally restricts the support:
    scene samples outside the given index set must not move; the image
    collar is narrowed until they do not.
    """
    if not (eps > 0):
        raise ValueError("eps must be > 0")
    chart = se.chart
    if not np.all(u_region.contains(se.carrier.points)):
        raise ShrinkError("chart margin violated: carrier not inside U")

    # Mirror of "choosing a slightly smaller N(E)": shrink a disc domain
    # until it sits inside U.
    for _ in range(9):
        bdy = _domain_boundary(chart.domain)
        if np.all(u_region.contains(bdy)):
            break
        if not isinstance(chart.domain, Disc):
            raise ShrinkError("chart margin violated: chart domain leaves U")
        r_fit = float(np.linalg.norm(se.carrier.points - chart.domain.center, axis=1).max())
        new_r = r_fit + (chart.domain.radius - r_fit) * 0.5
        if new_r <= r_fit * (1.0 + 1e-9):
            raise ShrinkError("chart margin violated: domain cannot fit inside U")
        chart = chart.shrunk(new_r)
    else:
        raise ShrinkError("chart margin violated: domain cannot fit inside U")

    is_identity_chart = isinstance(chart.map, Identity)
    image_bdy_excess = se.image.radial_excess(chart.map.apply(_domain_boundary(chart.domain)))
    m_avail = float(image_bdy_excess.min())
    if m_avail <= 0 and collar is None:
        raise ShrinkError("chart margin violated: image body reaches the chart domain boundary")

    inside_members = []
    outside_members = []
    if bystanders is not None:
        for el_id, el in bystanders:
            inside = chart.domain.contains(el.points)
            if inside.all():
                inside_members.append((el_id, CompactSample(chart.map.apply(el.points), el.mesh)))
            else:
                outside_members.append((el_id, el))
    image_bystanders = (
        NullCollection([el for _, el in inside_members], [i for i, _ in inside_members])
        if inside_members
        else None
    )

    stretch = 1.0 if is_identity_chart else _inverse_stretch(chart, scene.mesh)
    delta_full = eps if is_identity_chart else 0.9 * eps / stretch

    scene_pts = scene.sample.points
    margin_schedule = [1.0] if collar is not None else [0.5 * 0.5**k for k in range(7)]
    for margin_factor in margin_schedule:
        working_collar = collar if collar is not None else se.image.radius.offset(m_avail * margin_factor)
        delta = delta_full
        for _ in range(4):
            stages = radial_squeeze(se.image, working_collar, image_bystanders, delta).maps
            chain = HomeoChain(
                stages if is_identity_chart else [Conjugate(chart.map, st) for st in stages]
            )
            if diameter(chain.apply(se.carrier.points)) < eps:
                break
            delta *= 0.5
        else:
            raise ShrinkError("stage budget exceeded: carrier did not shrink below target")

        if stages:
            support = stages[0].support if is_identity_chart else PullbackRegion(chart.map, stages[0].support)
            if support_within is not None:
                allowed = np.zeros(len(scene_pts), dtype=bool)
                allowed[support_within] = True
                if support.contains(scene_pts[~allowed]).any():
                    continue  # narrow the collar and retry
            if support.contains(scene_pts[~u_region.contains(scene_pts)]).any():
                continue

        ok = True
        for el_id, el in outside_members:
            img = chain.apply(el.points)
            if not np.array_equal(img, el.points) and diameter(img) >= eps:
                ok = False
                break
        if ok:
            return chain
    raise ShrinkError("neighborhood packing failed: squeeze support cannot be confined")


# ---------------------------------------------------------------------------
# shrink_null_se: null decomposition of starlike-equivalent sets
# ---------------------------------------------------------------------------


def shrink_null_se(
    scene,
    base: Decomposition,
    se_sets: Sequence[StarlikeEquivalentSet],
    eps: float,
    graph: Optional[QuotientGraph] = None,
    prior: Optional[HomeoChain] = None,
    steps: Optional[list] = None,
) -> HomeoChain:
    """Iteratively shrink every element of diameter >= eps.

    ``base`` is the decomposition at original positions (it fixes the
    quotient); ``se_sets`` carry the current carriers, aligned with
    ``base.elements``.  Elementary squeezes are confined to disjoint
    pulled-back quotient balls, so the composed chain moves no class by
    more than the ball diameter.
    """
    if len(se_sets) != len(base.elements):
        raise ValueError("one starlike-equivalent set per base element")
    if graph is None:
        graph = QuotientGraph(scene, base)
    diams = [se.carrier.diameter for se in se_sets]
    order = sorted(
        (k for k in range(len(se_sets)) if diams[k] >= eps),
        key=lambda k: (-diams[k], base.ids[k]),
    )
    chain = HomeoChain([])
    used = np.zeros(len(scene.sample), dtype=bool)
    for pos, k in enumerate(order):
        se = se_sets[k]
        current = CompactSample(chain.apply(se.carrier.points), se.carrier.mesh) if len(chain) else se.carrier

        w_indices = None
        radius = eps / 3.0
        remaining_big = order[pos + 1 :]
        for _ in range(6):
            ball = graph.quotient_ball(k, radius)
            ball_set = np.zeros(len(scene.sample), dtype=bool)
            ball_set[ball] = True
            ball_set &= base.u_region.contains(scene.sample.points)
            candidate = largest_saturated(base, np.flatnonzero(ball_set))
            cand_mask = np.zeros(len(scene.sample), dtype=bool)
            cand_mask[candidate] = True
            own = base.index_sets[k]
            if not cand_mask[own].all():
                radius *= 0.6
                continue
            if (cand_mask & used).any():
                radius *= 0.6
                continue
            if any(cand_mask[base.index_sets[j]].any() for j in remaining_big):
                radius *= 0.6
                continue
            w_indices = candidate
            break
        if w_indices is None:
            raise ShrinkError("neighborhood packing failed: no admissible quotient ball")

        others = [
            (base.ids[j], CompactSample(chain.apply(base.elements.elements[j].points),
                                        base.elements.elements[j].mesh))
            for j in range(len(se_sets))
            if j != k
        ]
        bystanders = NullCollection([el for _, el in others], [i for i, _ in others]) if others else None

        se_current = se if current is se.carrier else StarlikeEquivalentSet(current, se.chart, se.image)
        diam_before = current.diameter
        sub = shrink_se(
            scene, se_current, base.u_region, bystanders, eps,
            support_within=w_indices,
        )
        chain = chain + sub
        if steps is not None:
            after = float(diameter(chain.apply(se.carrier.points)))
            steps.append(StepRecord(base.ids[k], eps, diam_before, after, len(sub)))
        used_mask = np.zeros(len(scene.sample), dtype=bool)
        used_mask[w_indices] = True
        used |= used_mask
    return chain


# ---------------------------------------------------------------------------
# shrink_recursive: induction on filtration length
# ---------------------------------------------------------------------------


def _activate_stage0(element: RecursiveSet, carrier: CompactSample) -> StarlikeEquivalentSet:
    sc = element.stage_charts[0]
    try:
        return StarlikeEquivalentSet(carrier, sc.chart, sc.image)
    except ValueError as exc:
        raise ShrinkError(f"activation failed for element {element.id}: {exc}") from exc


def shrink_recursive(
    scene,
    rse: RSEDecomposition,
    u_region: Region,
    eps: float,
    skip_inner_shrink: bool = False,
    steps: Optional[list] = None,
) -> HomeoChain:
    """Shrink a recursively starlike-equivalent decomposition below eps.

    Filtration length zero delegates to the null-SE iteration.  Otherwise
    the stage-1 decomposition is recursively shrunk below the activation
    radii (retrying at halved targets up to eight times), carriers are
    transported, stage-0 charts are activated, and the outer null-SE
    shrink runs at eps.  ``skip_inner_shrink`` is a verification hook that
    omits the inner shrink, which must make activation fail on any scene
    whose inner stages start outside their activation balls.
    """
    if not (eps > 0):
        raise ValueError("eps must be > 0")
    base = Decomposition(scene, rse.carriers(), u_region)
    if rse.length == 0:
        for el in rse.elements:
            sc = el.stage_charts[0]
            tail = el.tail_point
            if np.linalg.norm(tail - sc.activation_center) > sc.activation_radius:
                raise ShrinkError(f"activation failed for element {el.id}: tail point outside ball")
        se_sets = [_activate_stage0(el, el.carrier) for el in rse.elements]
        return shrink_null_se(scene, base, se_sets, eps, steps=steps)

    # Only elements whose inner stage starts outside its activation ball
    # constrain the inner target (padded singletons sit at their centers).
    needs = []
    for el in rse.elements:
        sc = el.stage_charts[0]
        reach = np.linalg.norm(el.stages[1].points - sc.activation_center, axis=1).max()
        if reach > sc.activation_radius:
            needs.append(sc.activation_radius)
    if not needs and not skip_inner_shrink:
        se_sets = [_activate_stage0(el, el.carrier) for el in rse.elements]
        return shrink_null_se(scene, base, se_sets, eps, steps=steps)
    eta = min(needs) if needs else eps
    inner_rse = rse.inner()
    g = HomeoChain([])
    eta_attempt = 0.5 * eta
    for attempt in range(8):
        if skip_inner_shrink:
            g = HomeoChain([])
        else:
            g = shrink_recursive(scene, inner_rse, u_region, eta_attempt, steps=steps)
        ok = True
        for el in rse.elements:
            moved_inner = g.apply(el.stages[1].points)
            sc = el.stage_charts[0]
            dist = np.linalg.norm(moved_inner - sc.activation_center, axis=1)
            if dist.max() > sc.activation_radius:
                ok = False
                break
        if ok:
            break
        if skip_inner_shrink:
            raise ShrinkError(f"activation failed for element {el.id}: inner stage outside its ball")
        eta_attempt *= 0.5
    else:
        raise ShrinkError("activation failed: inner shrink never entered the activation balls")

    se_sets = []
    for el in rse.elements:
        carrier = CompactSample(g.apply(el.carrier.points), el.carrier.mesh) if len(g) else el.carrier
        se_sets.append(_activate_stage0(el, carrier))
    outer = shrink_null_se(scene, base, se_sets, eps, steps=steps)
    return g + outer


# ---------------------------------------------------------------------------
# filtration transport
# ---------------------------------------------------------------------------


def _transport_map(chart_map: PlanarMap, g: HomeoChain) -> PlanarMap:
    g_inv_maps = [h.inverse() for h in reversed(g.maps)]
    if isinstance(chart_map, Affine) and all(isinstance(h, Affine) for h in g_inv_maps):
        out = chart_map
        for h in reversed(g_inv_maps):
            out = compose_affine(out, h)
        return out
    if isinstance(chart_map, Identity) and not g_inv_maps:
        return chart_map
    return Composed(g_inv_maps + [chart_map])


def _transport_region(region: Region, g: HomeoChain) -> Region:
    if all(isinstance(h, Affine) and h.is_translation for h in g.maps):
        if isinstance(region, Disc):
            center = g.apply(region.center.reshape(1, 2))[0]
            return Disc(center, region.radius)
    return PullbackRegion(g.inverse(), region)


def transport_filtration(element: RecursiveSet, g: HomeoChain, tol: float = 1e-9) -> RecursiveSet:
    """Push a filtration through a homeomorphism chain.

    Stage samples map pointwise; stage charts conjugate (new chart = old
    chart composed with the inverse, over the image of the old domain).
    The chain must certify injective on a dilated sample of the full set.
    Activation balls move by their center image with radius preserved,
    exact for the identity, translation, and disjoint-support cases.
    """
    if len(g) == 0:
        return element
    pts = element.carrier.points
    ring = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]) * element.carrier.mesh
    dilated = np.concatenate([pts] + [pts + off for off in ring])
    tree_pts = CompactSample(_dedupe_keep_first(dilated), element.carrier.mesh)
    from .maps import check_homeo

    report = check_homeo(g, tree_pts, tol)
    if report.inverse_error >= tol or report.collisions > 0:
        raise ValueError("injectivity certificate failed on the dilated sample")

    new_stages = [CompactSample(g.apply(s.points), s.mesh) for s in element.stages]
    new_charts = []
    for sc in element.stage_charts:
        moved_center = g.apply(sc.activation_center.reshape(1, 2))[0]
        new_charts.append(
            StageChart(
                chart=Chart(_transport_map(sc.chart.map, g), _transport_region(sc.chart.domain, g)),
                image=sc.image,
                activation_center=moved_center,
                activation_radius=sc.activation_radius,
            )
        )
    return RecursiveSet(new_stages, new_charts, id=element.id)


def _dedupe_keep_first(points: np.ndarray) -> np.ndarray:
    from scipy.spatial import cKDTree

    tree = cKDTree(points)
    drop = np.zeros(len(points), dtype=bool)
    for i, j in tree.query_pairs(1e-12):
        drop[max(i, j)] = True
    return points[~drop]


# ---------------------------------------------------------------------------
# approximating sequence
# ---------------------------------------------------------------------------


def approximating_sequence(scene, rse: RSEDecomposition, u_region: Region, n_max: int):
    """Chains for size targets 2^-n, n = 1..n_max, with their reports.

    The reports record the certified values; monotonicity of the
    condition-(i) values across n is reported, not asserted.
    """
    if not (1 <= n_max <= 8):
        raise ValueError("n_max must be between 1 and 8")
    base = Decomposition(scene, rse.carriers(), u_region)
    graph = QuotientGraph(scene, base)
    results = []
    for n in range(1, n_max + 1):
        eps_n = 2.0**-n
        chain = shrink_recursive(scene, rse, u_region, eps_n)
        report = bing_check(base, chain, eps_n, graph=graph)
        results.append((chain, report))
    return results
