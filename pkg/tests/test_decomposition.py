import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starshrink import scenes
from starshrink.decomposition import (
    Decomposition,
    QuotientGraph,
    Scene,
    bing_check,
    check_usc,
    is_null,
    largest_saturated,
    project,
    quotient_distance,
    saturate,
)
from starshrink.geometry import CompactSample, Disc, Point2, RadiusFunction, StarlikeSet, epsilon_net
from starshrink.maps import Affine, HomeoChain, Identity
from starshrink.starlike import NullCollection


@pytest.fixture(scope="module")
def segment():
    return scenes.segment_scene(mesh=0.05)


@pytest.fixture(scope="module")
def tiny():
    return scenes.tiny_disc_scene()


class TestProject:
    def test_element_point(self, segment):
        scene, decomp = segment
        inner = decomp.scene.sample.points[decomp.index_sets[0][0]]
        assert project(decomp, inner) == "mid"

    def test_free_point(self, segment):
        scene, decomp = segment
        out = project(decomp, (0.0, 0.0))
        assert isinstance(out, Point2)

    def test_same_element_same_id(self, segment):
        scene, decomp = segment
        pts = decomp.scene.sample.points[decomp.index_sets[0]]
        assert project(decomp, pts[0]) == project(decomp, pts[-1])

    def test_outside_domain(self, segment):
        scene, decomp = segment
        with pytest.raises(ValueError, match="outside"):
            project(decomp, (0.0, 2.0))


class TestSaturation:
    def test_disjoint_set_unchanged(self, tiny):
        scene, decomp = tiny
        free = np.flatnonzero(decomp.owner < 0)[:5]
        assert np.array_equal(saturate(decomp, free), np.sort(free))

    def test_point_in_element_pulls_whole_element(self, tiny):
        scene, decomp = tiny
        el = decomp.index_sets[0]
        out = saturate(decomp, el[:1])
        assert np.array_equal(out, el)

    def test_meeting_two_elements(self):
        scene, decomp = scenes.segment_scene(mesh=0.05, covered=(1.0, 1.4))
        pts = scene.sample.points
        second = CompactSample(pts[(pts[:, 0] >= 2.0) & (pts[:, 0] <= 2.4)], 0.05)
        first = decomp.elements.elements[0]
        coll = NullCollection([first, second], ["m1", "m2"])
        from starshrink.geometry import Disc as D

        decomp2 = Decomposition(scene, coll, D((1.7, 0.0), 1.0))
        probe = np.concatenate([decomp2.index_sets[0][:1], decomp2.index_sets[1][:1]])
        out = saturate(decomp2, probe)
        brute = set(probe) | set(decomp2.index_sets[0]) | set(decomp2.index_sets[1])
        assert set(out) == brute

    def test_saturate_idempotent(self, tiny):
        scene, decomp = tiny
        rng = np.random.default_rng(3)
        s = rng.choice(len(scene.sample), size=30, replace=False)
        once = saturate(decomp, s)
        assert np.array_equal(saturate(decomp, once), once)

    def test_largest_saturated_subset_and_saturated(self, tiny):
        scene, decomp = tiny
        rng = np.random.default_rng(5)
        s = rng.choice(len(scene.sample), size=40, replace=False)
        out = largest_saturated(decomp, s)
        assert set(out) <= set(s)
        assert np.array_equal(saturate(decomp, out), np.sort(out))

    def test_largest_saturated_drops_partial_element(self, tiny):
        scene, decomp = tiny
        el = decomp.index_sets[0]
        s = np.concatenate([el[: len(el) // 2], np.flatnonzero(decomp.owner < 0)[:10]])
        out = largest_saturated(decomp, s)
        assert not set(el) & set(out)

    def test_largest_saturated_is_maximum(self, tiny):
        # brute force: any saturated subset of S is contained in S*
        scene, decomp = tiny
        rng = np.random.default_rng(11)
        s = set(rng.choice(len(scene.sample), size=35, replace=False).tolist())
        star = set(largest_saturated(decomp, np.array(sorted(s))).tolist())
        for _ in range(50):
            t = set(rng.choice(sorted(s), size=min(8, len(s)), replace=False).tolist())
            sat = set(saturate(decomp, np.array(sorted(t))).tolist())
            if sat <= s:  # t's saturation is a saturated subset of s
                assert sat <= star

    def test_full_set_unchanged(self, tiny):
        scene, decomp = tiny
        s = np.arange(len(scene.sample))
        assert np.array_equal(largest_saturated(decomp, s), s)


class TestIsNull:
    def _family(self):
        samples = []
        for k in range(1, 51):
            r = 1.0 / k
            center = np.array([3.0 * k, 0.0])
            ang = np.linspace(0, 2 * np.pi, 24, endpoint=False)
            samples.append(
                CompactSample(center + r * np.column_stack([np.cos(ang), np.sin(ang)]), 0.3)
            )
        return NullCollection(samples)

    def test_reciprocal_family_counts(self):
        coll = self._family()
        thresholds = [2.0, 1.0, 0.5, 0.25, 0.125]
        cert = is_null(coll, thresholds)
        brute = [sum(1 for d in coll.diameters if d > t) for t in thresholds]
        assert cert.counts == brute
        # counts grow as the threshold descends; reversing gives the
        # strictly-decreasing-to-zero profile of the 1/k family
        assert all(a <= b for a, b in zip(cert.counts, cert.counts[1:]))
        reversed_counts = cert.counts[::-1]
        assert all(a > b for a, b in zip(reversed_counts, reversed_counts[1:]))
        assert reversed_counts[-1] == 0
        assert cert.verdict

    def test_three_unit_discs(self):
        ang = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        ring = np.column_stack([np.cos(ang), np.sin(ang)])
        coll = NullCollection(
            [CompactSample(ring + [4 * k, 0], 0.2) for k in range(3)]
        )
        cert = is_null(coll, [0.5])
        assert cert.counts == [3]

    def test_empty_collection(self):
        cert = is_null(NullCollection([]), [1.0, 0.5])
        assert cert.counts == [0, 0]

    def test_threshold_validation(self):
        coll = NullCollection([])
        with pytest.raises(ValueError, match="descending"):
            is_null(coll, [0.5, 1.0])
        with pytest.raises(ValueError, match="positive"):
            is_null(coll, [1.0, -0.5])


class TestCheckUsc:
    def test_shipped_scene_passes(self, tiny):
        scene, decomp = tiny
        rep = check_usc(decomp)
        assert rep.passed and rep.certificate.verdict

    def test_reciprocal_family_via_is_null(self):
        scene, decomp = scenes.segment_scene()
        rep = check_usc(decomp, thresholds=[2.0, 1.0, 0.5])
        assert rep.passed
        brute = [sum(1 for d in decomp.elements.diameters if d > t) for t in (2.0, 1.0, 0.5)]
        assert rep.certificate.counts == brute


class TestQuotientDistance:
    def test_segment_oracle(self, segment):
        scene, decomp = segment
        graph = QuotientGraph(scene, decomp)
        a = project(decomp, (0.0, 0.0))
        b = project(decomp, (3.0, 0.0))
        d = quotient_distance(graph, a, b)
        assert abs(d - 2.0) <= 2 * scene.mesh

    def test_identity_of_indiscernibles(self, segment):
        scene, decomp = segment
        graph = QuotientGraph(scene, decomp)
        el = decomp.index_sets[0]
        va = int(graph.vertex_of_sample[el[0]])
        vb = int(graph.vertex_of_sample[el[-1]])
        assert va == vb
        assert quotient_distance(graph, va, vb) == 0.0

    def test_dijkstra_equals_floyd_warshall_exactly(self, segment, tiny):
        for scene, decomp in (segment, tiny):
            graph = QuotientGraph(scene, decomp)
            assert graph.n_vertices <= 200
            dj = graph.full_matrix_quanta()
            fw = graph.floyd_warshall_quanta()
            assert np.array_equal(dj, fw)

    def test_pseudometric_axioms_exact(self, segment, tiny):
        for scene, decomp in (segment, tiny):
            graph = QuotientGraph(scene, decomp)
            d = graph.full_matrix_quanta()
            assert np.array_equal(d, d.T)
            n = d.shape[0]
            # triangle inequality over all triples, exact in quanta
            through = np.min(d[:, :, None] + d[None, :, :], axis=1)
            assert np.all(d <= through)
            assert np.all(np.diag(d) == 0)
            off = d + np.eye(n)
            assert np.all(off > 0)

    def test_euclidean_lower_bound_without_elements(self):
        scene = Scene.build(Disc((0.0, 0.0), 0.4), 0.1, name="free")
        decomp = Decomposition(scene, NullCollection([]), Disc((0.0, 0.0), 0.3))
        graph = QuotientGraph(scene, decomp)
        pts = scene.sample.points
        d = graph.full_matrix_quanta() * graph.quantum
        euclid = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        finite = np.isfinite(d)
        assert np.all(d[finite] >= euclid[finite] - 1e-9)

    def test_disconnected_reported_infinite(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0]])
        scene = Scene(Disc((2.5, 0.0), 3.0), 0.15, CompactSample(pts, 0.15), name="gap")
        decomp = Decomposition(scene, NullCollection([]), Disc((2.5, 0.0), 2.9))
        graph = QuotientGraph(scene, decomp)
        assert graph.n_components == 2
        assert math.isinf(quotient_distance(graph, (0.0, 0.0), (5.0, 0.0)))


class TestBingCheck:
    def test_identity_passes_when_small(self, tiny):
        scene, decomp = tiny
        rep = bing_check(decomp, HomeoChain([]), 0.5)
        assert rep.condition_i_sup == 0.0
        assert rep.passed

    def test_identity_fails_on_big_element(self, tiny):
        scene, decomp = tiny
        rep = bing_check(decomp, HomeoChain([]), 0.1)
        assert rep.condition_i_sup == 0.0
        assert not rep.passed_ii and not rep.passed

    def test_full_pipeline_on_single_disc(self, bundles):
        from starshrink.shrink import shrink_recursive

        bundle = bundles("single_disc")
        decomp = bundle.decomposition()
        chain = shrink_recursive(bundle.scene, bundle.rse, bundle.u_region, 0.1)
        rep = bing_check(decomp, chain, 0.1)
        assert rep.passed
        assert rep.elements[0].diam_after < 0.1


class TestDecompositionInvariants:
    def test_element_must_be_scene_sample(self, tiny):
        scene, _ = tiny
        rogue = CompactSample(np.array([[0.011, 0.013]]), 0.05)
        with pytest.raises(ValueError, match="off the scene sample"):
            Decomposition(scene, NullCollection([rogue], ["r"]), Disc((0, 0), 1.0))

    def test_element_must_lie_in_u(self, tiny):
        scene, decomp = tiny
        el = decomp.elements.elements[0]
        with pytest.raises(ValueError, match="not contained in U"):
            Decomposition(scene, NullCollection([el], ["core"]), Disc((0.3, 0.3), 0.01))
