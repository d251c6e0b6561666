import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starshrink.geometry import CompactSample, Disc, RadiusFunction, StarlikeSet, probe_grid
from starshrink.maps import (
    Affine,
    Composed,
    Conjugate,
    HomeoChain,
    Identity,
    RadialMap,
    chain_from_spec,
    check_homeo,
    compose_affine,
    evaluate,
    inverse,
    map_from_spec,
    uniform_distance,
)


def simple_radial(origin=(0.0, 0.0), m=16):
    src = np.vstack([np.full(m, 0.5), np.full(m, 0.8)])
    dst = np.vstack([np.full(m, 0.2), np.full(m, 0.8)])
    return RadialMap(origin, src, dst)


def grid_sample(n=60, lo=-1.5, hi=1.5, mesh=0.1):
    return CompactSample(probe_grid((lo, lo, hi, hi), n), mesh)


class TestEvaluate:
    def test_identity(self):
        assert evaluate(Identity(), (1.0, 2.0)) == (1.0, 2.0)

    def test_affine_scale(self):
        h = Affine.scaling(0.5)
        assert evaluate(h, (2.0, 0.0)) == (1.0, 0.0)

    def test_chain_composes_left_to_right(self):
        chain = HomeoChain([Affine.scaling(0.5), Affine.translation(1.0, 0.0)])
        # scale then translate: (2,0) -> (1,0) -> (2,0)
        assert evaluate(chain, (2.0, 0.0)) == (2.0, 0.0)

    def test_chain_associativity(self):
        chain = HomeoChain([Affine.scaling(0.7, (0.1, 0.0)), simple_radial(), Affine.translation(0.05, -0.02)])
        pts = probe_grid((-1, -1, 1, 1), 40)
        whole = chain.apply(pts)
        left = HomeoChain(chain.maps[:1])
        right = HomeoChain(chain.maps[1:])
        split = right.apply(left.apply(pts))
        assert np.max(np.linalg.norm(whole - split, axis=1)) < 1e-12


class TestInverse:
    def test_identity(self):
        assert isinstance(inverse(Identity()), Identity)

    def test_affine_scale(self):
        h = inverse(Affine.scaling(0.5))
        assert evaluate(h, (1.0, 0.0)) == (2.0, 0.0)

    def test_radial_round_trip_on_grid(self):
        h = simple_radial()
        hinv = inverse(h)
        pts = probe_grid((-1.2, -1.2, 1.2, 1.2), 100)
        err = np.linalg.norm(hinv.apply(h.apply(pts)) - pts, axis=1).max()
        assert err < 1e-9

    @settings(deadline=None, max_examples=40)
    @given(
        st.lists(
            st.floats(min_value=0.05, max_value=2.0, allow_nan=False), min_size=3, max_size=3
        ),
        st.floats(min_value=-1.5, max_value=1.5),
        st.floats(min_value=-1.5, max_value=1.5),
    )
    def test_random_radial_round_trip(self, knots, px, py):
        a, b, c = sorted(knots)
        if b - a < 1e-3 or c - b < 1e-3:
            return
        m = 8
        src = np.vstack([np.full(m, a), np.full(m, b), np.full(m, c)])
        lo = 0.4 * a
        mid = lo + (c - lo) * (0.3 + 0.05 * np.arange(m) / m)
        dst = np.vstack([np.full(m, lo), mid, np.full(m, c)])
        h = RadialMap((0.1, -0.2), src, dst)
        p = np.array([[px, py]])
        err = np.linalg.norm(h.inverse().apply(h.apply(p)) - p)
        assert err < 1e-9


class TestSupport:
    def test_support_soundness_bit_exact(self):
        h = simple_radial()
        pts = probe_grid((-2, -2, 2, 2), 200)
        outside = ~h.support.contains(pts)
        img = h.apply(pts)
        assert np.array_equal(img[outside], pts[outside])

    def test_conjugate_support_pullback(self):
        chart = Affine.scaling(0.5, (0.2, 0.0))
        h = Conjugate(chart, simple_radial())
        pts = probe_grid((-3, -3, 3, 3), 150)
        outside = ~h.support.contains(pts)
        assert np.array_equal(h.apply(pts)[outside], pts[outside])

    def test_ray_preservation(self):
        h = simple_radial()
        pts = probe_grid((-0.79, -0.79, 0.79, 0.79), 60)
        img = h.apply(pts)
        cross = pts[:, 0] * img[:, 1] - pts[:, 1] * img[:, 0]
        assert np.abs(cross).max() < 1e-12

    def test_radial_monotonicity_per_stage(self):
        h = simple_radial()
        ts = np.linspace(0.01, 0.79, 200)
        for ang in np.linspace(0, 2 * math.pi, 7):
            ray = np.column_stack([ts * math.cos(ang), ts * math.sin(ang)])
            r_img = np.linalg.norm(h.apply(ray), axis=1)
            assert np.all(np.diff(r_img) > 0)


class TestUniformDistance:
    def test_equal_maps(self):
        s = grid_sample()
        assert uniform_distance(Identity(), Identity(), s) == 0.0

    def test_translation(self):
        s = grid_sample()
        assert uniform_distance(Identity(), Affine.translation(0.3, 0.0), s) == pytest.approx(0.3)

    def test_scale_on_disc_sample(self):
        from starshrink.geometry import epsilon_net

        mesh = 0.05
        s = epsilon_net(Disc((0, 0), 1.0), mesh)
        d = uniform_distance(Identity(), Affine.scaling(0.5), s)
        assert abs(d - 0.5) <= mesh


class TestCheckHomeo:
    def test_identity_passes(self):
        rep = check_homeo(Identity(), grid_sample(), 1e-9)
        assert rep.passed
        assert rep.inverse_error == 0.0
        assert rep.collisions == 0

    def test_scale_passes(self):
        rep = check_homeo(Affine.scaling(0.5), grid_sample(), 1e-9)
        assert rep.passed and rep.jacobian_min > 0

    def test_mismatched_pair_fails(self):
        class Broken(Affine):
            def inverse(self):
                return Affine.scaling(3.0)  # wrong inverse on purpose

        rep = check_homeo(Broken(np.eye(2) * 0.5, (0, 0)), grid_sample(), 1e-9)
        assert rep.inverse_error > 1e-9
        assert not rep.passed

    def test_collision_detected(self):
        class Collapse(Affine):
            def apply(self, pts):
                out = np.array(pts, copy=True)
                out[:, 0] = 0.0
                return out

        rep = check_homeo(Collapse(np.eye(2), (0, 0)), grid_sample(n=12), 1e-3)
        assert rep.collisions > 0 and not rep.passed


class TestSerialization:
    def test_catalog_round_trip(self):
        chain = HomeoChain(
            [
                Identity(),
                Affine.scaling(0.5, (0.1, 0.2)),
                simple_radial(),
                Conjugate(Affine.translation(0.3, 0.0), simple_radial()),
                Composed([Affine.translation(0.1, 0.0), Identity()]),
            ]
        )
        back = chain_from_spec(chain.to_spec())
        pts = probe_grid((-1.5, -1.5, 1.5, 1.5), 40)
        assert np.array_equal(chain.apply(pts), back.apply(pts))

    def test_unknown_constructor(self):
        with pytest.raises(ValueError, match="unknown map constructor"):
            map_from_spec(["warp", 1.0])


class TestPartialTime:
    def test_partial_endpoints(self):
        chain = HomeoChain([simple_radial(), simple_radial()])
        pts = probe_grid((-1, -1, 1, 1), 30)
        assert np.array_equal(chain.partial(1.0).apply(pts), chain.apply(pts))
        assert np.array_equal(chain.partial(0.0).apply(pts), pts)

    def test_partial_is_homeomorphism(self):
        chain = HomeoChain([simple_radial(), simple_radial()])
        part = chain.partial(0.37)
        rep = check_homeo(part, grid_sample(), 1e-9)
        assert rep.passed

    def test_affine_composition(self):
        f = Affine.scaling(0.5, (0.3, 0.1))
        g = Affine.translation(0.2, -0.4)
        merged = compose_affine(f, g)
        pts = probe_grid((-1, -1, 1, 1), 20)
        assert np.allclose(merged.apply(pts), f.apply(g.apply(pts)), atol=1e-15)
