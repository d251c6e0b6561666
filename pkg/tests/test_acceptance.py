"""Acceptance suite: one test per certification criterion.

Each criterion prints a PASS/FAIL line in the terminal summary (see
conftest).  Chains produced by the pipeline criteria are collected and
re-certified as homeomorphisms by the dedicated criterion at the end.
"""

import time

import numpy as np
import pytest

from conftest import record_criterion
from starshrink import scenes
from starshrink.decomposition import QuotientGraph, bing_check, quotient_distance, quotient_pseudometric, project
from starshrink.errors import ShrinkError
from starshrink.geometry import diameter, probe_grid
from starshrink.maps import Affine, HomeoChain, Identity, check_homeo, uniform_distance
from starshrink.reports import serialize_report
from starshrink.shrink import (
    _activate_stage0,
    approximating_sequence,
    shrink_null_se,
    shrink_recursive,
    transport_filtration,
)
from starshrink.starlike import radial_squeeze

PROBE_N = 200

_collected_chains: list[tuple[str, object, object]] = []


def collect_chain(label, chain, sample):
    _collected_chains.append((label, chain, sample))


def test_criterion_1_squeeze_lemma_suite(bundles):
    worst_time = 0.0
    ok = True
    for name in scenes.SQUEEZE_SCENES:
        bundle = bundles(name)
        star, collar, bystanders = bundle.squeeze_inputs()
        grid = probe_grid(bundle.scene.domain.bounds(), PROBE_N)
        collar_body_excess = None
        for eps in (0.2, 0.05):
            t0 = time.perf_counter()
            chain = radial_squeeze(star, collar, bystanders, eps)
            elapsed = time.perf_counter() - t0
            worst_time = max(worst_time, elapsed)
            assert elapsed < 10.0, f"{name} at eps={eps} took {elapsed:.1f}s"
            collect_chain(f"{name}/squeeze@{eps}", chain, bundle.scene.sample)

            # (a) zero support violations outside the collar body
            from starshrink.geometry import StarlikeSet

            collar_body = StarlikeSet(star.origin, collar)
            outside = ~collar_body.contains(grid)
            img_grid = chain.apply(grid)
            violations = int(np.sum(np.any(img_grid[outside] != grid[outside], axis=1)))
            assert violations == 0, f"{name} eps={eps}: {violations} support violations"

            # (b) image diameter below target
            body_diam = diameter(chain.apply(star.boundary(2048)))
            assert body_diam < eps, f"{name} eps={eps}: diam {body_diam}"

            # (c) every null element small or fixed
            if bystanders is not None:
                for el_id, el in bystanders:
                    el_img = chain.apply(el.points)
                    fixed = np.array_equal(el_img, el.points)
                    assert fixed or diameter(el_img) < eps, f"{name}/{el_id} at eps={eps}"
    record_criterion(1, ok, f"5 scenes x eps in (0.2, 0.05); max squeeze time {worst_time:.2f}s")


def test_criterion_3_quotient_metric_oracle():
    segment_scene, segment_decomp = scenes.segment_scene(mesh=0.05)
    tiny_scene, tiny_decomp = scenes.tiny_disc_scene()
    checked = []
    for scene, decomp in ((segment_scene, segment_decomp), (tiny_scene, tiny_decomp)):
        assert len(scene.sample) <= 200, f"{scene.name} has {len(scene.sample)} samples"
        graph = QuotientGraph(scene, decomp)
        dj = graph.full_matrix_quanta()
        fw = graph.floyd_warshall_quanta()
        assert np.array_equal(dj, fw), f"{scene.name}: Dijkstra != Floyd-Warshall"
        assert np.array_equal(dj, dj.T)
        through = np.min(dj[:, :, None] + dj[None, :, :], axis=1)
        assert np.all(dj <= through)
        assert np.all(np.diag(dj) == 0)
        assert np.all(dj + np.eye(len(dj)) > 0)  # zero only on equal ids
        checked.append(scene.name)
    graph = QuotientGraph(segment_scene, segment_decomp)
    a = project(segment_decomp, (0.0, 0.0))
    b = project(segment_decomp, (3.0, 0.0))
    d = quotient_distance(graph, a, b)
    assert abs(d - 2.0) <= 2 * segment_scene.mesh
    record_criterion(3, True, f"scenes {checked}; segment distance {d:.4f} = 2 +/- 0.1")


def test_criterion_4_se_shrinking_suite(bundles):
    bundle = bundles("mixed_five")
    base = bundle.decomposition()
    graph = QuotientGraph(bundle.scene, base)
    eps = 0.2
    t0 = time.perf_counter()
    se_sets = [_activate_stage0(el, el.carrier) for el in bundle.rse.elements]
    steps = []
    chain = shrink_null_se(bundle.scene, base, se_sets, eps, graph=graph, steps=steps)
    report = bing_check(base, chain, eps, graph=graph)
    elapsed = time.perf_counter() - t0
    collect_chain("mixed_five/null_se@0.2", chain, bundle.scene.sample)
    big_count = sum(1 for d in base.elements.diameters if d >= eps)
    assert len(steps) == 3 == big_count
    assert report.passed_i and report.passed_ii and report.passed
    assert elapsed < 30.0
    record_criterion(
        4, True,
        f"3 elementary shrinks; (i)={report.condition_i_sup:.4f} "
        f"(ii)={report.condition_ii_max:.4f}; {elapsed:.1f}s",
    )


def test_criterion_5_main_theorem_suite(bundles):
    details = []
    for name in ("two_lobe", "three_stage"):
        bundle = bundles(name)
        base = bundle.decomposition()
        graph = QuotientGraph(bundle.scene, base)
        for eps in (0.2, 0.1):
            chain = shrink_recursive(bundle.scene, bundle.rse, bundle.u_region, eps)
            report = bing_check(base, chain, eps, graph=graph)
            collect_chain(f"{name}/recursive@{eps}", chain, bundle.scene.sample)
            assert report.passed, f"{name} at eps={eps}: {serialize_report(report)}"
            details.append(f"{name}@{eps}:(i)={report.condition_i_sup:.3f}")
        with pytest.raises(ShrinkError, match="activation failed"):
            shrink_recursive(bundle.scene, bundle.rse, bundle.u_region, 0.2,
                             skip_inner_shrink=True)
    record_criterion(5, True, "; ".join(details) + "; negative control raised")


def test_criterion_6_approximating_sequence(bundles):
    bundle = bundles("two_lobe")
    base = bundle.decomposition()
    graph = QuotientGraph(bundle.scene, base)
    metric = quotient_pseudometric(base, graph)
    results = approximating_sequence(bundle.scene, bundle.rse, bundle.u_region, 4)
    values = []
    for n, (chain, report) in enumerate(results, start=1):
        eps_n = 2.0**-n
        collect_chain(f"two_lobe/seq@n={n}", chain, bundle.scene.sample)
        assert report.condition_i_sup < eps_n
        ud = uniform_distance(Identity(), chain, bundle.scene.sample, metric)
        assert ud < eps_n
        values.append(round(report.condition_i_sup, 4))
    record_criterion(6, True, f"(i)-values {values} below (0.5, 0.25, 0.125, 0.0625)")


def test_criterion_7_transport_lemma(bundles):
    element = bundles("two_lobe").rse.elements[0]

    def recertify(el):
        assert len(el.stages[-1]) == 1
        for i in range(len(el.stages) - 1):
            d, _ = el.stages[i].kdtree.query(el.stages[i + 1].points)
            assert d.max() <= 1e-12
        for sc in el.stage_charts:
            assert sc.ball_inside_domain()

    out_id = transport_filtration(element, HomeoChain([]))
    assert out_id is element

    shift = HomeoChain([Affine.translation(0.06, -0.03)])
    out_shift = transport_filtration(element, shift)
    recertify(out_shift)
    for before, after in zip(element.stages, out_shift.stages):
        assert np.allclose(after.points, before.points + [0.06, -0.03], atol=1e-15)

    from starshrink.geometry import RadiusFunction, StarlikeSet

    far = StarlikeSet((2.0, 2.0), RadiusFunction([0.1] * 8))
    far_chain = radial_squeeze(far, far.radius.offset(0.1), None, 0.05)
    out_far = transport_filtration(element, far_chain)
    recertify(out_far)
    for before, after in zip(element.stages, out_far.stages):
        assert np.array_equal(after.points, before.points)
    record_criterion(7, True, "identity, translation, disjoint-support transports re-certified")


def test_criterion_8_determinism(bundles, tmp_path):
    from starshrink.cli import run_shrink
    from starshrink.scene_io import load_scene, serialize_scene

    scene_path = tmp_path / "two_lobe.scene"
    scene_path.write_text(serialize_scene(scenes.scene_specs()["two_lobe"]))
    outputs = []
    for run in range(2):
        bundle = load_scene(scene_path)
        report, chain, frames = run_shrink(bundle, 0.2, frame_count=4,
                                           out_dir=tmp_path / f"frames{run}")
        frame_bytes = [open(f, "rb").read() for f in frames]
        outputs.append((serialize_report(report), frame_bytes))
    assert outputs[0][0] == outputs[1][0], "reports differ between runs"
    assert outputs[0][1] == outputs[1][1], "frames differ between runs"
    record_criterion(8, True, "reports and 4 frames byte-identical across runs")


def test_criterion_2_homeomorphism_certification():
    assert _collected_chains, "pipeline criteria must run first"
    worst = 0.0
    for label, chain, sample in _collected_chains:
        rep = check_homeo(chain, sample, 1e-9)
        assert rep.inverse_error < 1e-9, f"{label}: inverse error {rep.inverse_error}"
        assert rep.collisions == 0, f"{label}: {rep.collisions} collisions"
        worst = max(worst, rep.inverse_error)
    record_criterion(
        2, True, f"{len(_collected_chains)} chains; worst inverse error {worst:.2e}"
    )
