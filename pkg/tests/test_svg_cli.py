import os
import re

import numpy as np
import pytest

from starshrink import scenes
from starshrink.cli import main, run_shrink
from starshrink.maps import HomeoChain
from starshrink.reports import serialize_report
from starshrink.scene_io import serialize_scene
from starshrink.shrink import RSEDecomposition
from starshrink.svg import element_outlines, render_svg


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("scenes")
    for name in ("single_disc", "mixed_five"):
        (d / f"{name}.scene").write_text(serialize_scene(scenes.scene_specs()[name]))
    return d


def svg_polyline_points(svg_text):
    out = []
    for m in re.finditer(r'points="([^"]+)"', svg_text):
        pts = [tuple(map(float, pair.split(","))) for pair in m.group(1).split()]
        out.append(np.asarray(pts))
    return out


class TestSvg:
    def test_identity_chain_outlines_match_input(self, bundles):
        bundle = bundles("single_disc")
        svg = render_svg(bundle.scene, bundle.rse, HomeoChain([]))
        polys = svg_polyline_points(svg)
        # domain, U, one element outline
        assert len(polys) == 3

    def test_determinism_byte_identical(self, bundles):
        bundle = bundles("single_disc")
        a = render_svg(bundle.scene, bundle.rse, HomeoChain([]))
        b = render_svg(bundle.scene, bundle.rse, HomeoChain([]))
        assert a == b

    def test_empty_decomposition_draws_domain_only(self, bundles):
        bundle = bundles("single_disc")
        empty = RSEDecomposition([], bundle.u_region)
        svg = render_svg(bundle.scene, empty, HomeoChain([]))
        assert len(svg_polyline_points(svg)) == 2  # domain + U outlines

    def test_squeezed_outline_fits_reported_diameter(self, bundles):
        from starshrink.decomposition import bing_check

        bundle = bundles("single_disc")
        report, chain, _ = run_shrink(bundle, 0.1)
        svg = render_svg(bundle.scene, bundle.rse, chain)
        polys = svg_polyline_points(svg)
        element_poly = polys[-1]
        # svg pixel bbox of the final outline, mapped back to scene scale
        from starshrink.svg import CanvasTransform

        tf = CanvasTransform(bundle.scene.domain)
        extent = max(np.ptp(element_poly[:, 0]), np.ptp(element_poly[:, 1])) / tf.scale
        assert extent <= report.elements[0].diam_after + 2 * bundle.scene.mesh


class TestRunShrink:
    def test_epsilon_larger_than_everything(self, bundles, tmp_path):
        bundle = bundles("single_disc")
        report, chain, frames = run_shrink(bundle, eps=5.0, frame_count=3,
                                           out_dir=tmp_path)
        assert report.passed and len(chain) == 0
        contents = [open(f).read() for f in frames]
        assert contents[0] == contents[1] == contents[2]

    def test_frames_bound_final_outline(self, bundles, tmp_path):
        bundle = bundles("mixed_five")
        report, chain, frames = run_shrink(bundle, eps=0.2, frame_count=5,
                                           out_dir=tmp_path)
        assert report.passed
        assert len(frames) == 5
        final = open(frames[-1]).read()
        whole = render_svg(bundle.scene, bundle.rse, chain)
        assert final == whole  # last frame is the full chain

    def test_frame_count_zero(self, bundles):
        bundle = bundles("single_disc")
        report, chain, frames = run_shrink(bundle, eps=0.2)
        assert frames == [] and report.passed

    def test_report_serialization_deterministic(self, bundles):
        bundle = bundles("single_disc")
        rep1, _, _ = run_shrink(bundle, eps=0.2)
        rep2, _, _ = run_shrink(bundle, eps=0.2)
        assert serialize_report(rep1) == serialize_report(rep2)
        assert "wall" not in serialize_report(rep1)


class TestCli:
    def test_check_exit_zero(self, scene_dir, capsys):
        code = main(["check", "--scene", str(scene_dir / "single_disc.scene")])
        out = capsys.readouterr().out
        assert code == 0
        assert "usc pass" in out

    def test_shrink_report_and_exit(self, scene_dir, tmp_path, capsys):
        report_path = tmp_path / "report.txt"
        code = main([
            "shrink", "--scene", str(scene_dir / "single_disc.scene"),
            "--epsilon", "0.2", "--report", str(report_path),
        ])
        assert code == 0
        text = report_path.read_text()
        assert text.startswith("report shrink")
        assert "pass yes" in text

    def test_shrink_frames_and_chain(self, scene_dir, tmp_path):
        out_dir = tmp_path / "frames"
        report_path = tmp_path / "report.txt"
        code = main([
            "shrink", "--scene", str(scene_dir / "single_disc.scene"),
            "--epsilon", "0.2", "--frames", "4",
            "--out", str(out_dir), "--report", str(report_path),
        ])
        assert code == 0
        assert sorted(os.listdir(out_dir)) == [
            "chain.json", "frame_000.svg", "frame_001.svg", "frame_002.svg", "frame_003.svg",
        ]

    def test_quotient_dist(self, scene_dir, capsys):
        code = main([
            "quotient-dist", "--scene", str(scene_dir / "mixed_five.scene"),
            "--from=-0.35,0.1", "--to=0.48,-0.3",
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "from a" in out and "to b" in out
        dist = float(out.splitlines()[-1].split()[-1])
        assert 0.2 < dist < 0.4

    def test_bad_scene_file_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.scene"
        bad.write_text("scene x\nmesh nope\n")
        code = main(["check", "--scene", str(bad)])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_byte_identical_reports_across_runs(self, scene_dir, tmp_path):
        paths = [tmp_path / "r1.txt", tmp_path / "r2.txt"]
        for p in paths:
            code = main([
                "shrink", "--scene", str(scene_dir / "single_disc.scene"),
                "--epsilon", "0.2", "--report", str(p),
            ])
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
