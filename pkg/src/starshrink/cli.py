"""Command-line front end: shrink, check, quotient-dist.

Exit code 0 means every pass flag in the emitted report is true; 1 means a
certification failed; 2 means the run could not complete (bad scene file,
shrink construction error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .decomposition import QuotientGraph, bing_check, check_usc, quotient_distance
from .errors import ShrinkError
from .maps import HomeoChain
from .reports import ShrinkReport, serialize_report
from .scene_io import SceneBundle, SceneParseError, load_scene
from .shrink import approximating_sequence, shrink_recursive
from .svg import emit_frames


def run_shrink(bundle: SceneBundle, eps: float, frame_count: int = 0,
               out_dir=None) -> tuple[ShrinkReport, HomeoChain, list[str]]:
    """Shrink a scene at one size target; optionally emit animation frames."""
    t0 = time.perf_counter()
    base = bundle.decomposition()
    graph = QuotientGraph(bundle.scene, base)
    steps: list = []
    chain = shrink_recursive(bundle.scene, bundle.rse, bundle.u_region, eps, steps=steps)
    report = bing_check(base, chain, eps, graph=graph)
    report.steps = steps
    report.wall_time = time.perf_counter() - t0
    frames: list[str] = []
    if frame_count > 0:
        if out_dir is None:
            raise ValueError("frame emission needs an output directory")
        os.makedirs(out_dir, exist_ok=True)
        frames = emit_frames(bundle.scene, bundle.rse, chain, frame_count, out_dir)
    return report, chain, frames


def _write_report(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_shrink(args) -> int:
    bundle = load_scene(args.scene)
    if args.sequence is not None:
        results = approximating_sequence(bundle.scene, bundle.rse, bundle.u_region, args.sequence)
        ok = True
        out = []
        for n, (chain, report) in enumerate(results, start=1):
            out.append(serialize_report(report))
            ok = ok and report.passed and report.condition_i_sup < 2.0**-n
        _write_report("".join(out), args.report)
        return 0 if ok else 1
    report, chain, frames = run_shrink(bundle, args.epsilon, args.frames, args.out)
    _write_report(serialize_report(report), args.report)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "chain.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(chain.to_spec(), fh, separators=(",", ":"))
            fh.write("\n")
    for path in frames:
        print(f"frame {path}", file=sys.stderr)
    print(f"wall-time {report.wall_time:.3f}s", file=sys.stderr)
    return 0 if report.passed else 1


def _cmd_check(args) -> int:
    bundle = load_scene(args.scene)
    decomp = bundle.decomposition()
    usc = check_usc(decomp)
    lines = [
        f"scene {bundle.name}",
        f"elements {usc.element_count}",
        f"usc {'pass' if usc.passed else 'fail'}",
    ]
    for threshold, count in usc.certificate.rows():
        lines.append(f"null-count {threshold!r} {count}")
    lines.append(f"null-verdict {'yes' if usc.certificate.verdict else 'no'}")
    _write_report("\n".join(lines) + "\n", None)
    return 0 if usc.passed else 1


def _parse_point(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected X,Y, got {text!r}")
    return np.array([float(parts[0]), float(parts[1])])


def _cmd_quotient_dist(args) -> int:
    bundle = load_scene(args.scene)
    decomp = bundle.decomposition()
    graph = QuotientGraph(bundle.scene, decomp)
    total = 0.0
    ids = []
    for raw in (args.src, args.dst):
        p = _parse_point(raw)
        snap_d, snap_i = bundle.scene.sample.kdtree.query(p)
        total += float(snap_d)
        owner = decomp.owner[snap_i]
        ids.append(decomp.ids[owner] if owner >= 0 else tuple(bundle.scene.sample.points[snap_i]))
    va = graph.vertex_of_sample[bundle.scene.sample.kdtree.query(_parse_point(args.src))[1]]
    vb = graph.vertex_of_sample[bundle.scene.sample.kdtree.query(_parse_point(args.dst))[1]]
    q = graph.distance_quanta(int(va), int(vb))
    dist = q * graph.quantum if np.isfinite(q) else float("inf")
    print(f"from {ids[0]}")
    print(f"to {ids[1]}")
    print(f"snap-error {total!r}")
    print(f"distance {dist!r}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="starshrink",
        description="Construct and certify shrinking homeomorphisms for planar scenes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_shrink = sub.add_parser("shrink", help="shrink a scene and certify the chain")
    p_shrink.add_argument("--scene", required=True)
    p_shrink.add_argument("--epsilon", type=float, default=0.2)
    p_shrink.add_argument("--frames", type=int, default=0)
    p_shrink.add_argument("--out", default=None, help="directory for frames and chain")
    p_shrink.add_argument("--report", default=None, help="report file (default stdout)")
    p_shrink.add_argument("--sequence", type=int, default=None, metavar="NMAX",
                          help="run the approximating sequence for n = 1..NMAX")
    p_shrink.set_defaults(func=_cmd_shrink)

    p_check = sub.add_parser("check", help="load a scene and print its certificates")
    p_check.add_argument("--scene", required=True)
    p_check.set_defaults(func=_cmd_check)

    p_q = sub.add_parser("quotient-dist", help="quotient distance between two points")
    p_q.add_argument("--scene", required=True)
    p_q.add_argument("--from", dest="src", required=True, metavar="X,Y")
    p_q.add_argument("--to", dest="dst", required=True, metavar="X,Y")
    p_q.set_defaults(func=_cmd_quotient_dist)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SceneParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ShrinkError as exc:
        print(f"shrink error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
