"""Render a shrink as SVG frames; every frame is itself a homeomorphism.

Frames scale each stage's knot displacements linearly in time, so the
intermediate maps stay monotone radial homeomorphisms rather than mere
blends of start and end positions.  Output is deterministic byte for byte.
"""

import os

from starshrink import scenes
from starshrink.cli import run_shrink
from starshrink.maps import check_homeo
from starshrink.geometry import CompactSample, probe_grid

out_dir = os.path.join(os.path.dirname(__file__), "output", "two_lobe_frames")
bundle = scenes.build("two_lobe")
report, chain, frames = run_shrink(bundle, eps=0.15, frame_count=10, out_dir=out_dir)

print(f"chain of {len(chain)} stages, report pass={report.passed}")
print(f"{len(frames)} frames in {out_dir}")

grid = CompactSample(probe_grid(bundle.scene.domain.bounds(), 80), 0.05)
for t in (0.25, 0.5, 0.75):
    partial = chain.partial(t)
    rep = check_homeo(partial, grid, 1e-9)
    print(f"  time {t}: partial chain of {len(partial)} stages, "
          f"homeomorphism check pass={rep.passed}")
