"""Shrink a whole null decomposition, one big element at a time.

Five elements with diameters 0.8, 0.5, 0.3, 0.05, 0.02 at target 0.2:
exactly the three big ones get an elementary squeeze, each confined to a
pulled-back quotient ball disjoint from everything still pending, and the
composite passes both shrinking conditions.
"""

from starshrink import scenes
from starshrink.decomposition import QuotientGraph, bing_check
from starshrink.reports import serialize_report
from starshrink.shrink import _activate_stage0, shrink_null_se

bundle = scenes.build("mixed_five")
base = bundle.decomposition()
graph = QuotientGraph(bundle.scene, base)
print("element diameters:", [round(d, 3) for d in base.elements.diameters])

eps = 0.2
se_sets = [_activate_stage0(el, el.carrier) for el in bundle.rse.elements]
steps = []
chain = shrink_null_se(bundle.scene, base, se_sets, eps, graph=graph, steps=steps)

print(f"\ntarget {eps}: {len(steps)} elementary squeezes, {len(chain)} stages total")
for s in steps:
    print(f"  element {s.element_id}: {s.diam_before:.3f} -> {s.diam_after:.4f} "
          f"({s.stages} stages)")

report = bing_check(base, chain, eps, graph=graph)
report.steps = steps
print("\n" + serialize_report(report))
