#!/usr/bin/env python3
"""Tour of the hierarchical router on a small hand-checkable instance.

Routes a handful of points on the line, prints the resulting tree, and then
verifies the structural invariants on a larger random cloud:

* the parent always sits one level above its child,
* the parent link is shorter than (1/2)^(depth-1),
* trials sharing a level are strictly separated,
* subtrees stay within twice their root's scale.
"""
import numpy as np

from hnncb.metric import MetricInstance, aspect_ratio
from hnncb.router import HnnRouter, tree_relations

# -- 1. a tiny instance traced by hand --------------------------------------

xs = [0.0, 0.30, 0.35, 0.90]
inst = MetricInstance.from_contexts(np.array(xs)[:, None], K=2)
router = HnnRouter(inst, nu=1.0)
for t in range(2, 5):
    parent, depth = router.route(t)
    print(f"trial {t} (x={xs[t - 1]:.2f}) -> parent {parent}, depth {depth}")

des, anc, leaves = tree_relations(router.parent, 4)
print(f"leaves: {sorted(leaves)}, ancestors of 4: {sorted(anc[4])}")
print("\nper-trial diagnostics (JSON lines):")
print(router.diagnostics_jsonl())

# -- 2. invariants on a random cloud -----------------------------------------

rng = np.random.default_rng(7)
pts = rng.random((400, 2))
inst = MetricInstance.from_contexts(pts, K=2)
router = HnnRouter(inst, nu=1.5)
for t in range(2, 401):
    router.route(t)

depth = router.depth[1:]
parent = router.parent[1:]
D = inst.full_matrix()
for t in range(2, 401):
    p = parent[t - 1]
    assert depth[p - 1] == depth[t - 1] - 1
    assert D[t - 1, p - 1] <= 0.5 ** (depth[t - 1] - 1) + 1e-12

for lev in np.unique(depth):
    idx = np.nonzero(depth == lev)[0]
    if len(idx) > 1:
        sub = D[np.ix_(idx, idx)]
        np.fill_diagonal(sub, np.inf)
        assert sub.min() > 0.5 ** int(lev) / 1.5

des, _, _ = tree_relations(router.parent, 400)
for t in range(1, 401):
    arr = np.array(sorted(des[t])) - 1
    assert D[t - 1, arr].max() <= 2.0 * 0.5 ** int(depth[t - 1]) + 1e-12

delta = aspect_ratio(inst)
print(f"\n400-point cloud: max depth {depth.max()} "
      f"(bound 1 + log2(1/spread) = {1 + np.log2(1 / delta):.1f}), "
      f"all structural invariants hold")
print(f"total distance evaluations: {router.distance_evals} "
      f"({router.distance_evals / 399:.0f} per routed trial)")
