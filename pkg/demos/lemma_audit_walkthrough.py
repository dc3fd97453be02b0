#!/usr/bin/env python3
"""Walk through the numerical audit of a routed run.

Routes a clustered instance, picks a comparator policy with a margin around
its decision boundary, computes every analysis object (boundary distances,
packing number, the label-consistent set and its frontier, the synthetic
policy), and prints the full check table.
"""
import numpy as np

from hnncb.audit import AnalysisConstants, MarginSpec, verify_lemmas
from hnncb.environments import gap_means
from hnncb.metric import MetricInstance
from hnncb.router import HnnRouter

rng = np.random.default_rng(42)

# two clusters; the comparator labels each side of the median x-coordinate
centers = np.array([[0.25, 0.5], [0.75, 0.5]])
pts = centers[rng.integers(0, 2, 150)] + 0.08 * rng.normal(size=(150, 2))
inst = MetricInstance.from_contexts(pts, K=2)
split = np.median(inst.contexts[:, 0])
y = np.where(inst.contexts[:, 0] < split, 1, 2)

# hold out the strip nearest the split as the margin
margin = np.abs(inst.contexts[:, 0] - split) < \
    np.quantile(np.abs(inst.contexts[:, 0] - split), 0.2)
spec = MarginSpec(policy=y, margin=margin)

router = HnnRouter(inst, nu=1.0)
for t in range(2, inst.T + 1):
    router.route(t)

consts = AnalysisConstants(sigma=0.5, nu=1.0)
means = gap_means(y, 2, gap=0.5)
report = verify_lemmas(inst, router.depth[1:], router.parent[1:], spec,
                       consts, means, lam=2.0)

q = report.quantities
print(f"margin holds out {int(margin.sum())} of {inst.T} trials")
print(f"min boundary distance (off-margin, disagreeing): {q.epsilon:.4f}")
print(f"packing number ({report.packing.mode}): {report.packing.size}")
print(f"label-consistent trials: {int(report.cts.sum())}, "
      f"frontier size: {len(report.sets.b_set)}, "
      f"representatives: {len(report.sets.n_set)}")
print(f"synthetic policy switches on {report.switch_edges} tree edges "
      f"(budget 2 x frontier = {2 * len(report.sets.b_set)})")
print(f"mismatch set size: {len(report.v_set)}")
print(f"assembled bound components: {report.bound_components}")

print("\ncheck table:")
for chk in report.checks:
    mark = "ok " if chk.passed else "FAIL"
    print(f"  [{mark}] {chk.check_id}: {chk.statement}")
assert report.ok
