"""Euclidean boundary-cover geometry: dyadic indices and lower bounds."""
import numpy as np
import pytest

from hnncb.audit import AnalysisConstants, theorem2_margin
from hnncb.environments import (BoundaryCoverConfig, DiskPolicy,
                                HalfspacePolicy, gen_boundary_cover)
from hnncb.errors import CoverViolation
from hnncb.metric import MetricInstance

K = AnalysisConstants(sigma=0.5, nu=1.0)


def test_dyadic_index_hand_cases():
    # one cover ball at the origin, radius 0.1, xi = 1.5
    pol = HalfspacePolicy(np.array([0.0, 1.0]))
    pts = np.array([
        [0.0, 0.375],    # 2.5 * xi * r from the centre -> j = 2
        [0.0, -0.2],     # within 2 * xi * r -> j = 1
        [0.0, 0.12],     # inside the xi-inflated ball -> j = 0, margin trial
        [0.05, -0.3],
    ])
    cfg = BoundaryCoverConfig(policy=pol, balls=[(np.zeros(2), 0.1)],
                              xi=1.5, C=2.0, T=4, dim=2, seed=0)
    inst = MetricInstance.from_contexts(pts, K=2)
    rep = theorem2_margin(inst, cfg, K)
    # |x4| = 0.304 > 2 xi r = 0.3, so it needs the j = 2 inflation as well
    assert rep.j_of.tolist() == [2, 1, 0, 2]
    assert rep.i_of.tolist() == [1, 1, 1, 1]
    assert rep.margin.tolist() == [False, False, True, False]
    assert rep.ok, [c.check_id for c in rep.checks if not c.passed]


def _linear_cover(n_balls=5, radius=0.13):
    xs = np.linspace(-0.45, 0.45, n_balls)
    return [(np.array([x, 0.0]), radius) for x in xs]


def test_crossings_live_on_the_boundary():
    pol = HalfspacePolicy(np.array([0.0, 1.0]))
    pts = np.array([[0.0, 0.375], [0.0, -0.2], [0.3, 0.21], [-0.2, -0.25]])
    cfg = BoundaryCoverConfig(policy=pol, balls=_linear_cover(), xi=1.05,
                              C=2.0, T=4, dim=2, seed=0)
    inst = MetricInstance.from_contexts(pts, K=2)
    rep = theorem2_margin(inst, cfg, K)
    assert np.abs(rep.b_points[:, 1]).max() <= 1e-9


def _arc_cover(center, radius, n_balls=5, ball_r=0.09):
    # cover only the arc of the circle that lies inside the domain ball
    lo = np.arctan2(0.242, -0.0625)
    hi = 2 * np.pi - lo
    angles = np.linspace(lo, hi, n_balls)
    return [(center + radius * np.array([np.cos(a), np.sin(a)]), ball_r)
            for a in angles]


@pytest.mark.parametrize("shape", ["linear", "circular"])
def test_generated_instances_satisfy_lower_bounds(shape):
    if shape == "linear":
        pol = HalfspacePolicy(np.array([0.0, 1.0]))
        balls = _linear_cover()
    else:
        # the disk pokes out of the domain, so only an arc needs covering
        pol = DiskPolicy(np.array([0.5, 0.0]), 0.25)
        balls = _arc_cover(np.array([0.5, 0.0]), 0.25)
    cfg = BoundaryCoverConfig(policy=pol, balls=balls, xi=1.5, C=1.0,
                              T=300, dim=2, seed=3)
    inst, y, margin, model = gen_boundary_cover(cfg, validate=True)
    rep = theorem2_margin(inst, cfg, K)
    assert rep.ok, [(c.check_id, c.witness) for c in rep.checks if not c.passed]
    min_r = min(r for _, r in balls)
    assert rep.epsilon >= 0.5 * (cfg.xi - 1.0) * min_r - 1e-12
    for t in range(inst.T):
        i = rep.i_of[t] - 1
        bound = 2.0 ** (rep.j_of[t] - 1) * (cfg.xi - 1.0) * balls[i][1]
        assert rep.delta_m[t] >= bound - 1e-12


def test_uncovered_crossing_raises():
    pol = HalfspacePolicy(np.array([0.0, 1.0]))
    balls = [(np.array([-0.35, 0.0]), 0.1)]   # covers only part of the chord
    pts = np.array([[0.3, 0.2], [0.3, -0.2], [-0.35, 0.05], [-0.35, -0.05]])
    cfg = BoundaryCoverConfig(policy=pol, balls=balls, xi=1.2, C=2.0,
                              T=4, dim=2, seed=0)
    inst = MetricInstance.from_contexts(pts, K=2)
    with pytest.raises(CoverViolation):
        theorem2_margin(inst, cfg, K)


def test_report_json(tmp_path):
    pol = HalfspacePolicy(np.array([0.0, 1.0]))
    cfg = BoundaryCoverConfig(policy=pol, balls=_linear_cover(), xi=1.5,
                              C=1.0, T=100, dim=2, seed=5)
    inst, *_ = gen_boundary_cover(cfg, validate=False)
    rep = theorem2_margin(inst, cfg, K)
    data = rep.to_json_dict()
    assert {"epsilon", "margin_size", "cells", "checks"} <= set(data)
