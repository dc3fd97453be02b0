#!/usr/bin/env python3
"""Miniature separation experiment on the two-balls construction.

One unit ball and one much smaller ball, each cut in half by the comparator.
The binned baseline must commit to a single bin radius for the whole space,
so whichever radius suits the big ball over-merges the small one; the
hierarchical agent adapts its scale per region.  We run both at two values
of the small radius and print how their attainable regret moves.

Desk scale (T = 512 per ball, 3 seeds): a couple of minutes.
"""
import numpy as np

from hnncb.agents import run_exp3, run_hnn_cb, run_nan
from hnncb.bandit import SubroutineParams
from hnncb.environments import TwoBallsConfig, gen_two_balls

RHO_GRID = [2.0 ** (-k) for k in range(0, 7)]
HNN_PARAMS = SubroutineParams(lam=4.0, eta=0.15, gamma=0.2, theta=0.1)
NAN_PARAMS = SubroutineParams(lam=4.0, eta=0.05, gamma=0.05, theta=0.02)
SEEDS = range(3)
T_PER_BALL = 512

for r in (1.0, 1 / 32):
    hnn, exp3 = [], []
    nan = np.zeros((len(SEEDS), len(RHO_GRID)))
    for seed in SEEDS:
        cfg = TwoBallsConfig(dim=2, r=r, trials_per_ball=T_PER_BALL,
                             gap=0.5, seed=seed)
        inst, y, model = gen_two_balls(cfg)
        hnn.append(run_hnn_cb(inst, model, 1.5, HNN_PARAMS, seed=seed,
                              reference=y).final_regret())
        exp3.append(run_exp3(inst, model, NAN_PARAMS, seed=seed,
                             reference=y).final_regret())
        recs = run_nan(inst, model, 1.5, NAN_PARAMS, rho_grid=RHO_GRID,
                       seed=seed, reference=y)
        nan[seed] = [rec.final_regret() for rec in recs]
    per_rho = nan.mean(axis=0)
    best_idx = int(np.argmin(per_rho))
    print(f"\nsmall-ball radius r = {r:g}  (T = {2 * T_PER_BALL}, "
          f"max pseudo-regret {0.5 * 2 * T_PER_BALL:.0f})")
    print(f"  context-free exp3     : {np.mean(exp3):7.1f}")
    print(f"  hierarchical agent    : {np.mean(hnn):7.1f}")
    print(f"  binned nn, per radius : "
          + "  ".join(f"{v:.0f}" for v in per_rho))
    print(f"  binned nn, best radius: {per_rho[best_idx]:7.1f} "
          f"(rho = {RHO_GRID[best_idx]:g})")

print("\nshrinking the small ball leaves the hierarchical agent's regret "
      "roughly unchanged, while the\nbest single bin radius deteriorates: "
      "the small ball's boundary is finer than any radius that\nstill suits "
      "the big ball")
