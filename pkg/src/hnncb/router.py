"""Online hierarchical nearest-neighbour routing.

Each trial t > 1 queries an approximate nearest neighbour on every populated
level, takes the deepest level whose neighbour lies within that level's
threshold (1/2)^level, and becomes a child of that neighbour one level down.
Level 0 holds trial 1 only and always qualifies because the metric has
diameter <= 1, which makes the parent-link invariants

    depth(parent(t)) = depth(t) - 1     and
    dist(t, parent(t)) <= (1/2)^(depth(t) - 1)

hold for every routed trial.
"""
from __future__ import annotations

import json

import numpy as np

from .annindex import NavigatingNetIndex
from .errors import DiameterViolation, UnroutedPredecessor

C = 0.5


class HnnRouter:
    """Sequential router state: depths, parents and per-level ANN indices.

    Construct with trial 1 implicitly routed at depth 0.  ``route`` must be
    called for t = 2, 3, ... in order; the state is strictly sequential
    within a run.
    """

    def __init__(self, instance, nu=1.0, index_factory=NavigatingNetIndex):
        if nu < 1.0:
            raise ValueError("nu must be >= 1")
        self.instance = instance
        self.nu = float(nu)
        self.c = C
        T = instance.T
        self.depth = np.full(T + 1, -1, dtype=int)   # index by trial id; [0] unused
        self.parent = np.zeros(T + 1, dtype=int)     # 0 = no parent
        self.children = [[] for _ in range(T + 1)]
        self._index_factory = index_factory
        self.levels = {0: index_factory(instance)}
        self.levels[0].insert(1)
        self.depth[1] = 0
        self._routed = 1
        self._max_depth = 0
        self.trace = []

    # -- routing ----------------------------------------------------------

    def route(self, t):
        """Route trial t; returns its (parent, depth) and updates state."""
        if t != self._routed + 1:
            raise UnroutedPredecessor(
                f"route({t}) called with trials routed up to {self._routed}")
        evals_before = self.distance_evals
        top = self._max_depth
        best_level = None
        best_nn = None
        nn_dist = None
        for lev in range(top + 1):
            q = self.levels[lev].query(t, self.nu)
            dq = self.instance.dist(t, q)
            if lev == 0 and dq > 1.0:
                raise DiameterViolation(
                    f"dist({t}, {q}) = {dq:.6f} > 1; rescale the metric")
            if dq <= self.c ** lev:
                best_level = lev
                best_nn = q
                nn_dist = dq
        depth = best_level + 1
        self.depth[t] = depth
        self.parent[t] = best_nn
        self.children[best_nn].append(t)
        if depth not in self.levels:
            self.levels[depth] = self._index_factory(self.instance)
        self.levels[depth].insert(t)
        if depth > self._max_depth:
            self._max_depth = depth
        self._routed = t
        self.trace.append({
            "trial": t,
            "depth": depth,
            "parent": int(best_nn),
            "dist_to_parent": nn_dist,
            "levels_probed": top + 1,
            "distance_evals": self.distance_evals - evals_before + top + 1,
        })
        return int(best_nn), int(depth)

    @property
    def routed(self):
        return self._routed

    @property
    def distance_evals(self):
        """Oracle calls made by the level indices so far."""
        return sum(ix.distance_evals for ix in self.levels.values())

    def max_depth(self):
        """Deepest level assigned so far."""
        return int(self._max_depth)

    def diagnostics_jsonl(self):
        """One JSON object per routed trial, in routing order."""
        return "\n".join(json.dumps(rec) for rec in self.trace)


def tree_relations(parent, T):
    """Descendant/ancestor closures and leaves of the routing tree.

    ``parent`` maps trial ids to parent ids with parent[1] = 0 (indexable by
    trial id, as produced by :class:`HnnRouter`).  Both closures include the
    trial itself.
    """
    children = [[] for _ in range(T + 1)]
    for t in range(2, T + 1):
        children[int(parent[t])].append(t)
    des = {t: {t} for t in range(1, T + 1)}
    for t in range(T, 1, -1):
        des[int(parent[t])] |= des[t]
    anc = {}
    for t in range(1, T + 1):
        chain = {t}
        s = t
        while s != 1:
            s = int(parent[s])
            chain.add(s)
        anc[t] = chain
    leaves = {t for t in range(1, T + 1) if not children[t]}
    return des, anc, leaves
