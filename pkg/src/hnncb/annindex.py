"""Insert-only approximate nearest-neighbour indices over growing trial sets.

Two interchangeable implementations are provided:

* :class:`NavigatingNetIndex` -- nested nets at scales 2^-i with explicit
  parent links between consecutive scales.  Queries prune by subtree radius
  and satisfy the nu-approximation contract; at nu = 1 they are exact.
* :class:`LinearScanIndex` -- the exhaustive reference with the same
  interface, used as the oracle in property tests and for tiny member sets.

Both count every metric-oracle call they issue in ``distance_evals``.
"""
from __future__ import annotations

import numpy as np

from .errors import DiameterViolation, DuplicateMember, EmptyIndex

_MAX_SCALE = 96  # 2^-96 is far below any representable positive separation


class NavigatingNetIndex:
    """Nested nets over inserted trials, one net per scale 2^-i.

    Net invariants (``present(i)`` = members with entry scale <= i):

    * packing: members of ``present(i)`` are pairwise > 2^-i apart;
    * covering: every member is within 2^-(i-1) of some point of
      ``present(i)`` (its scale-i ancestor via parent links).

    Requires the metric to have diameter <= 1 and strictly positive
    distances between distinct members.
    """

    def __init__(self, instance):
        self._instance = instance
        self._root = None
        self._entry = {}        # trial -> entry scale (root: 0)
        self._parent = {}       # trial -> parent trial
        self._children = {}     # (parent trial, entry scale) -> [trials]
        self._max_scale = 0
        self._evals = 0

    @property
    def members(self):
        return self._entry.keys()

    @property
    def distance_evals(self):
        return self._evals

    def __len__(self):
        return len(self._entry)

    def _dists(self, t, ids):
        self._evals += len(ids)
        return self._instance.dist_many(t, ids)

    def insert(self, t):
        """Insert trial t, restoring packing/covering invariants."""
        if t in self._entry:
            raise DuplicateMember(f"trial {t} already inserted")
        if self._root is None:
            self._root = t
            self._entry[t] = 0
            return
        d = {self._root: float(self._dists(t, [self._root])[0])}
        if d[self._root] > 1.0:
            raise DiameterViolation(
                f"dist({t}, {self._root}) = {d[self._root]:.6f} > 1")
        if d[self._root] == 0.0:
            raise DuplicateMember(f"trial {t} coincides with {self._root}")
        # Descend scale by scale.  Loop invariant: frontier holds every
        # member of present(s-1) within 2^-(s-2) of t.
        frontier = [self._root]
        best_parent, best_scale = self._root, 1
        s = 1
        while frontier and s <= _MAX_SCALE:
            fresh = [c for p in frontier for c in self._children.get((p, s), ())]
            if fresh:
                for c, dc in zip(fresh, self._dists(t, fresh)):
                    d[c] = float(dc)
                    if dc == 0.0:
                        raise DuplicateMember(f"trial {t} coincides with {c}")
            radius = 2.0 ** (-s)
            keep = [c for c in frontier + fresh if d[c] <= 2.0 * radius]
            near = [c for c in keep if d[c] <= radius]
            if near:
                best_parent = min(near, key=lambda c: (d[c], c))
                best_scale = s + 1
            frontier = keep
            s += 1
        self._entry[t] = best_scale
        self._parent[t] = best_parent
        self._children.setdefault((best_parent, best_scale), []).append(t)
        if best_scale > self._max_scale:
            self._max_scale = best_scale

    def query(self, t, nu=1.0):
        """Return a member s with dist(s, t) <= nu * min over members.

        Deterministic given insertion order and t; exact when nu = 1.
        """
        if nu < 1.0:
            raise ValueError("nu must be >= 1")
        if self._root is None:
            raise EmptyIndex("query on empty index")
        d = {self._root: float(self._dists(t, [self._root])[0])}
        best = self._root
        cand = [self._root]
        for s in range(1, self._max_scale + 1):
            fresh = [c for p in cand for c in self._children.get((p, s), ())]
            if fresh:
                for c, dc in zip(fresh, self._dists(t, fresh)):
                    d[c] = float(dc)
                    if (dc, c) < (d[best], best):
                        best = c
            # A present-at-s node's subtree stays within 2^-(s-1) of it.
            bound = d[best] / nu + 2.0 ** (-(s - 1))
            cand = [c for c in cand + fresh if d[c] < bound]
            if not cand:
                break
        return best

    def net_members(self, scale):
        """Members present at the given scale (test/diagnostic helper)."""
        return sorted(m for m, e in self._entry.items() if e <= scale)

    @property
    def max_scale(self):
        return self._max_scale


class LinearScanIndex:
    """Exact reference index: queries scan every member."""

    def __init__(self, instance):
        self._instance = instance
        self._members = []
        self._member_set = set()
        self._arr = None
        self._evals = 0

    @property
    def members(self):
        return set(self._members)

    @property
    def distance_evals(self):
        return self._evals

    def __len__(self):
        return len(self._members)

    def insert(self, t):
        if t in self._member_set:
            raise DuplicateMember(f"trial {t} already inserted")
        self._members.append(t)
        self._member_set.add(t)
        self._arr = None

    def query(self, t, nu=1.0):
        if nu < 1.0:
            raise ValueError("nu must be >= 1")
        if not self._members:
            raise EmptyIndex("query on empty index")
        if self._arr is None:
            self._arr = np.array(self._members, dtype=int)
            self._order = np.argsort(self._arr)
        self._evals += len(self._members)
        dists = self._instance.dist_many(t, self._arr)
        # smallest distance, ties broken by smallest trial id
        sorted_d = dists[self._order]
        k = int(np.argmin(sorted_d))
        return int(self._arr[self._order[k]])
