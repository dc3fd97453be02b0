"""Numerical audit of a finished run: analysis quantities and inequality checks.

Given a routed run (depths and parents), a comparator policy with a held-out
margin, and exact loss means, this module computes every analysis object of
the accompanying theory (boundary distances, packing numbers, the
label-consistent trial set, its frontier, the synthetic policy) and verifies
the inequalities that tie them together.  All quantities are recomputed by
direct enumeration; each check carries a witness when it fails.

Array convention: ``depths``/``parents``/``policy`` are positional length-T
arrays (row t-1 for trial t); parents hold 1-based ids with 0 = none.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bandit import switch_count
from .environments import boundary_crossing, margin_mask, nearest_disagreeing
from .errors import (ConstructionGap, CoverViolation, DegeneratePolicy,
                     TooLargeForExact)
from .router import tree_relations

EXACT_PACKING_LIMIT = 22
_TOL = 1e-12


@dataclass(frozen=True)
class AnalysisConstants:
    """Audit-only constants derived from (sigma, nu).

    sigma is a free parameter of the analysis, unknown to the algorithm and
    swept over a grid by the audit harness.
    """
    sigma: float
    nu: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must be in (0, 1)")
        if self.nu < 1.0:
            raise ValueError("nu must be >= 1")

    @property
    def c(self):
        return 0.5

    @property
    def zeta(self):
        return 2.0 / self.sigma

    @property
    def beta(self):
        z, c, s = self.zeta, self.c, self.sigma
        return (s * z + (1.0 + z) / c) / (z * (1.0 - s))

    @property
    def omega(self):
        z, c = self.zeta, self.c
        return (1.0 - c) * c / (2.0 * self.nu * (1.0 + z))


@dataclass
class MarginSpec:
    """Comparator policy plus a held-out margin.

    Requires two off-margin trials with differing labels, otherwise every
    boundary distance would be over an empty set.
    """
    policy: np.ndarray          # (T,) actions 1..K
    margin: np.ndarray          # (T,) boolean mask

    def __post_init__(self):
        self.policy = np.asarray(self.policy, dtype=int)
        self.margin = np.asarray(self.margin, dtype=bool)
        if self.policy.shape != self.margin.shape:
            raise ValueError("policy and margin must have equal length")
        off = self.policy[~self.margin]
        if len(set(off.tolist())) < 2:
            raise DegeneratePolicy(
                "need two off-margin trials with differing labels")

    @classmethod
    def from_ids(cls, policy, margin_ids, T=None):
        policy = np.asarray(policy, dtype=int)
        T = T if T is not None else len(policy)
        mask = np.zeros(T, dtype=bool)
        for t in margin_ids:
            mask[t - 1] = True
        return cls(policy=policy, margin=mask)

    @property
    def margin_ids(self):
        return [int(i) + 1 for i in np.nonzero(self.margin)[0]]


@dataclass
class MarginQuantities:
    delta_m: np.ndarray       # distance to nearest off-margin disagreeing trial
    epsilon: float            # min over trials of delta_m
    theta: np.ndarray         # distance to nearest off-margin trial
    action_sets: list         # per-trial frozenset of labels within beta*theta
    ltilde: np.ndarray        # worst exact mean over the action set


def _delta_margin(D, policy, off):
    T = len(policy)
    delta_m = np.empty(T)
    for t in range(T):
        cand = off & (policy != policy[t])
        if not cand.any():
            raise DegeneratePolicy(
                f"trial {t + 1} has no off-margin disagreeing trial")
        delta_m[t] = D[t, cand].min()
    return delta_m, float(delta_m.min())


def margin_quantities(instance, spec, consts, means):
    """All five boundary quantities by direct enumeration.

    For off-margin trials theta(t) = 0 falls out (the trial itself is at
    distance zero), so the action set collapses to the trial's own label and
    ltilde(t) is the comparator's exact mean.
    """
    D = instance.full_matrix()
    off = ~spec.margin
    y = spec.policy
    delta_m, epsilon = _delta_margin(D, y, off)
    T = instance.T
    theta = np.array([D[t, off].min() for t in range(T)])
    action_sets = []
    ltilde = np.empty(T)
    means = np.asarray(means, dtype=float)
    for t in range(T):
        ball = D[t] <= consts.beta * theta[t]
        acts = frozenset(int(a) for a in y[ball])
        action_sets.append(acts)
        ltilde[t] = max(means[t, a - 1] for a in acts)
    return MarginQuantities(delta_m=delta_m, epsilon=epsilon, theta=theta,
                            action_sets=action_sets, ltilde=ltilde)


# -- packing ---------------------------------------------------------------

@dataclass(frozen=True)
class PackingResult:
    size: int
    members: tuple            # 1-based trial ids
    mode: str                 # "exact" or "greedy" (greedy is a lower bound)


def packing_number(instance, delta_m, omega, mode="auto"):
    """Largest set of trials pairwise farther than omega * min of their
    boundary distances.

    "exact" runs branch-and-bound over the conflict graph (T <= 22);
    "greedy" adds trials by descending boundary distance and reports a
    lower bound.  "auto" picks exact when feasible.
    """
    T = instance.T
    if mode == "auto":
        mode = "exact" if T <= EXACT_PACKING_LIMIT else "greedy"
    if mode == "exact" and T > EXACT_PACKING_LIMIT:
        raise TooLargeForExact(f"T = {T} > {EXACT_PACKING_LIMIT}")
    D = instance.full_matrix()
    dm = np.asarray(delta_m, dtype=float)
    thr = omega * np.minimum(dm[:, None], dm[None, :])
    conflict = (D <= thr) & ~np.eye(T, dtype=bool)
    if mode == "greedy":
        order = np.lexsort((np.arange(T), -dm))
        chosen = []
        for v in order:
            if all(not conflict[v, u] for u in chosen):
                chosen.append(int(v))
        members = tuple(sorted(c + 1 for c in chosen))
        return PackingResult(size=len(members), members=members, mode="greedy")

    adj = [0] * T
    for i in range(T):
        mask = 0
        for j in np.nonzero(conflict[i])[0]:
            mask |= 1 << int(j)
        adj[i] = mask
    best = {"size": 0, "mask": 0}

    def grow(cand, cur_mask, cur_size):
        if cur_size + bin(cand).count("1") <= best["size"]:
            return
        if cand == 0:
            best["size"] = cur_size
            best["mask"] = cur_mask
            return
        # branch on the most conflicted remaining vertex
        v, vdeg = -1, -1
        m = cand
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            deg = bin(adj[u] & cand).count("1")
            if deg > vdeg:
                v, vdeg = u, deg
        bit = 1 << v
        grow(cand & ~bit & ~adj[v], cur_mask | bit, cur_size + 1)
        grow(cand & ~bit, cur_mask, cur_size)

    grow((1 << T) - 1, 0, 0)
    members = tuple(sorted(i + 1 for i in range(T) if best["mask"] >> i & 1))
    return PackingResult(size=best["size"], members=members, mode="exact")


# -- label-consistent set, frontier, synthetic policy -----------------------

def compute_cts(instance, depths, spec, consts):
    """Trials whose zeta * c^depth neighbourhood sees one off-margin label.

    Vacuously satisfied neighbourhoods count as consistent.  Returned as a
    boolean mask over trials.
    """
    D = instance.full_matrix()
    off = ~spec.margin
    y = spec.policy
    T = instance.T
    out = np.zeros(T, dtype=bool)
    for t in range(T):
        ball = off & (D[t] <= consts.zeta * consts.c ** int(depths[t]))
        out[t] = len(set(y[ball].tolist())) <= 1
    return out


@dataclass
class BoundarySets:
    b_set: frozenset          # frontier trials
    n_set: frozenset          # mutually separated representatives
    q_map: dict               # representative -> frozenset of covered trials


def compute_boundary_sets(instance, depths, parents, cts, consts):
    """Frontier of the consistent set, its representatives, and coverage."""
    T = instance.T
    D = instance.full_matrix()
    par = np.concatenate(([0], np.asarray(parents, dtype=int)))
    _, _, leaves = tree_relations(par, T)
    c, nu = consts.c, consts.nu
    b = set()
    for t in range(1, T + 1):
        if cts[t - 1]:
            if t > 1 and not cts[par[t] - 1]:
                b.add(t)
        elif t in leaves:
            b.add(t)
    n_set = set()
    for t in b:
        dominated = any(
            s != t and depths[s - 1] > depths[t - 1] and
            D[s - 1, t - 1] <= (c ** int(depths[t - 1]) - c ** int(depths[s - 1])) / (2 * nu)
            for s in b)
        if not dominated:
            n_set.add(t)
    q_map = {}
    rest = b - n_set
    for t in n_set:
        q_map[t] = frozenset(
            s for s in rest
            if D[s - 1, t - 1] <= c ** int(depths[s - 1]) / (2 * nu))
    return BoundarySets(b_set=frozenset(b), n_set=frozenset(n_set), q_map=q_map)


def build_hbar(instance, depths, parents, cts, spec, consts):
    """Synthetic policy built inductively from trial 1 to T.

    Four cases keyed on consistency of the trial and presence of a
    consistent child; free choices resolve to the smallest valid trial id,
    and trial 1 defaults to action 1 when unconstrained.
    """
    T = instance.T
    D = instance.full_matrix()
    off = ~spec.margin
    y = spec.policy
    has_cts_child = np.zeros(T, dtype=bool)
    for t in range(2, T + 1):
        if cts[t - 1]:
            has_cts_child[parents[t - 1] - 1] = True
    hbar = np.zeros(T, dtype=int)
    for t in range(1, T + 1):
        radius = consts.zeta * consts.c ** int(depths[t - 1])
        near = np.nonzero(off & (D[t - 1] <= radius))[0]
        if not cts[t - 1]:
            if not has_cts_child[t - 1]:
                hbar[t - 1] = hbar[parents[t - 1] - 1] if t > 1 else 1
            else:
                if near.size == 0:
                    raise ConstructionGap(f"no witness for trial {t}")
                hbar[t - 1] = y[near[0]]
        else:
            if near.size == 0:
                if t == 1:
                    raise ConstructionGap("trial 1 marked consistent")
                hbar[t - 1] = hbar[parents[t - 1] - 1]
            else:
                hbar[t - 1] = y[near[0]]
    return hbar


# -- the audit ---------------------------------------------------------------

@dataclass
class LemmaCheck:
    check_id: str
    statement: str
    passed: bool
    witness: dict = None


@dataclass
class AuditReport:
    sigma: float
    nu: float
    quantities: MarginQuantities
    packing: PackingResult
    cts: np.ndarray
    sets: BoundarySets
    v_set: frozenset
    hbar: np.ndarray
    switch_edges: int
    checks: list = field(default_factory=list)
    bound_components: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_json_dict(self):
        return {
            "sigma": self.sigma,
            "nu": self.nu,
            "epsilon": self.quantities.epsilon,
            "packing_number": self.packing.size,
            "packing_mode": self.packing.mode,
            "cts_size": int(self.cts.sum()),
            "b_size": len(self.sets.b_set),
            "n_size": len(self.sets.n_set),
            "v_size": len(self.v_set),
            "switch_edges": self.switch_edges,
            "bound_components": self.bound_components,
            "checks": [
                {"check_id": c.check_id, "statement": c.statement,
                 "pass": bool(c.passed),
                 **({"witness": c.witness} if c.witness else {})}
                for c in self.checks
            ],
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def verify_lemmas(instance, depths, parents, spec, consts, means,
                  packing_mode="auto", lam=None):
    """Compute every analysis object and evaluate all inequality checks.

    On a correctly routed run every check holds; failures carry a witness
    and indicate either tampered inputs or an implementation bug.  With a
    subroutine budget ``lam`` the report also carries the assembled bound
    components (structure term and both sign variants of the subroutine
    term, whose hidden constants keep them report-only).
    """
    T = instance.T
    D = instance.full_matrix()
    depths = np.asarray(depths, dtype=int)
    parents = np.asarray(parents, dtype=int)
    y = spec.policy
    c, nu, zeta = consts.c, consts.nu, consts.zeta
    par = np.concatenate(([0], parents))
    des, anc, leaves = tree_relations(par, T)
    mq = margin_quantities(instance, spec, consts, means)
    cts = compute_cts(instance, depths, spec, consts)
    sets = compute_boundary_sets(instance, depths, parents, cts, consts)
    hbar = build_hbar(instance, depths, parents, cts, spec, consts)
    v_set = frozenset(
        t for t in range(1, T + 1)
        if hbar[t - 1] != y[t - 1] and not cts[t - 1])
    phi = switch_count(par, hbar)
    packing = packing_number(instance, mq.delta_m, consts.omega,
                             mode=packing_mode)
    b, n_set, q_map = sets.b_set, sets.n_set, sets.q_map
    checks = []

    def add(check_id, statement, witness):
        checks.append(LemmaCheck(check_id, statement, witness is None, witness))

    w = None
    for t in range(2, T + 1):
        for r in range(1, t):
            if depths[r - 1] == depths[t - 1] and \
                    D[r - 1, t - 1] <= c ** int(depths[t - 1]) / nu:
                w = {"r": r, "t": t, "dist": float(D[r - 1, t - 1]),
                     "bound": c ** int(depths[t - 1]) / nu}
                break
        if w:
            break
    add("same_depth_separation",
        "equal-depth trials are separated by more than c^depth / nu", w)

    w = None
    for s in range(1, T + 1):
        if cts[s - 1]:
            bad = [t for t in des[s] if not cts[t - 1]]
            if bad:
                w = {"s": s, "t": bad[0]}
                break
    add("region_descendant_closure",
        "descendants of a label-consistent trial are label-consistent", w)

    w = None
    for s in sorted(b - n_set):
        if not any(s in q_map[t] for t in n_set):
            w = {"s": s}
            break
    add("frontier_coverage",
        "every non-representative frontier trial is covered by a representative", w)

    w = None
    for t in sorted(n_set):
        if len(q_map[t]) > depths[t - 1] + 1:
            w = {"t": t, "q_size": len(q_map[t]), "bound": int(depths[t - 1]) + 1}
            break
        deep = [s for s in q_map[t] if depths[s - 1] > depths[t - 1]]
        if deep:
            w = {"t": t, "s": deep[0]}
            break
    add("probe_set_size",
        "a representative covers at most depth + 1 trials, none deeper than itself", w)

    w = None
    for t in sorted(b):
        lhs = c ** int(depths[t - 1])
        rhs = mq.delta_m[t - 1] * c / (1.0 + zeta)
        if lhs < rhs - _TOL:
            w = {"t": t, "scale": lhs, "bound": float(rhs)}
            break
    add("frontier_scale_lower",
        "frontier trials sit at scale no finer than their boundary distance share", w)

    w = None
    ns = sorted(n_set)
    for i, s in enumerate(ns):
        for t in ns[i + 1:]:
            thr = consts.omega * min(mq.delta_m[s - 1], mq.delta_m[t - 1])
            if D[s - 1, t - 1] <= thr:
                w = {"s": s, "t": t, "dist": float(D[s - 1, t - 1]),
                     "bound": float(thr)}
                break
        if w:
            break
    add("anchor_separation",
        "representatives are pairwise farther than omega * min boundary distance", w)

    if packing.mode == "exact":
        w = None if len(n_set) <= packing.size else \
            {"n_size": len(n_set), "packing": packing.size}
        add("anchor_count",
            "representatives number at most the exact packing number", w)
    else:
        sep_ok = checks[-1].passed
        w = None if sep_ok else {"reason": "anchor separation failed"}
        add("anchor_count",
            "representatives form a valid packing, so cannot exceed the maximum",
            w)

    bound_log = math.log2((1.0 + zeta) / (c * mq.epsilon))
    w = None
    for t in sorted(b):
        if depths[t - 1] > bound_log + 1e-9:
            w = {"t": t, "depth": int(depths[t - 1]), "bound": bound_log}
            break
    add("frontier_depth_bound",
        "frontier depths stay below log2((1 + zeta) / (c * epsilon))", w)

    if n_set:
        cap = len(n_set) * (max(int(depths[t - 1]) for t in n_set) + 1) + len(n_set)
        w = None if len(b) <= cap else {"b_size": len(b), "bound": cap}
    else:
        w = None if not b else {"b_size": len(b), "bound": 0}
    add("frontier_size_bound",
        "frontier size is at most |reps| * (max rep depth + 2)", w)

    w = None
    for t in range(1, T + 1):
        if not (anc[t] & b) and cts[t - 1]:
            w = {"t": t}
            break
    add("uncovered_ancestry",
        "a trial with no frontier ancestor is not label-consistent", w)

    w = None
    for t in range(1, T + 1):
        if not ((anc[t] | des[t]) & b):
            w = {"t": t}
            break
    add("frontier_reach",
        "every trial has a frontier trial among its ancestors or descendants", w)

    w = None
    for t in range(2, T + 1):
        if hbar[t - 1] != hbar[parents[t - 1] - 1]:
            if not (des[t] & b):
                w = {"t": t, "reason": "no frontier descendant"}
                break
            if t not in b and not any(parents[q - 1] == t for q in b):
                w = {"t": t, "reason": "neither frontier nor frontier parent"}
                break
    add("switch_edge_frontier",
        "every switching edge touches the frontier from above", w)

    w = None if phi <= 2 * len(b) else {"phi": phi, "bound": 2 * len(b)}
    add("switch_budget",
        "the synthetic policy switches on at most 2 |frontier| edges", w)

    w = None
    for t in sorted(v_set):
        if not (des[t] & b):
            w = {"t": t}
            break
    add("mismatch_ancestry",
        "every synthetic-policy mismatch is an ancestor of a frontier trial", w)

    w = None
    for t in range(1, T + 1):
        radius = consts.sigma * zeta * c ** int(depths[t - 1])
        far = [s for s in des[t] if D[s - 1, t - 1] > radius + _TOL]
        if far:
            w = {"t": t, "s": far[0], "dist": float(D[far[0] - 1, t - 1]),
                 "bound": radius}
            break
    add("descendant_radius",
        "descendants stay within sigma * zeta * c^depth of their ancestor", w)

    w = None
    for t in range(1, T + 1):
        if spec.margin[t - 1] and cts[t - 1] and \
                int(hbar[t - 1]) not in mq.action_sets[t - 1]:
            w = {"t": t, "hbar": int(hbar[t - 1]),
                 "actions": sorted(mq.action_sets[t - 1])}
            break
    add("margin_action_capture",
        "on consistent margin trials the synthetic policy picks a captured action",
        w)

    means = np.asarray(means, dtype=float)
    lhs = float(means[np.arange(T), hbar - 1].sum())
    rhs = float(mq.ltilde.sum()) + len(v_set)
    w = None if lhs <= rhs + 1e-9 else {"lhs": lhs, "rhs": rhs}
    add("synthetic_policy_loss",
        "the synthetic policy's expected loss is within |mismatches| of the target",
        w)

    log_eps = math.log(1.0 / mq.epsilon) if mq.epsilon < 1.0 else 0.0
    components = {
        "structure_term": packing.size * log_eps ** 2,
        "switch_budget": 2 * len(b),
    }
    if lam is not None:
        root_kt = math.sqrt(instance.K * T)
        components["subroutine_term_plus"] = \
            (lam + packing.size * log_eps / lam) * root_kt
        components["subroutine_term_minus"] = \
            (lam - packing.size * log_eps / lam) * root_kt
    return AuditReport(sigma=consts.sigma, nu=consts.nu, quantities=mq,
                       packing=packing, cts=cts, sets=sets, v_set=v_set,
                       hbar=hbar, switch_edges=phi, checks=checks,
                       bound_components=components)


# -- Euclidean boundary-cover geometry ---------------------------------------

@dataclass
class Theorem2Report:
    margin: np.ndarray        # boolean mask
    i_of: np.ndarray          # covering ball index (1-based) per trial
    j_of: np.ndarray          # dyadic inflation index per trial
    b_points: np.ndarray      # boundary crossings, one per trial
    q_of: np.ndarray          # nearest off-margin disagreeing trial per trial
    cell_sets: dict           # (i, j) -> tuple of packing members
    delta_m: np.ndarray
    epsilon: float
    checks: list

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def to_json_dict(self):
        return {
            "epsilon": self.epsilon,
            "margin_size": int(self.margin.sum()),
            "cells": {f"{i},{j}": list(v) for (i, j), v in self.cell_sets.items()},
            "checks": [
                {"check_id": c.check_id, "statement": c.statement,
                 "pass": bool(c.passed),
                 **({"witness": c.witness} if c.witness else {})}
                for c in self.checks
            ],
        }


def theorem2_margin(instance, cfg, consts, packing_mode="auto"):
    """Boundary-cover geometry on a Euclidean instance.

    For every trial: the nearest off-margin disagreeing trial, the boundary
    crossing of the segment towards it (bisection to 1e-12), the smallest
    covering ball, and the dyadic inflation index placing the context.  The
    report checks the dyadic lower bounds on boundary distances, the global
    floor on epsilon, and the separation/size of each packing cell.
    """
    if instance.contexts is None:
        raise ValueError("boundary-cover audit needs explicit contexts")
    X = instance.contexts
    T = instance.T
    y = np.asarray(cfg.policy.batch(X), dtype=int)
    margin = margin_mask(cfg, X)
    off = ~margin
    if len(set(y[off].tolist())) < 2:
        raise DegeneratePolicy("need two off-margin trials with differing labels")
    D = instance.full_matrix()
    delta_m, epsilon = _delta_margin(D, y, off)

    centers = np.array([v for v, _ in cfg.balls])
    radii = np.array([r for _, r in cfg.balls])
    J = math.ceil(cfg.C * math.log2(max(T, 2)))
    i_of = np.zeros(T, dtype=int)
    j_of = np.zeros(T, dtype=int)
    q_of = np.zeros(T, dtype=int)
    b_points = np.zeros_like(X)
    for t in range(T):
        q = nearest_disagreeing(X, y, off, t)
        q_of[t] = q + 1
        bpt = boundary_crossing(cfg.policy, X[t], X[q])
        b_points[t] = bpt
        inside = np.nonzero(np.linalg.norm(centers - bpt, axis=1) <= radii + 1e-9)[0]
        if inside.size == 0:
            raise CoverViolation(
                f"crossing for trial {t + 1} lies outside every cover ball")
        i = int(inside[0])
        i_of[t] = i + 1
        gap = float(np.linalg.norm(X[t] - centers[i]))
        for j in range(0, J + 9):
            if gap <= 2.0 ** j * cfg.xi * radii[i]:
                j_of[t] = j
                break
        else:
            raise CoverViolation(
                f"trial {t + 1} outside the largest dyadic inflation")

    packing = packing_number(instance, delta_m, consts.omega, mode=packing_mode)
    cells = {}
    for m in packing.members:
        key = (int(i_of[m - 1]), int(j_of[m - 1]))
        cells.setdefault(key, []).append(m)
    cells = {k: tuple(v) for k, v in cells.items()}

    checks = []

    def add(check_id, statement, witness):
        checks.append(LemmaCheck(check_id, statement, witness is None, witness))

    w = None
    for t in range(T):
        if j_of[t] > 0:
            bound = 2.0 ** (j_of[t] - 1) * (cfg.xi - 1.0) * radii[i_of[t] - 1]
            if delta_m[t] < bound - _TOL:
                w = {"t": t + 1, "delta_m": float(delta_m[t]), "bound": bound}
                break
    add("boundary_gap_lower",
        "boundary distance is at least 2^(j-1) (xi - 1) r_i when j > 0", w)

    w = None
    for t in range(T):
        if j_of[t] == 0:
            bound = 0.5 * (cfg.xi - 1.0) * radii[i_of[t] - 1]
            if not delta_m[t] > bound:
                w = {"t": t + 1, "delta_m": float(delta_m[t]), "bound": bound}
                break
    add("inflation_gap_lower",
        "boundary distance exceeds (xi - 1) r_i / 2 when j = 0", w)

    floor = 0.5 * (cfg.xi - 1.0) * float(radii.min())
    w = None if epsilon >= floor - _TOL else {"epsilon": epsilon, "bound": floor}
    add("margin_floor",
        "the minimum boundary distance is at least (xi - 1) min r_i / 2", w)

    wfrac = consts.omega * (cfg.xi - 1.0) / (2.0 * cfg.xi)
    w = None
    for (i, j), members in sorted(cells.items()):
        rho = 2.0 ** j * cfg.xi * radii[i - 1]
        ms = sorted(members)
        for a in range(len(ms)):
            for bb in range(a + 1, len(ms)):
                d = float(np.linalg.norm(X[ms[a] - 1] - X[ms[bb] - 1]))
                if d <= wfrac * rho * (1.0 - 1e-12):
                    w = {"cell": [i, j], "s": ms[a], "t": ms[bb],
                         "dist": d, "bound": wfrac * rho}
                    break
            if w:
                break
        if w:
            break
    add("cell_separation",
        "packing members of one dyadic cell are spread proportionally to its radius",
        w)

    dim = X.shape[1]
    cap = (1.0 + 2.0 / wfrac) ** dim
    w = None
    for (i, j), members in sorted(cells.items()):
        if len(members) > cap:
            w = {"cell": [i, j], "size": len(members), "bound": cap}
            break
    add("cell_size",
        "each dyadic cell holds a dimension-bounded number of packing members", w)

    return Theorem2Report(margin=margin, i_of=i_of, j_of=j_of,
                          b_points=b_points, q_of=q_of, cell_sets=cells,
                          delta_m=delta_m, epsilon=epsilon, checks=checks)
