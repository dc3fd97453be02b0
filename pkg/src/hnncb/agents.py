"""Agents and baselines: full runs of the online protocol with traces.

Each run function executes the trial loop (reveal distances to the current
trial, pick an action, observe the played action's loss) and returns a
:class:`RunRecord` holding the per-trial trace.  Runs are deterministic
given (instance, config, seed); the single per-run generator is consumed in
a fixed order (action draw, then loss draw, per trial).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .annindex import NavigatingNetIndex
from .bandit import root_node, create_node, select_action, update
from .errors import MissingMeans
from .router import HnnRouter

CSV_HEADER = "trial,action,loss,prob,parent,depth,dist_evals,regret"


@dataclass
class RunRecord:
    """Per-trial trace of one agent run plus the exact means it was run on."""
    label: str
    kind: str
    seed: int
    T: int
    K: int
    actions: np.ndarray      # 1-based actions, row t-1 for trial t
    losses: np.ndarray
    probs: np.ndarray
    parents: np.ndarray      # 1-based trial ids, 0 = none
    depths: np.ndarray
    dist_evals: np.ndarray
    loss_means: np.ndarray   # (T, K)
    regret: np.ndarray       # pseudo-regret curve vs the run's reference
    config: dict = field(default_factory=dict)

    @property
    def cumulative_loss(self):
        return np.cumsum(self.losses)

    def final_regret(self):
        return float(self.regret[-1])

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for i in range(self.T):
                fh.write(f"{i + 1},{int(self.actions[i])},{repr(float(self.losses[i]))},"
                         f"{repr(float(self.probs[i]))},{int(self.parents[i])},"
                         f"{int(self.depths[i])},{int(self.dist_evals[i])},"
                         f"{repr(float(self.regret[i]))}\n")

    def meta_dict(self):
        return {
            "label": self.label,
            "kind": self.kind,
            "seed": self.seed,
            "T": self.T,
            "K": self.K,
            "config": self.config,
            "cumulative_loss": float(self.cumulative_loss[-1]),
            "final_regret": self.final_regret(),
            "total_dist_evals": int(self.dist_evals.sum()),
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.meta_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_run_csv(path):
    """Read a run CSV back into a dict of columns."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return {name: data[name] for name in data.dtype.names}


def regret_vs(record, reference):
    """Pseudo-regret curve of the record against a reference policy.

    ``reference`` is a length-T action array or "best" for the per-trial
    minimiser of the exact means.  Uses means, never sampled losses.
    """
    if record.loss_means is None:
        raise MissingMeans("record carries no exact loss means")
    means = record.loss_means
    t_idx = np.arange(record.T)
    if isinstance(reference, str):
        if reference != "best":
            raise ValueError(f"unknown reference {reference!r}")
        ref_means = means.min(axis=1)
    else:
        ref = np.asarray(reference, dtype=int)
        ref_means = means[t_idx, ref - 1]
    played = means[t_idx, np.asarray(record.actions, dtype=int) - 1]
    return np.cumsum(played - ref_means)


def _begin(instance, t):
    hook = getattr(instance, "begin_trial", None)
    if hook is not None:
        hook(t)


def _finish(label, kind, seed, instance, model, actions, losses, probs,
            parents, depths, evals, config, reference):
    rec = RunRecord(label=label, kind=kind, seed=seed, T=instance.T,
                    K=instance.K, actions=actions, losses=losses, probs=probs,
                    parents=parents, depths=depths, dist_evals=evals,
                    loss_means=model.means, regret=np.zeros(instance.T),
                    config=config)
    rec.regret = regret_vs(rec, reference)
    return rec


def run_hnn_cb(instance, model, nu, params, seed, reference="best",
               label="hnn", index_factory=NavigatingNetIndex):
    """Hierarchical routing composed with the parent-fed subroutine.

    The router state is attached to the returned record as ``record.router``
    for diagnostics and audits.
    """
    T, K = instance.T, instance.K
    rng = np.random.default_rng(seed)
    router = HnnRouter(instance, nu=nu, index_factory=index_factory)
    nodes = {}
    actions = np.zeros(T, dtype=int)
    losses = np.zeros(T)
    probs = np.zeros(T)
    parents = np.zeros(T, dtype=int)
    depths = np.zeros(T, dtype=int)
    evals = np.zeros(T, dtype=int)
    for t in range(1, T + 1):
        _begin(instance, t)
        if t == 1:
            nodes[1] = create_node(1, None, params, K)
        else:
            p, dep = router.route(t)
            parents[t - 1] = p
            depths[t - 1] = dep
            evals[t - 1] = router.trace[-1]["distance_evals"]
            nodes[t] = create_node(t, nodes[p], params, K)
        a, pa = select_action(nodes[t], params, rng)
        loss = model.sample(t, a, rng)
        update(nodes[t], a, loss, pa, params)
        actions[t - 1], probs[t - 1], losses[t - 1] = a, pa, loss
    cfg = {"nu": nu, "lam": params.lam, "eta": params.eta,
           "gamma": params.gamma, "theta": params.theta}
    rec = _finish(label, "hnn", seed, instance, model, actions, losses, probs,
                  parents, depths, evals, cfg, reference)
    rec.router = router
    return rec


def run_nn_cb(instance, model, nu, params, seed, reference="best",
              label="nn", index_factory=NavigatingNetIndex):
    """Flat baseline: the parent is an approximate nearest neighbour among
    all earlier trials (one global index, no levels)."""
    T, K = instance.T, instance.K
    rng = np.random.default_rng(seed)
    index = index_factory(instance)
    nodes = {}
    actions = np.zeros(T, dtype=int)
    losses = np.zeros(T)
    probs = np.zeros(T)
    parents = np.zeros(T, dtype=int)
    depths = np.zeros(T, dtype=int)
    evals = np.zeros(T, dtype=int)
    for t in range(1, T + 1):
        _begin(instance, t)
        if t == 1:
            nodes[1] = create_node(1, None, params, K)
        else:
            before = index.distance_evals
            p = index.query(t, nu)
            evals[t - 1] = index.distance_evals - before
            parents[t - 1] = p
            nodes[t] = create_node(t, nodes[p], params, K)
        index.insert(t)
        a, pa = select_action(nodes[t], params, rng)
        loss = model.sample(t, a, rng)
        update(nodes[t], a, loss, pa, params)
        actions[t - 1], probs[t - 1], losses[t - 1] = a, pa, loss
    cfg = {"nu": nu, "lam": params.lam, "eta": params.eta,
           "gamma": params.gamma, "theta": params.theta}
    return _finish(label, "nn", seed, instance, model, actions, losses, probs,
                   parents, depths, evals, cfg, reference)


def run_exp3(instance, model, params, seed, reference="best", label="exp3"):
    """Context-free control: one shared node selects and learns on every trial."""
    T, K = instance.T, instance.K
    rng = np.random.default_rng(seed)
    node = create_node(1, None, params, K)
    actions = np.zeros(T, dtype=int)
    losses = np.zeros(T)
    probs = np.zeros(T)
    for t in range(1, T + 1):
        _begin(instance, t)
        a, pa = select_action(node, params, rng)
        loss = model.sample(t, a, rng)
        update(node, a, loss, pa, params)
        actions[t - 1], probs[t - 1], losses[t - 1] = a, pa, loss
    cfg = {"lam": params.lam, "eta": params.eta,
           "gamma": params.gamma, "theta": params.theta}
    return _finish(label, "exp3", seed, instance, model, actions, losses, probs,
                   np.zeros(T, dtype=int), np.zeros(T, dtype=int),
                   np.zeros(T, dtype=int), cfg, reference)


class _NanState:
    """Binned nearest-neighbour state for one bin radius (restartable)."""

    def __init__(self, instance, rho, nu, params, index_factory):
        self.instance = instance
        self.rho = rho
        self.nu = nu
        self.params = params
        self.index = index_factory(instance)
        self.kept = []
        self.kept_arr = np.empty(instance.T, dtype=int)
        self.nodes = {}

    def step(self, t):
        """Returns (node, parent_for_record, scan_evals, query_evals)."""
        scan = 0
        if self.kept:
            arr = self.kept_arr[:len(self.kept)]
            d = self.instance.dist_many(t, arr)
            scan = len(self.kept)
            hits = np.nonzero(d < self.rho)[0]
            if hits.size:
                rep = self.kept[int(hits[0])]
                return self.nodes[rep], rep, scan, 0
            before = self.index.distance_evals
            p = self.index.query(t, self.nu)
            qev = self.index.distance_evals - before
            node = create_node(t, self.nodes[p], self.params, self.instance.K)
        else:
            p = 0
            qev = 0
            node = (create_node(1, None, self.params, self.instance.K)
                    if t == 1 else root_node(t, self.instance.K))
        self.index.insert(t)
        self.kept_arr[len(self.kept)] = t
        self.kept.append(t)
        self.nodes[t] = node
        return node, p, scan, qev


def run_nan(instance, model, nu, params, rho_grid, mode="per_rho", seed=0,
            reference="best", index_factory=NavigatingNetIndex):
    """Binned nearest-neighbour baseline.

    per_rho: one full run per bin radius in the grid, binned trials sharing
    their representative's bandit node.  doubling: phases of length 2^i; at
    each phase boundary the state restarts with the untried radius next in
    grid order, or, once all have been tried, with the radius whose most
    recent phase had the lowest mean sampled loss.

    Returns a list of records (one per radius, or a single doubling record).
    """
    if not rho_grid:
        raise ValueError("rho_grid must be non-empty")
    if any(b >= a for a, b in zip(rho_grid, rho_grid[1:])):
        raise ValueError("rho_grid must be strictly descending")
    T, K = instance.T, instance.K
    records = []
    if mode == "per_rho":
        for rho in rho_grid:
            rng = np.random.default_rng(seed)
            state = _NanState(instance, rho, nu, params, index_factory)
            actions = np.zeros(T, dtype=int)
            losses = np.zeros(T)
            probs = np.zeros(T)
            parents = np.zeros(T, dtype=int)
            evals = np.zeros(T, dtype=int)
            for t in range(1, T + 1):
                _begin(instance, t)
                node, p, scan, qev = state.step(t)
                parents[t - 1] = p
                evals[t - 1] = scan + qev
                a, pa = select_action(node, params, rng)
                loss = model.sample(t, a, rng)
                update(node, a, loss, pa, params)
                actions[t - 1], probs[t - 1], losses[t - 1] = a, pa, loss
            cfg = {"nu": nu, "rho": rho, "lam": params.lam, "eta": params.eta,
                   "gamma": params.gamma, "theta": params.theta}
            records.append(_finish(f"nan-rho{rho:g}", "nan", seed, instance,
                                   model, actions, losses, probs, parents,
                                   np.zeros(T, dtype=int), evals, cfg, reference))
        return records
    if mode != "doubling":
        raise ValueError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    actions = np.zeros(T, dtype=int)
    losses = np.zeros(T)
    probs = np.zeros(T)
    parents = np.zeros(T, dtype=int)
    evals = np.zeros(T, dtype=int)
    last_mean = {}           # rho -> mean loss of its most recent phase
    untried = list(rho_grid)
    phase_start, phase_len = 1, 1
    rho_used = []
    while phase_start <= T:
        rho = untried.pop(0) if untried else \
            min(rho_grid, key=lambda r: (last_mean.get(r, np.inf), rho_grid.index(r)))
        rho_used.append(rho)
        state = _NanState(instance, rho, nu, params, index_factory)
        phase_end = min(phase_start + phase_len - 1, T)
        phase_losses = []
        for t in range(phase_start, phase_end + 1):
            _begin(instance, t)
            node, p, scan, qev = state.step(t)
            parents[t - 1] = p
            evals[t - 1] = scan + qev
            a, pa = select_action(node, params, rng)
            loss = model.sample(t, a, rng)
            update(node, a, loss, pa, params)
            actions[t - 1], probs[t - 1], losses[t - 1] = a, pa, loss
            phase_losses.append(loss)
        last_mean[rho] = float(np.mean(phase_losses))
        phase_start += phase_len
        phase_len *= 2
    cfg = {"nu": nu, "rho_grid": list(rho_grid), "rho_used": rho_used,
           "lam": params.lam, "eta": params.eta, "gamma": params.gamma,
           "theta": params.theta}
    return [_finish("nan-doubling", "nan", seed, instance, model, actions,
                    losses, probs, parents, np.zeros(T, dtype=int), evals,
                    cfg, reference)]
