"""Parent-fed bandit subroutine: per-trial exponential weights with
fixed-share mixing across routing-tree edges.

Every trial owns a weight vector seeded from its parent's (mixed towards
uniform with rate ``theta``), plays through an exploration-smoothed
distribution and applies an importance-weighted multiplicative update to the
played action only.  The comparator cost of this scheme grows with the
number of tree edges on which the comparator policy switches actions, which
is the quantity the surrounding analysis controls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MissingParent, ProbabilityMismatch


@dataclass(frozen=True)
class SubroutineParams:
    """Knobs of the subroutine.

    ``lam`` is the caller-facing budget knob; ``eta`` (learning rate),
    ``gamma`` (exploration) and ``theta`` (edge switch prior) drive the
    reference implementation.
    """
    lam: float = 1.0
    eta: float = 0.05
    gamma: float = 0.05
    theta: float = 0.01

    def __post_init__(self):
        if self.lam <= 0 or self.eta <= 0:
            raise ValueError("lam and eta must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not 0 < self.theta <= 0.5:
            raise ValueError("theta must be in (0, 1/2]")

    @classmethod
    def for_horizon(cls, T, K, lam=1.0, eta=None, gamma=None, theta=None):
        """Defaults from the horizon: eta = sqrt(ln K / (K T)),
        gamma = min(1, sqrt(K ln K / T)), theta = min(1/2, lam^2 / T).

        K = 1 makes the eta/gamma formulas vanish; the action is forced, so
        both fall back to 1.
        """
        if K >= 2:
            eta_d = math.sqrt(math.log(K) / (K * T))
            gamma_d = min(1.0, math.sqrt(K * math.log(K) / T))
        else:
            eta_d = 1.0
            gamma_d = 1.0
        theta_d = min(0.5, lam * lam / T)
        return cls(lam=lam,
                   eta=eta if eta is not None else eta_d,
                   gamma=gamma if gamma is not None else gamma_d,
                   theta=theta if theta is not None else theta_d)


@dataclass
class BanditNode:
    """Action-weight state of one trial (or of a merged group of trials)."""
    trial: int
    weights: np.ndarray
    basis: np.ndarray  # parent weights at creation time


def root_node(trial, k):
    """Uniform node with no parent: trial 1, or the first keeper after a
    baseline restart."""
    w = np.full(k, 1.0 / k)
    return BanditNode(trial=trial, weights=w, basis=w.copy())


def create_node(t, parent, params, k):
    """Node for trial t: uniform at t = 1, else the parent's weights mixed
    with uniform at rate theta."""
    if t == 1:
        return root_node(1, k)
    if parent is None:
        raise MissingParent(f"trial {t} needs a parent node")
    w = (1.0 - params.theta) * parent.weights + params.theta / k
    return BanditNode(trial=t, weights=w, basis=parent.weights.copy())


def select_action(node, params, rng):
    """Sample from (1 - gamma) * weights + gamma / K.

    Returns the 1-based action and its played probability (>= gamma / K).
    """
    k = node.weights.shape[0]
    p = (1.0 - params.gamma) * node.weights + params.gamma / k
    cum = np.cumsum(p)
    a = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    if a >= k:
        a = k - 1
    return a + 1, float(p[a])


def update(node, action, loss, p_a, params):
    """Importance-weighted exponential update on the played action only."""
    if p_a <= 0.0:
        raise ProbabilityMismatch(f"played probability {p_a} is not positive")
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss {loss} outside [0, 1]")
    lhat = loss / p_a
    node.weights[action - 1] *= math.exp(-params.eta * lhat)
    node.weights /= node.weights.sum()
    return node


def switch_count(parent, policy):
    """Number of routing-tree edges on which ``policy`` changes action.

    ``parent`` is indexable by trial id (parent[1] = 0); ``policy`` is a
    length-T array of actions, row t-1 for trial t.
    """
    T = len(policy)
    total = 0
    for t in range(2, T + 1):
        if policy[t - 1] != policy[int(parent[t]) - 1]:
            total += 1
    return total
