"""Instance generators, loss models and CSV ingestion.

Generators are pure functions of (config, seed): the two-balls construction
(two disjoint balls of very different radii, each split by a hyperplane
through its centre) and the boundary-cover construction (contexts in the
ball of radius 1/2 whose comparator labels come from an extended policy with
an explicitly covered decision boundary).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (CoverViolation, DegeneratePolicy, OverlappingBalls,
                     ParseError)
from .metric import (MetricInstance, read_contexts_csv, read_matrix_csv,
                     validate_metric)


@dataclass
class LossModel:
    """Per-(trial, action) loss distributions with exact means exposed.

    ``kind`` is "bernoulli" (losses in {0,1} with the given means) or
    "deterministic" (the mean itself is returned).
    """
    means: np.ndarray          # (T, K), row t-1 for trial t
    kind: str = "bernoulli"

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        if self.means.min() < 0.0 or self.means.max() > 1.0:
            raise ValueError("loss means must lie in [0, 1]")
        if self.kind not in ("bernoulli", "deterministic"):
            raise ValueError(f"unknown loss kind {self.kind!r}")

    @property
    def T(self):
        return self.means.shape[0]

    @property
    def K(self):
        return self.means.shape[1]

    def mean(self, t, a):
        return float(self.means[t - 1, a - 1])

    def sample(self, t, a, rng):
        m = self.means[t - 1, a - 1]
        if self.kind == "deterministic":
            return float(m)
        return 1.0 if rng.random() < m else 0.0


def gap_means(y, K, gap):
    """Mean table with mean gap/2 below 1/2 on the comparator action and
    gap/2 above it elsewhere."""
    T = len(y)
    means = np.full((T, K), 0.5 + gap / 2.0)
    means[np.arange(T), np.asarray(y, dtype=int) - 1] = 0.5 - gap / 2.0
    return means


def _sample_ball(rng, n, dim, center, radius):
    dirs = rng.normal(size=(n, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.random(n) ** (1.0 / dim)
    return center + dirs * radii[:, None]


# -- two balls --------------------------------------------------------------

@dataclass
class TwoBallsConfig:
    """Two disjoint balls of radii 1 and r, each holding trials_per_ball
    uniform contexts, labels split by a hyperplane through each centre."""
    dim: int = 2
    r: float = 1.0
    trials_per_ball: int = 256
    gap: float = 0.5
    seed: int = 0
    centers: tuple = None       # ((d,), (d,)) arrays; default well-separated
    order: str = "shuffled"     # or "sequential"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if not 0 < self.r <= 1:
            raise ValueError("r must be in (0, 1]")
        if not 0 < self.gap <= 1:
            raise ValueError("gap must be in (0, 1]")
        if self.order not in ("shuffled", "sequential"):
            raise ValueError("order must be 'shuffled' or 'sequential'")

    def resolved_centers(self):
        if self.centers is not None:
            c1, c2 = (np.asarray(c, dtype=float) for c in self.centers)
        else:
            c1 = np.zeros(self.dim)
            c2 = np.zeros(self.dim)
            c2[0] = 2.0 + self.r + 0.1
        if np.linalg.norm(c1 - c2) <= 1.0 + self.r:
            raise OverlappingBalls(
                f"centres {np.linalg.norm(c1 - c2):.4f} apart for radii 1 and {self.r}")
        return c1, c2


def gen_two_balls(cfg):
    """Generate the two-balls instance.

    Returns (instance, y, model): contexts from both balls interleaved
    uniformly at random (or sequentially), comparator labels by the side of
    the hyperplane through the owning ball's centre (normal along the second
    axis, ties to action 1), Bernoulli losses with means 1/2 -+ gap/2.
    """
    rng = np.random.default_rng(cfg.seed)
    c1, c2 = cfg.resolved_centers()
    n = cfg.trials_per_ball
    pts1 = _sample_ball(rng, n, cfg.dim, c1, 1.0)
    pts2 = _sample_ball(rng, n, cfg.dim, c2, cfg.r)
    pts = np.vstack([pts1, pts2])
    side = np.where(np.arange(2 * n) < n, 0, 1)
    if cfg.order == "shuffled":
        perm = rng.permutation(2 * n)
        pts = pts[perm]
        side = side[perm]
    centers = np.where(side[:, None] == 0, c1, c2)
    y = np.where((pts - centers)[:, 1] >= 0.0, 1, 2)
    instance = MetricInstance.from_contexts(pts, K=2)
    model = LossModel(gap_means(y, 2, cfg.gap), kind="bernoulli")
    return instance, y, model


# -- boundary cover ----------------------------------------------------------

class HalfspacePolicy:
    """Extended policy with a hyperplane decision boundary x . n = offset."""

    def __init__(self, normal, offset=0.0):
        self.normal = np.asarray(normal, dtype=float)
        self.offset = float(offset)

    def __call__(self, x):
        return 1 if float(np.dot(x, self.normal)) >= self.offset else 2

    def batch(self, X):
        return np.where(X @ self.normal >= self.offset, 1, 2)


class DiskPolicy:
    """Extended policy whose decision boundary is a sphere around a centre."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def __call__(self, x):
        return 1 if float(np.linalg.norm(x - self.center)) <= self.radius else 2

    def batch(self, X):
        return np.where(np.linalg.norm(X - self.center, axis=1) <= self.radius, 1, 2)


def boundary_crossing(policy, xa, xb, tol=1e-12):
    """Bisect the segment xa -> xb for a point of the decision boundary.

    The endpoints must carry different labels.  Returns a point within
    ``tol`` (along the segment) of a label change.
    """
    la = policy(xa)
    if policy(xb) == la:
        raise ValueError("segment endpoints have equal labels")
    lo, hi = 0.0, 1.0
    seg = np.linalg.norm(xb - xa)
    if seg == 0.0:
        return np.array(xa, dtype=float)
    while (hi - lo) * seg > tol:
        mid = 0.5 * (lo + hi)
        if policy(xa + mid * (xb - xa)) == la:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return xa + mid * (xb - xa)


@dataclass
class BoundaryCoverConfig:
    """Contexts in ball(0, 1/2) labelled by an extended policy whose decision
    boundary is covered by the listed balls; the margin is their xi-inflation."""
    policy: object                      # callable with .batch
    balls: list                         # [(center (d,), radius), ...]
    xi: float = 1.5
    C: float = 1.0
    T: int = 256
    dim: int = 2
    seed: int = 0
    gap: float = 0.5

    def __post_init__(self):
        if self.xi <= 1.0:
            raise ValueError("xi must be > 1")
        if self.C <= 0:
            raise ValueError("C must be positive")
        self.balls = [(np.asarray(v, dtype=float), float(r)) for v, r in self.balls]
        min_r = min(r for _, r in self.balls)
        if min_r < self.T ** (-self.C):
            raise ValueError(
                f"min cover radius {min_r} below T^-C = {self.T ** (-self.C):.3e}")


def margin_mask(cfg, X):
    """Boolean mask of contexts inside some xi-inflated cover ball."""
    mask = np.zeros(X.shape[0], dtype=bool)
    for v, r in cfg.balls:
        mask |= np.linalg.norm(X - v, axis=1) <= cfg.xi * r
    return mask


def gen_boundary_cover(cfg, validate=True):
    """Generate a boundary-cover instance.

    Returns (instance, y, margin, model) with margin a boolean mask over
    trials.  With ``validate`` the xi = 1 cover condition is checked for
    every trial through the segment-crossing construction; a crossing
    outside every ball raises :class:`CoverViolation`.
    """
    rng = np.random.default_rng(cfg.seed)
    X = _sample_ball(rng, cfg.T, cfg.dim, np.zeros(cfg.dim), 0.5)
    y = cfg.policy.batch(X)
    margin = margin_mask(cfg, X)
    off = ~margin
    if len(set(y[off].tolist())) < 2:
        raise DegeneratePolicy("need two off-margin trials with differing labels")
    if validate:
        for t in range(cfg.T):
            q = nearest_disagreeing(X, y, off, t)
            b = boundary_crossing(cfg.policy, X[t], X[q])
            if not any(np.linalg.norm(b - v) <= r + 1e-9 for v, r in cfg.balls):
                raise CoverViolation(
                    f"crossing of segment {t + 1} -> {q + 1} lies outside the cover")
    instance = MetricInstance.from_contexts(X, K=2)
    model = LossModel(gap_means(y, 2, cfg.gap), kind="bernoulli")
    return instance, y, margin, model


def nearest_disagreeing(X, y, off_mask, t):
    """0-based index of the nearest off-margin context with a different label."""
    cand = np.nonzero(off_mask & (y != y[t]))[0]
    if cand.size == 0:
        raise DegeneratePolicy(f"trial {t + 1} has no off-margin disagreeing trial")
    d = np.linalg.norm(X[cand] - X[t], axis=1)
    return int(cand[int(np.argmin(d))])


# -- CSV ingestion -----------------------------------------------------------

def read_loss_csv(path):
    """Read a loss table: header ``trial,loss_a1,...,loss_aK``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:1] != ["trial"] or len(header) < 2 or \
                not all(c.startswith("loss_a") for c in header[1:]):
            raise ParseError("expected header trial,loss_a1,...,loss_aK", line=1)
        K = len(header) - 1
        rows = []
        for lineno, raw in enumerate(fh, start=2):
            raw = raw.strip()
            if not raw:
                continue
            parts = raw.split(",")
            if len(parts) != K + 1:
                raise ParseError(f"expected {K + 1} fields", line=lineno)
            try:
                trial = int(parts[0])
                vals = [float(p) for p in parts[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if trial != len(rows) + 1:
                raise ParseError("trial ids must run 1..T in order", line=lineno)
            rows.append(vals)
    return np.array(rows, dtype=float)


def write_loss_csv(path, means):
    means = np.asarray(means, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trial," + ",".join(f"loss_a{a + 1}" for a in range(means.shape[1])) + "\n")
        for t, row in enumerate(means, start=1):
            fh.write(str(t) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_policy_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "trial,action":
            raise ParseError("expected header trial,action", line=1)
        acts = []
        for lineno, raw in enumerate(fh, start=2):
            raw = raw.strip()
            if not raw:
                continue
            try:
                trial, action = (int(p) for p in raw.split(","))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if trial != len(acts) + 1:
                raise ParseError("trial ids must run 1..T in order", line=lineno)
            acts.append(action)
    return np.array(acts, dtype=int)


def write_policy_csv(path, y):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trial,action\n")
        for t, a in enumerate(np.asarray(y, dtype=int), start=1):
            fh.write(f"{t},{a}\n")


def ingest_csv(path, loss_path, loss_kind="table", policy_path=None):
    """Load an instance from CSV.

    ``path`` is either a contexts file (header ``trial,x1,...``) or a matrix
    file; matrix-backed instances are axiom-checked, and violations surface
    as :class:`ParseError`.  ``loss_kind`` "table" yields deterministic
    losses equal to the table entries; "bernoulli" treats them as means.
    Returns (instance, policy or None, model).
    """
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline()
    means = read_loss_csv(loss_path)
    K = means.shape[1]
    if head.startswith("trial,"):
        contexts = read_contexts_csv(path)
        instance = MetricInstance.from_contexts(contexts, K=K)
    else:
        matrix = read_matrix_csv(path)
        instance = MetricInstance.from_matrix(matrix, K=K)
        report = validate_metric(instance)
        if not report.ok:
            raise ParseError(f"metric axioms violated: {report.summary()}")
    if means.shape[0] != instance.T:
        raise ParseError(
            f"loss table has {means.shape[0]} trials, instance has {instance.T}")
    kind = "deterministic" if loss_kind == "table" else "bernoulli"
    model = LossModel(means, kind=kind)
    policy = read_policy_csv(policy_path) if policy_path else None
    if policy is not None and len(policy) != instance.T:
        raise ParseError("policy length does not match instance")
    return instance, policy, model
