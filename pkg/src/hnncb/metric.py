"""Metric instances over trials: axiom checks, aspect ratio, binning, CSV formats.

Trials are identified by 1-based ids 1..T throughout the public API.  Arrays
returned by helper functions are positional: row ``i`` belongs to trial
``i + 1``.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ZeroDistancePair

AXIOM_TOL = 1e-9

_CHUNK = 256
_ROW_CACHE_SIZE = 8


class MetricInstance:
    """Pairwise-distance oracle over trials 1..T, with K actions attached.

    Backed either by explicit Euclidean contexts (distances computed on
    demand) or by a dense matrix.  Instances whose diameter exceeds 1 are
    rescaled by their diameter on ingestion, so all distances lie in [0, 1].

    Immutable after construction; safe to share across concurrent runs.
    """

    def __init__(self, T, K, contexts=None, matrix=None, scale=1.0):
        self.T = int(T)
        self.K = int(K)
        self.contexts = contexts
        self.scale = float(scale)
        self._matrix = matrix
        self._rows = OrderedDict()
        if self.T < 1:
            raise ValueError("need at least one trial")
        if self.K < 1:
            raise ValueError("need at least one action")

    @classmethod
    def from_contexts(cls, points, K):
        """Build a Euclidean instance from a (T, d) array of contexts.

        If the point set has diameter above 1 the points are divided by the
        diameter (plus a one-ulp guard so no pair lands above 1.0).
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("contexts must be a (T, d) array")
        scale = 1.0
        if pts.shape[0] > 1:
            diam = _max_pairwise(pts)
            if diam > 1.0:
                scale = diam * (1.0 + 1e-12)
                pts = pts / scale
        return cls(pts.shape[0], K, contexts=pts, scale=scale)

    @classmethod
    def from_matrix(cls, matrix, K):
        """Build an instance from a dense (T, T) distance matrix.

        The matrix is stored as given (so that :func:`validate_metric` can
        inspect raw axiom violations) apart from the diameter rescale.
        """
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("matrix must be square")
        scale = 1.0
        top = float(mat.max(initial=0.0))
        if top > 1.0:
            scale = top * (1.0 + 1e-12)
            mat = mat / scale
        return cls(mat.shape[0], K, matrix=mat, scale=scale)

    # -- oracle -----------------------------------------------------------

    def dist(self, s, t):
        """Distance between trials s and t (1-based ids)."""
        return float(self._row(s)[t - 1])

    def dist_many(self, t, ids):
        """Distances from trial t to each trial in ``ids`` (1-based)."""
        idx = np.asarray(ids, dtype=int)
        return self._row(t)[idx - 1]

    def _row(self, t):
        row = self._rows.get(t)
        if row is None:
            if self._matrix is not None:
                row = self._matrix[t - 1]
            else:
                row = np.linalg.norm(self.contexts - self.contexts[t - 1], axis=1)
            self._rows[t] = row
            if len(self._rows) > _ROW_CACHE_SIZE:
                self._rows.popitem(last=False)
        return row

    def full_matrix(self):
        """Materialised (T, T) distance matrix.  Meant for audit-scale T."""
        if self._matrix is not None:
            return self._matrix
        if self.T > 4096:
            raise ValueError("full matrix only supported up to T = 4096")
        diff = self.contexts[:, None, :] - self.contexts[None, :, :]
        return np.linalg.norm(diff, axis=2)

    def diameter(self):
        if self._matrix is not None:
            return float(self._matrix.max(initial=0.0))
        if self.T == 1:
            return 0.0
        return _max_pairwise(self.contexts)


def _max_pairwise(pts):
    """Maximum pairwise Euclidean distance, chunked to bound memory."""
    top = 0.0
    n = pts.shape[0]
    for lo in range(0, n, _CHUNK):
        block = pts[lo:lo + _CHUNK]
        d = np.linalg.norm(block[:, None, :] - pts[None, :, :], axis=2)
        top = max(top, float(d.max()))
    return top


# -- axiom validation -----------------------------------------------------

@dataclass(frozen=True)
class MetricViolation:
    kind: str            # symmetry | self_distance | negativity | range | triangle
    trials: tuple        # witnessing trial ids
    value: float         # size of the violation


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def summary(self):
        if self.ok:
            return "metric ok"
        lines = [f"{len(self.violations)} violation(s):"]
        for v in self.violations[:20]:
            lines.append(f"  {v.kind} at {v.trials}: {v.value:.3e}")
        return "\n".join(lines)


def validate_metric(instance, tol=AXIOM_TOL):
    """Check the four metric axioms on the full matrix.

    Returns a report that is empty exactly when symmetry, zero self-distance,
    non-negativity (with values in [0, 1]) and the triangle inequality all
    hold within ``tol``.  O(T^3); intended as a test-time utility.
    """
    report = ValidationReport()
    D = instance.full_matrix()
    T = instance.T

    asym = np.abs(D - D.T)
    for i, j in zip(*np.nonzero(np.triu(asym > tol, k=1))):
        report.violations.append(
            MetricViolation("symmetry", (i + 1, j + 1), float(asym[i, j])))

    diag = np.abs(np.diag(D))
    for i in np.nonzero(diag > tol)[0]:
        report.violations.append(
            MetricViolation("self_distance", (i + 1,), float(diag[i])))

    for i, j in zip(*np.nonzero(D < -tol)):
        report.violations.append(
            MetricViolation("negativity", (i + 1, j + 1), float(D[i, j])))
    for i, j in zip(*np.nonzero(D > 1.0 + tol)):
        report.violations.append(
            MetricViolation("range", (i + 1, j + 1), float(D[i, j])))

    # d(r,t) <= d(r,s) + d(s,t), enumerated one intermediate s at a time.
    for s in range(T):
        slack = D - (D[:, s][:, None] + D[s, :][None, :])
        bad = np.nonzero(slack > tol)
        for r, t in zip(*bad):
            report.violations.append(
                MetricViolation("triangle", (r + 1, s + 1, t + 1),
                                float(slack[r, t])))
        if len(report.violations) > 1000:
            break
    return report


# -- aspect ratio and binning ---------------------------------------------

def aspect_ratio(instance):
    """Minimum pairwise distance over distinct trials (the dataset spread).

    Raises :class:`ZeroDistancePair` if two distinct trials coincide, which
    signals that dedup preprocessing was skipped.
    """
    if instance.T == 1:
        return 1.0
    best = np.inf
    witness = None
    for t in range(2, instance.T + 1):
        row = instance.dist_many(t, np.arange(1, t))
        k = int(np.argmin(row))
        if row[k] < best:
            best = float(row[k])
            witness = (k + 1, t)
    if best <= 0.0:
        raise ZeroDistancePair(f"trials {witness[0]} and {witness[1]} coincide")
    return best


def dedup_bin(instance, epsilon):
    """Sequential binning: drop trials within ``epsilon`` of an earlier keeper.

    Returns ``(kept, rep)`` where ``kept`` lists surviving trial ids in order
    and ``rep`` maps every trial to the earliest kept trial at distance
    < epsilon (itself if none).  Kept trials are pairwise >= epsilon apart.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    kept = []
    rep = {}
    kept_arr = None
    for t in range(1, instance.T + 1):
        if kept:
            d = instance.dist_many(t, kept_arr[:len(kept)])
            hits = np.nonzero(d < epsilon)[0]
            if hits.size:
                rep[t] = kept[int(hits[0])]
                continue
        else:
            kept_arr = np.empty(instance.T, dtype=int)
        kept_arr[len(kept)] = t
        kept.append(t)
        rep[t] = t
    return kept, rep


# -- CSV formats ------------------------------------------------------------

def read_contexts_csv(path):
    """Read a contexts file: header ``trial,x1,...,xd``, one row per trial."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if not cols or cols[0] != "trial" or len(cols) < 2:
            raise ParseError("expected header trial,x1,...,xd", line=1)
        d = len(cols) - 1
        rows = []
        for lineno, raw in enumerate(fh, start=2):
            raw = raw.strip()
            if not raw:
                continue
            parts = raw.split(",")
            if len(parts) != d + 1:
                raise ParseError(f"expected {d + 1} fields, got {len(parts)}",
                                 line=lineno)
            try:
                trial = int(parts[0])
                vals = [float(p) for p in parts[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if trial != len(rows) + 1:
                raise ParseError(f"trial ids must run 1..T in order, got {trial}",
                                 line=lineno)
            rows.append(vals)
    if not rows:
        raise ParseError("no context rows", line=2)
    return np.array(rows, dtype=float)


def read_matrix_csv(path):
    """Read a matrix file: line t holds either t (lower triangle) or T reals."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    T = len(lines)
    if T == 0:
        raise ParseError("empty matrix file", line=1)
    mat = np.zeros((T, T), dtype=float)
    full = len(lines[0].split(",")) == T and T > 1
    for t, raw in enumerate(lines, start=1):
        parts = raw.split(",")
        want = T if full else t
        if len(parts) != want:
            raise ParseError(f"expected {want} fields on matrix line, got {len(parts)}",
                             line=t)
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=t) from None
        if full:
            mat[t - 1, :] = vals
        else:
            mat[t - 1, :t] = vals
            mat[:t, t - 1] = vals
    return mat


def write_contexts_csv(path, contexts):
    contexts = np.asarray(contexts, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("trial," + ",".join(f"x{i + 1}" for i in range(contexts.shape[1])) + "\n")
        for t, row in enumerate(contexts, start=1):
            fh.write(str(t) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def write_matrix_csv(path, matrix):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for t in range(1, matrix.shape[0] + 1):
            fh.write(",".join(repr(float(v)) for v in matrix[t - 1, :t]) + "\n")
