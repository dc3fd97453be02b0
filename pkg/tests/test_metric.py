"""Metric core: axiom validation, aspect ratio, binning, CSV formats."""
import itertools

import numpy as np
import pytest

from hnncb.errors import ParseError, ZeroDistancePair
from hnncb.metric import (MetricInstance, aspect_ratio, dedup_bin,
                          read_contexts_csv, read_matrix_csv, validate_metric,
                          write_contexts_csv, write_matrix_csv)


def line_instance(xs, K=2):
    return MetricInstance.from_contexts(np.array(xs)[:, None], K=K)


def brute_triangle_ok(D, tol=1e-9):
    T = D.shape[0]
    for r, s, t in itertools.product(range(T), repeat=3):
        if D[r, t] > D[r, s] + D[s, t] + tol:
            return False
    return True


def test_single_point_instance_is_valid():
    inst = line_instance([0.0])
    assert validate_metric(inst).ok


def test_collinear_points_pass_all_axioms():
    inst = line_instance([0.0, 0.3, 0.9])
    report = validate_metric(inst)
    assert report.ok
    # independent oracle: enumerate every triple
    assert brute_triangle_ok(inst.full_matrix())


def test_symmetry_violation_is_reported_with_witness():
    mat = np.array([
        [0.0, 0.9, 0.2],
        [0.5, 0.0, 0.1],
        [0.2, 0.1, 0.0],
    ])
    report = validate_metric(MetricInstance.from_matrix(mat, K=2))
    kinds = {v.kind for v in report.violations}
    assert "symmetry" in kinds
    sym = [v for v in report.violations if v.kind == "symmetry"]
    assert sym[0].trials == (1, 2)


def test_triangle_violation_reported():
    mat = np.array([
        [0.0, 0.9, 0.2],
        [0.9, 0.0, 0.1],
        [0.2, 0.1, 0.0],
    ])
    report = validate_metric(MetricInstance.from_matrix(mat, K=2))
    assert any(v.kind == "triangle" for v in report.violations)


def test_self_distance_violation():
    mat = np.array([[0.0, 0.5], [0.5, 0.3]])
    report = validate_metric(MetricInstance.from_matrix(mat, K=2))
    assert any(v.kind == "self_distance" and v.trials == (2,)
               for v in report.violations)


def test_aspect_ratio_line():
    # oracle: enumerate the 3 pairs by hand -> min is 0.3
    assert aspect_ratio(line_instance([0.0, 0.3, 0.9])) == pytest.approx(0.3)


def test_aspect_ratio_two_points():
    assert aspect_ratio(line_instance([0.0, 1.0])) == pytest.approx(1.0)


def test_aspect_ratio_duplicate_point_raises():
    with pytest.raises(ZeroDistancePair):
        aspect_ratio(line_instance([0.0, 0.3, 0.3]))


def test_aspect_ratio_matches_double_loop():
    rng = np.random.default_rng(3)
    pts = rng.random((40, 2))
    inst = MetricInstance.from_contexts(pts, K=2)
    D = inst.full_matrix()
    brute = min(D[i, j] for i in range(40) for j in range(i + 1, 40))
    assert aspect_ratio(inst) == pytest.approx(brute)


def test_dedup_bin_sequential_scan():
    inst = line_instance([0.0, 0.05, 0.5])
    kept, rep = dedup_bin(inst, epsilon=0.1)
    assert kept == [1, 3]
    assert rep == {1: 1, 2: 1, 3: 3}


def test_dedup_bin_below_aspect_ratio_is_identity():
    inst = line_instance([0.0, 0.3, 0.9])
    kept, rep = dedup_bin(inst, epsilon=0.2)
    assert kept == [1, 2, 3]
    assert all(rep[t] == t for t in kept)


def test_dedup_bin_huge_epsilon_keeps_first_only():
    inst = line_instance([0.0, 0.3, 0.9])
    kept, rep = dedup_bin(inst, epsilon=1.1)
    assert kept == [1]
    assert rep == {1: 1, 2: 1, 3: 1}


def test_dedup_bin_postconditions_random():
    rng = np.random.default_rng(11)
    inst = MetricInstance.from_contexts(rng.random((60, 2)), K=2)
    for eps in (0.05, 0.15, 0.4):
        kept, rep = dedup_bin(inst, eps)
        for a, b in itertools.combinations(kept, 2):
            assert inst.dist(a, b) >= eps
        for t in range(1, 61):
            if rep[t] != t:
                assert inst.dist(t, rep[t]) < eps
                assert rep[t] in kept and rep[t] < t


def test_rescale_on_ingestion():
    inst = line_instance([0.0, 3.0, 5.0])
    assert inst.diameter() <= 1.0
    assert inst.dist(1, 3) == pytest.approx(1.0, abs=1e-9)
    assert inst.dist(1, 2) == pytest.approx(0.6, abs=1e-9)


def test_context_distance_matches_euclidean():
    pts = np.array([[0.0, 0.0], [0.3, 0.4]])
    inst = MetricInstance.from_contexts(pts, K=2)
    assert inst.dist(1, 2) == pytest.approx(0.5)


def test_contexts_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    pts = rng.random((7, 3))
    path = tmp_path / "ctx.csv"
    write_contexts_csv(path, pts)
    back = read_contexts_csv(path)
    assert np.array_equal(back, pts)


def test_matrix_csv_roundtrip(tmp_path):
    inst = line_instance([0.0, 0.3, 0.9])
    D = inst.full_matrix()
    path = tmp_path / "mat.csv"
    write_matrix_csv(path, D)
    back = read_matrix_csv(path)
    assert np.allclose(back, D)


def test_contexts_csv_bad_row_count(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("trial,x1,x2\n1,0.0,0.0\n2,0.5\n")
    with pytest.raises(ParseError) as ei:
        read_contexts_csv(path)
    assert ei.value.line == 3
