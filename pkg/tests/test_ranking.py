import itertools
import math

import numpy as np
import pytest

from influencekit.errors import (
    DegenerateInput,
    IdMismatch,
    LengthMismatch,
    ZeroBaseScore,
)
from influencekit.metric import InfluenceMatrix
from influencekit.ranking import (
    ObservedMatrix,
    kendall_tau,
    relative_improvement,
    two_way_eval,
)


def brute_force_tau(x, y):
    """Direct concordant/discordant pair count with tau-b tie correction."""
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i, j in itertools.combinations(range(n), 2):
        dx = int(x[i] > x[j]) - int(x[i] < x[j])
        dy = int(y[i] > y[j]) - int(y[i] < y[j])
        if dx == 0:
            ties_x += 1
        if dy == 0:
            ties_y += 1
        if dx * dy > 0:
            concordant += 1
        elif dx * dy < 0:
            discordant += 1
    n0 = n * (n - 1) // 2
    return (concordant - discordant) / math.sqrt((n0 - ties_x) * (n0 - ties_y))


def test_relative_improvement_examples():
    assert relative_improvement(50.0, 60.0) == pytest.approx(0.2)
    assert relative_improvement(1.0, 1.1788) == pytest.approx(0.1788)
    assert relative_improvement(3.0, 3.0) == 0.0


def test_relative_improvement_zero_base():
    with pytest.raises(ZeroBaseScore):
        relative_improvement(0.0, 1.0)


def test_kendall_tau_examples():
    assert kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(2 / 3, abs=1e-12)


def test_kendall_tau_matches_brute_force(rng):
    for _ in range(50):
        n = int(rng.integers(2, 9))
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        assert kendall_tau(x, y) == pytest.approx(brute_force_tau(x, y), abs=1e-12)


def test_kendall_tau_with_ties_matches_brute_force(rng):
    for _ in range(50):
        n = int(rng.integers(3, 9))
        x = rng.integers(0, 3, n).astype(float)
        y = rng.integers(0, 3, n).astype(float)
        if np.all(x == x[0]) or np.all(y == y[0]):
            continue
        assert kendall_tau(x, y) == pytest.approx(brute_force_tau(x, y), abs=1e-12)


def test_kendall_tau_invariant_under_monotone_transform(rng):
    x = rng.standard_normal(12)
    y = rng.standard_normal(12)
    base = kendall_tau(x, y)
    assert kendall_tau(np.exp(x), y) == pytest.approx(base, abs=1e-12)
    assert kendall_tau(x, 3.0 * y + 7.0) == pytest.approx(base, abs=1e-12)
    assert kendall_tau(x ** 3, np.tanh(y)) == pytest.approx(base, abs=1e-12)


def test_kendall_tau_errors():
    with pytest.raises(LengthMismatch):
        kendall_tau([1, 2], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        kendall_tau([1], [2])
    with pytest.raises(DegenerateInput):
        kendall_tau([5, 5, 5], [1, 2, 3])
    with pytest.raises(DegenerateInput):
        kendall_tau([1, 2, 3], [2, 2, 2])


def _matrices(pred_rows, obs_rows, ids=("a", "b", "c")):
    predicted = InfluenceMatrix(tuple(ids), tuple(ids), np.asarray(pred_rows, float))
    observed = ObservedMatrix(tuple(ids), tuple(ids), np.asarray(obs_rows, float))
    return predicted, observed


def test_two_way_eval_identical_matrices(rng):
    scores = rng.standard_normal((4, 4))
    ids = ("a", "b", "c", "d")
    predicted = InfluenceMatrix(ids, ids, scores)
    observed = ObservedMatrix(ids, ids, scores.copy())
    report = two_way_eval(predicted, observed)
    assert all(v == 1.0 for v in report.per_target.values())
    assert all(v == 1.0 for v in report.per_source.values())
    assert report.final == 1.0


def test_two_way_eval_reversed_matrices(rng):
    scores = rng.standard_normal((4, 4))
    ids = ("a", "b", "c", "d")
    predicted = InfluenceMatrix(ids, ids, scores)
    observed = ObservedMatrix(ids, ids, -scores)
    report = two_way_eval(predicted, observed)
    assert report.final == -1.0


def test_two_way_eval_three_by_three_fixture():
    # hand-counted pair signs: per-target taus 1/3, 1/3, -1 and
    # per-source taus 1, -1/3, -1/3, so the two means cancel.
    predicted, observed = _matrices(
        [[3, 1, 2], [1, 2, 3], [2, 3, 1]],
        [[3, 1, 2], [2, 3, 1], [1, 2, 3]],
    )
    report = two_way_eval(predicted, observed, exclude_diagonal=False)
    assert report.per_target["a"] == pytest.approx(1 / 3, abs=1e-12)
    assert report.per_target["b"] == pytest.approx(1 / 3, abs=1e-12)
    assert report.per_target["c"] == pytest.approx(-1.0, abs=1e-12)
    assert report.per_source["a"] == pytest.approx(1.0, abs=1e-12)
    assert report.per_source["b"] == pytest.approx(-1 / 3, abs=1e-12)
    assert report.per_source["c"] == pytest.approx(-1 / 3, abs=1e-12)
    assert report.mean_target == pytest.approx(-1 / 9, abs=1e-12)
    assert report.mean_source == pytest.approx(1 / 9, abs=1e-12)
    assert report.final == pytest.approx(0.0, abs=1e-12)
    assert report.final == (report.mean_target + report.mean_source) / 2


def test_two_way_eval_transpose_swaps_means(rng):
    scores = rng.standard_normal((5, 5))
    deltas = rng.standard_normal((5, 5))
    ids = tuple("abcde")
    report = two_way_eval(InfluenceMatrix(ids, ids, scores), ObservedMatrix(ids, ids, deltas))
    flipped = two_way_eval(
        InfluenceMatrix(ids, ids, scores.T), ObservedMatrix(ids, ids, deltas.T)
    )
    assert flipped.mean_target == pytest.approx(report.mean_source, abs=1e-12)
    assert flipped.mean_source == pytest.approx(report.mean_target, abs=1e-12)
    assert flipped.final == pytest.approx(report.final, abs=1e-12)


def test_two_way_eval_alignment_by_id(rng):
    scores = rng.standard_normal((3, 3))
    predicted = InfluenceMatrix(("a", "b", "c"), ("a", "b", "c"), scores)
    perm_src, perm_tgt = [2, 0, 1], [1, 2, 0]
    observed = ObservedMatrix(
        tuple(np.array(["a", "b", "c"])[perm_src]),
        tuple(np.array(["a", "b", "c"])[perm_tgt]),
        scores[np.ix_(perm_src, perm_tgt)],
    )
    report = two_way_eval(predicted, observed)
    assert report.final == 1.0


def test_two_way_eval_diagonal_excluded_by_default():
    # diagonal disagrees wildly; exclusion hides it, inclusion does not
    pred = [[9, 1, 2], [1, -9, 3], [2, 3, -9]]
    obs = [[-9, 1, 2], [1, 9, 3], [2, 3, 9]]
    predicted, observed = _matrices(pred, obs)
    assert two_way_eval(predicted, observed, exclude_diagonal=True).final == 1.0
    assert two_way_eval(predicted, observed, exclude_diagonal=False).final < 1.0


def test_two_way_eval_id_mismatch(rng):
    scores = rng.standard_normal((2, 2))
    predicted = InfluenceMatrix(("a", "b"), ("a", "b"), scores)
    observed = ObservedMatrix(("a", "z"), ("a", "b"), scores)
    with pytest.raises(IdMismatch, match="z"):
        two_way_eval(predicted, observed)


def test_two_way_eval_degenerate_column_excluded(rng):
    scores = rng.standard_normal((3, 3))
    scores[:, 1] = 4.2  # constant predicted column for target "b"
    deltas = rng.standard_normal((3, 3))
    predicted, observed = _matrices(scores, deltas)
    report = two_way_eval(predicted, observed, exclude_diagonal=False)
    assert report.degenerate_targets == ["b"]
    assert "b" not in report.per_target
    assert report.warning_count == 1
    assert report.final == (report.mean_target + report.mean_source) / 2


def test_observed_matrix_csv_round_trip_bit_exact(tmp_path, rng):
    ids = ("ocr", "chart", "spatial")
    deltas = rng.standard_normal((3, 3)) * 0.31
    observed = ObservedMatrix(ids, ids, deltas)
    path = tmp_path / "observed.csv"
    observed.to_csv(path)
    back = ObservedMatrix.from_csv(path)
    assert back.sources == ids
    assert back.targets == ids
    assert np.array_equal(back.deltas, deltas)
