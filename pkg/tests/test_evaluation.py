import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harbench.evaluation import (
    FoldResult,
    ResultSummary,
    accuracy,
    confidence_interval,
    confusion_matrix,
    heldout_separability,
    lda_project,
    macro_f_measure,
    separability_ratio,
    unpaired_ttest,
    welch_interval,
)


def test_accuracy_examples():
    assert accuracy([1, 1, 0], [1, 0, 0]) == pytest.approx(2 / 3)
    assert accuracy([1, 2], [1, 2]) == 1.0
    assert accuracy([2, 1], [1, 2]) == 0.0
    with pytest.raises(ValueError):
        accuracy([1], [1, 2])


def test_macro_f_examples():
    assert macro_f_measure([1, 1, 0], [1, 0, 0], [0, 1]) == pytest.approx(2 / 3)
    assert macro_f_measure([0, 1], [0, 1], [0, 1]) == 1.0
    # class 2 absent from both sides contributes 0
    assert macro_f_measure([0, 1], [0, 1], [0, 1, 2]) == pytest.approx(2 / 3)


def test_confusion_rows_are_truth():
    cm = confusion_matrix(["b", "b"], ["a", "b"], ["a", "b"])
    np.testing.assert_array_equal(cm, [[0, 1], [0, 1]])
    fr = FoldResult.from_predictions(0, ["b", "b"], ["a", "b"], ["a", "b"])
    assert fr.accuracy == 0.5


def test_interval_examples():
    assert confidence_interval([0.7] * 5) == (pytest.approx(0.7), pytest.approx(0.7))
    lo, hi = confidence_interval([0.0, 1.0], 0.95)
    assert (lo + hi) / 2 == 0.5
    assert (hi - lo) / 2 == pytest.approx(6.353, abs=1e-3)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=30))
def test_interval_nested_in_level(values):
    lo90, hi90 = confidence_interval(values, 0.90)
    lo95, hi95 = confidence_interval(values, 0.95)
    assert lo95 <= lo90 + 1e-12 and hi90 <= hi95 + 1e-12


def test_summary():
    s = ResultSummary.from_values([0.8, 0.9, 1.0], [0.7, 0.8, 0.9], method="m")
    assert s.mean_accuracy == pytest.approx(0.9)
    assert s.ci_width > 0 and s.method == "m"


def test_ttest_examples():
    a = np.random.default_rng(0).normal(0.5, 0.05, 10)
    assert unpaired_ttest(a, a).equivalent
    assert unpaired_ttest(a, a).mean_diff == 0.0
    rng = np.random.default_rng(1)
    hi = 0.9 + rng.normal(0, 1e-3, 10)
    lo = 0.1 + rng.normal(0, 1e-3, 10)
    v = unpaired_ttest(hi, lo)
    assert v.verdict == "different"
    w = unpaired_ttest(lo, hi)
    assert (w.ci_low, w.ci_high) == (pytest.approx(-v.ci_high), pytest.approx(-v.ci_low))
    assert w.verdict == v.verdict


def test_welch_matches_scipy_degrees_of_freedom():
    from scipy import stats

    rng = np.random.default_rng(2)
    a, b = rng.normal(0, 1, 10), rng.normal(0.3, 2, 10)
    diff, lo, hi = welch_interval(a, b, 0.9)
    res = stats.ttest_ind(a, b, equal_var=False)
    ci = res.confidence_interval(0.9)
    assert (float(lo), float(hi)) == (pytest.approx(ci.low), pytest.approx(ci.high))


def test_lda_two_gaussians():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal([1, 0], 0.1, (500, 2)), rng.normal([-1, 0], 0.1, (500, 2))])
    y = [0] * 500 + [1] * 500
    proj = lda_project(X, y)
    assert proj.directions.shape == (2, 1)
    assert abs(proj.directions[:, 0] @ [1.0, 0.0]) > 0.99


def test_lda_rotation_equivariance():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(m, [1.0, 0.3, 0.5], (80, 3)) for m in ([0, 0, 0], [2, 1, 0], [0, 2, 2])])
    y = np.repeat([0, 1, 2], 80)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = lda_project(X, y)
    b = lda_project(X @ q, y)
    np.testing.assert_allclose(np.abs(a.points), np.abs(b.points), atol=1e-6)
    np.testing.assert_allclose(np.abs(q @ b.directions), np.abs(a.directions), atol=1e-6)


def test_lda_errors():
    with pytest.raises(ValueError):
        lda_project(np.zeros((4, 2)), [0] * 4)


def test_separability_measures():
    z = np.array([-1.0, -1.2, 1.0, 1.2])
    y = [0, 0, 1, 1]
    assert separability_ratio(z, y) == pytest.approx(1.1**2 / 0.01)
    assert heldout_separability(z, y, z, y) == pytest.approx(separability_ratio(z, y))
    # held-out points far from their training centre separate worse
    assert heldout_separability(z, y, z[::-1], y) < 1.0
