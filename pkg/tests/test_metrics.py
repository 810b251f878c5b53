import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import esngrid.metrics as metrics_mod
from esngrid.metrics import binarize, find_threshold, fl_acc, mape, nrmse, pearson, rmse
from esngrid.rng import substream


class TestErrorMetrics:
    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        assert rmse(y, y) == 0.0
        assert nrmse(y, y) == 0.0
        assert mape(y, y) == 0.0

    def test_hand_values(self):
        y = np.array([1.0, 2.0, 3.0])
        yhat = np.array([1.0, 2.0, 4.0])
        assert rmse(y, yhat) == pytest.approx(np.sqrt(1.0 / 3.0))
        assert nrmse(y, yhat) == pytest.approx(np.sqrt(0.5))
        assert mape(y, yhat) == pytest.approx(100.0 / 9.0)

    def test_constant_truth_rejected_by_nrmse(self):
        with pytest.raises(ValueError, match="constant"):
            nrmse(np.full(5, 2.0), np.arange(5.0))

    def test_mape_rejects_zero_truth(self):
        with pytest.raises(ValueError, match="zero"):
            mape(np.array([1.0, 0.0]), np.array([1.0, 1.0]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            rmse(np.zeros(3), np.zeros(4))

    def test_rmse_definition_consistency(self):
        rng = substream(0, "rmse")
        y = rng.standard_normal((50, 3))
        yhat = rng.standard_normal((50, 3))
        assert rmse(y, yhat) ** 2 * y.size == pytest.approx(np.sum((y - yhat) ** 2))

    @settings(deadline=None, max_examples=40)
    @given(
        shift=st.floats(-5, 5),
        scale=st.floats(0.1, 10),
        seed=st.integers(0, 500),
    )
    def test_nrmse_affine_invariance(self, shift, scale, seed):
        rng = substream(seed, "affine")
        y = rng.standard_normal(30)
        yhat = y + rng.standard_normal(30) * 0.3
        a = nrmse(y, yhat)
        b = nrmse(scale * y + shift, scale * yhat + shift)
        assert b == pytest.approx(a, rel=1e-9)


def iou_by_sets(y_true, y_pred):
    truth = {tuple(idx) for idx in np.argwhere(np.asarray(y_true) == 1)}
    pred = {tuple(idx) for idx in np.argwhere(np.asarray(y_pred) == 1)}
    union = truth | pred
    if not union:
        return 1.0
    return len(truth & pred) / len(union)


class TestFlAcc:
    def test_perfect_with_positives(self):
        y = np.array([[1, 0], [0, 1]])
        assert fl_acc(y, y) == 1.0

    def test_counts(self):
        y_true = np.array([[1, 1, 0, 0]])
        y_pred = np.array([[1, 0, 1, 0]])  # TP=1 FN=1 FP=1
        assert fl_acc(y_true, y_pred) == pytest.approx(1.0 / 3.0)
        y_true = np.array([[1, 1, 0, 1]])
        y_pred = np.array([[1, 1, 1, 0]])  # TP=2 FP=1 FN=1
        assert fl_acc(y_true, y_pred) == pytest.approx(0.5)

    def test_all_negative_prediction_scores_zero(self):
        y_true = np.array([[1, 0, 1]])
        assert fl_acc(y_true, np.zeros_like(y_true)) == 0.0

    def test_empty_positives_everywhere(self):
        z = np.zeros((3, 4), dtype=int)
        assert fl_acc(z, z) == 1.0

    def test_rejects_nonbinary(self):
        with pytest.raises(ValueError, match="binary"):
            fl_acc(np.array([[0.5]]), np.array([[1]]))

    def test_matches_set_based_iou(self):
        # acceptance: agreement with an independent set implementation
        rng = substream(1, "iou")
        for _ in range(100):
            y_true = (rng.random((6, 8)) < 0.3).astype(int)
            y_pred = (rng.random((6, 8)) < 0.3).astype(int)
            assert fl_acc(y_true, y_pred) == pytest.approx(iou_by_sets(y_true, y_pred))


class TestFindThreshold:
    def test_binary_passthrough(self):
        y = np.array([[1, 0, 1, 0], [0, 1, 0, 1]])
        theta = find_threshold(y.astype(float), y)
        assert 0.0 < theta < 1.0
        assert fl_acc(y, binarize(y.astype(float), theta)) == 1.0

    def test_separable_scores_reach_perfect_accuracy(self):
        rng = substream(2, "sep")
        y = (rng.random((10, 5)) < 0.4).astype(int)
        raw = np.where(y == 1, rng.uniform(0.7, 1.0, y.shape), rng.uniform(0.0, 0.3, y.shape))
        theta = find_threshold(raw, y)
        assert fl_acc(y, binarize(raw, theta)) == 1.0

    def test_constant_predictions_return_single_candidate(self):
        raw = np.full((4, 3), 0.42)
        assert find_threshold(raw, np.ones((4, 3), dtype=int)) == 0.42

    def test_evaluates_twenty_candidates(self, monkeypatch):
        calls = {"n": 0}
        original = metrics_mod.fl_acc

        def counting(*args, **kwargs):
            calls["n"] += 1
            return original(*args, **kwargs)

        monkeypatch.setattr(metrics_mod, "fl_acc", counting)
        rng = substream(3, "count")
        y = (rng.random((5, 4)) < 0.5).astype(int)
        metrics_mod.find_threshold(rng.random((5, 4)), y)
        assert calls["n"] == 20


class TestPearson:
    def test_self_correlation(self):
        a = np.array([1.0, 2.0, 4.0, 8.0])
        assert pearson(a, a) == pytest.approx(1.0)

    def test_anticorrelation(self):
        a = np.array([1.0, 2.0, 4.0, 8.0])
        assert pearson(a, -a) == pytest.approx(-1.0)

    def test_hand_value(self):
        assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(0.9934, abs=1e-4)

    def test_constant_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson([1.0], [1.0, 2.0])

    @settings(deadline=None, max_examples=30)
    @given(
        a=hnp.arrays(np.float64, 10, elements=st.floats(-100, 100)),
        b=hnp.arrays(np.float64, 10, elements=st.floats(-100, 100)),
    )
    def test_bounded(self, a, b):
        if np.ptp(a) == 0 or np.ptp(b) == 0:
            return
        assert -1.0 - 1e-12 <= pearson(a, b) <= 1.0 + 1e-12
