import numpy as np
import pytest

from esngrid.metrics import nrmse
from esngrid.readout import (
    beta_sweep,
    harvest_states,
    predict,
    ridge_explicit,
    ridge_svd,
)
from esngrid.reservoir import DEFAULT_BETA_CANDIDATES, HyperParameters, TopologyGrid, init_weights
from esngrid.rng import substream


class TestRidgeExplicit:
    def test_identity_design(self):
        y = np.arange(6.0).reshape(3, 2)
        w = ridge_explicit(np.eye(3), y, beta=0.0)
        assert w.w_out == pytest.approx(y)

    def test_huge_beta_shrinks_to_zero(self):
        rng = substream(0, "ridge")
        x = rng.standard_normal((40, 8))
        y = rng.standard_normal((40, 2))
        w = ridge_explicit(x, y, beta=1e9)
        assert np.linalg.norm(w.w_out) < 1e-6 * np.linalg.norm(x.T @ y)

    def test_matches_svd_solver(self):
        rng = substream(1, "ridge")
        x = rng.standard_normal((50, 10))
        y = rng.standard_normal((50, 2))
        a = ridge_explicit(x, y, beta=0.1).w_out
        b = ridge_svd(x, y, beta=0.1).w_out
        assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(b)

    def test_rank_deficient_at_zero_beta_rejected(self):
        x = np.ones((5, 3))  # rank 1
        with pytest.raises(np.linalg.LinAlgError, match="ridge_svd"):
            ridge_explicit(x, np.ones((5, 1)), beta=0.0)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            ridge_explicit(np.eye(2), np.eye(2), beta=-1.0)


class TestRidgeSvd:
    def test_diagonal_reciprocal(self):
        w = ridge_svd(np.diag([2.0, 1.0]), np.eye(2), beta=0.0)
        assert w.w_out == pytest.approx(np.diag([0.5, 1.0]))

    def test_zero_singular_value_gives_minimum_norm(self):
        x = np.array([[1.0, 0.0], [0.0, 0.0]])  # second direction unobserved
        w = ridge_svd(x, np.array([[2.0], [0.0]]), beta=0.0)
        assert w.w_out == pytest.approx(np.array([[2.0], [0.0]]))

    def test_solver_equivalence_over_default_candidates(self):
        # acceptance: explicit vs SVD within 1e-8 relative on full-rank systems
        rng = substream(2, "equiv")
        for trial in range(20):
            x = rng.standard_normal((30, 6))
            y = rng.standard_normal((30, 2))
            for beta in DEFAULT_BETA_CANDIDATES:
                a = ridge_explicit(x, y, beta).w_out
                b = ridge_svd(x, y, beta).w_out
                assert np.linalg.norm(a - b) <= 1e-8 * max(np.linalg.norm(b), 1e-12)

    def test_minimizes_regularized_objective(self):
        rng = substream(3, "objective")
        x = rng.standard_normal((25, 7))
        y = rng.standard_normal((25, 2))
        beta = 0.3
        w = ridge_svd(x, y, beta).w_out

        def objective(m):
            return np.sum((x @ m - y) ** 2) + beta * np.sum(m**2)

        base = objective(w)
        for _ in range(10):
            perturbation = rng.standard_normal(w.shape)
            perturbation *= 1e-3 / np.linalg.norm(perturbation)
            assert objective(w + perturbation) >= base


class TestPredict:
    def test_zero_readout(self):
        from esngrid.readout import ReadoutWeights

        r = ReadoutWeights(np.zeros((4, 2)), beta=0.0)
        assert np.all(predict(np.ones((3, 4)), r) == 0.0)

    def test_identity_design_returns_weights(self):
        from esngrid.readout import ReadoutWeights

        w = substream(4, "w").standard_normal((3, 2))
        r = ReadoutWeights(w, beta=0.0)
        assert predict(np.eye(3), r) == pytest.approx(w)

    def test_round_trip_through_training(self):
        rng = substream(5, "roundtrip")
        x = rng.standard_normal((6, 6)) + 3 * np.eye(6)
        y = rng.standard_normal((6, 2))
        r = ridge_svd(x, y, beta=0.0)
        assert np.linalg.norm(predict(x, r) - y) <= 1e-8 * np.linalg.norm(y)


class TestBetaSweep:
    @staticmethod
    def collinear_problem():
        rng = substream(7, "betasweep")
        base = rng.standard_normal((60, 5))
        x_train = np.hstack([base, base + 1e-7 * rng.standard_normal((60, 5))])
        w_true = rng.standard_normal((10, 2))
        y_train = x_train @ w_true + 0.01 * rng.standard_normal((60, 2))
        base_v = rng.standard_normal((40, 5))
        x_val = np.hstack([base_v, base_v + 1e-7 * rng.standard_normal((40, 5))])
        y_val = x_val @ w_true + 0.01 * rng.standard_normal((40, 2))
        return x_train, y_train, x_val, y_val

    def test_single_candidate(self):
        x = np.eye(3)
        beta, readout, score = beta_sweep(x, x, x, x, (0.5,), nrmse)
        assert beta == 0.5

    def test_prefers_regularization_on_noisy_collinear_data(self):
        x_train, y_train, x_val, y_val = self.collinear_problem()
        beta, _, _ = beta_sweep(x_train, y_train, x_val, y_val, (0.0, 1e-4), nrmse)
        assert beta == 1e-4

    def test_factorizes_once(self, monkeypatch):
        calls = {"svd": 0}
        original = np.linalg.svd

        def counting(*args, **kwargs):
            calls["svd"] += 1
            return original(*args, **kwargs)

        monkeypatch.setattr(np.linalg, "svd", counting)
        x_train, y_train, x_val, y_val = self.collinear_problem()
        beta_sweep(x_train, y_train, x_val, y_val, DEFAULT_BETA_CANDIDATES, nrmse)
        assert calls["svd"] == 1

    def test_tie_breaks_to_smallest_beta(self):
        x = np.eye(4)
        y = np.zeros((4, 1))  # every beta predicts zeros perfectly

        def score(y_true, y_pred):
            return float(np.sum((y_true - y_pred) ** 2))

        beta, _, _ = beta_sweep(x, y, x, y, (1e-2, 1e-4, 0.0), score)
        assert beta == 0.0

    def test_maximizing_metric_direction(self):
        x_train, y_train, x_val, y_val = self.collinear_problem()

        def negated(y_true, y_pred):
            return -nrmse(y_true, y_pred)

        negated.higher_is_better = True
        beta, _, _ = beta_sweep(x_train, y_train, x_val, y_val, (0.0, 1e-4), negated)
        assert beta == 1e-4


class TestHarvestStates:
    @staticmethod
    def net(n_reservoir=6):
        hp = HyperParameters(n_reservoir=n_reservoir)
        return hp, init_weights(TopologyGrid.grid(1, 1), hp, 1, seed=0)

    def test_washout_trims_rows(self):
        hp, w = self.net()
        u = substream(8, "h").uniform(-1, 1, (100, 1))
        x, y = harvest_states(w, hp, [(u, u)], washout=30)
        assert x.n_rows == 70 and y.shape[0] == 70

    def test_zero_washout_keeps_everything(self):
        hp, w = self.net()
        seqs = [
            (substream(9, "a").uniform(-1, 1, (40, 1)),) * 2,
            (substream(9, "b").uniform(-1, 1, (25, 1)),) * 2,
        ]
        x, _ = harvest_states(w, hp, seqs, washout=0)
        assert x.n_rows == 65

    def test_sequence_not_longer_than_washout_rejected(self):
        hp, w = self.net()
        u = np.zeros((10, 1))
        with pytest.raises(ValueError, match="washout"):
            harvest_states(w, hp, [(u, u)], washout=10)

    def test_provenance_increases_within_sequence(self):
        hp, w = self.net()
        seqs = [(np.ones((12, 1)), np.ones((12, 1))), (np.ones((9, 1)), np.ones((9, 1)))]
        x, _ = harvest_states(w, hp, seqs, washout=3)
        for seq_id in (0, 1):
            steps = [t for s, t in x.provenance if s == seq_id]
            assert steps == sorted(steps) and steps[0] == 3
