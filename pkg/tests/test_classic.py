import math

import numpy as np
import pytest

from riskcore.classic import (
    GRID_EXPONENTS,
    AdaBoost,
    BoostConfig,
    DecisionTree,
    KNearestNeighbors,
    LogisticRegression,
    LrConfig,
    SVM,
    SvmConfig,
    TreeConfig,
    gini,
    grid_search,
    knn_predict,
    rbf_kernel,
    samme_alpha,
    smo_solve,
    stratified_folds,
    svm_fit,
)
from riskcore.errors import DimensionMismatch, InvalidConfig, InvalidK, MissingClass

from .conftest import blobs


def newton_logistic(x, y, iters=50):
    """Independent oracle: unregularised IRLS on [x, 1]."""
    xb = np.hstack([x, np.ones((x.shape[0], 1))])
    theta = np.zeros(xb.shape[1])
    for _ in range(iters):
        p = 1 / (1 + np.exp(-xb @ theta))
        h = xb.T @ (xb * (p * (1 - p))[:, None])
        theta -= np.linalg.solve(h, xb.T @ (p - y))
    return theta[:-1], theta[-1]


class TestLogistic:
    def test_recovers_sign(self):
        r = np.random.default_rng(0)
        x = r.standard_normal((400, 2))
        y = (r.random(400) < 1 / (1 + np.exp(-(2 * x[:, 0] - 1.5 * x[:, 1])))).astype(int)
        m = LogisticRegression().fit(x, y)
        assert m.converged
        assert m.coefficients[0] > 0 > m.coefficients[1]

    def test_matches_newton_oracle(self):
        r = np.random.default_rng(1)
        x = r.random((300, 3)) * [1, 5, 20]
        y = (r.random(300) < 1 / (1 + np.exp(-(x @ [1.0, -0.3, 0.05] - 0.2)))).astype(int)
        m = LogisticRegression().fit(x, y)
        coef, icpt = newton_logistic(x, y)
        assert np.allclose(m.coefficients, coef, atol=1e-4)
        assert m.intercept == pytest.approx(icpt, abs=1e-4)

    def test_null_data_small_coefficients(self):
        r = np.random.default_rng(2)
        x = r.random((2000, 4))
        y = r.integers(0, 2, 2000)
        m = LogisticRegression().fit(x, y)
        assert np.all(np.abs(m.coefficients) < 0.5)
        coef, _ = newton_logistic(x, y)
        assert np.allclose(m.coefficients, coef, atol=1e-4)

    def test_half_at_boundary(self):
        m = LogisticRegression().fit(*blobs(30, seed=3))
        # a point on the decision boundary: shift along the first axis
        x0 = np.zeros(2)
        x0[0] = -m.intercept / m.coefficients[0]
        assert m.predict_proba(x0)[0] == pytest.approx(0.5, abs=1e-12)

    def test_nll_never_increases(self):
        m = LogisticRegression().fit(*blobs(30, gap=1.0, seed=4))
        h = np.array(m.nll_history)
        assert np.all(np.diff(h) <= 1e-15)
        assert h[0] == pytest.approx(math.log(2))

    def test_iteration_cap_reports_not_converged(self):
        m = LogisticRegression(LrConfig(max_iters=2)).fit(*blobs(30, gap=1.0, seed=4))
        assert not m.converged and m.n_iter == 2

    def test_round_trip(self):
        x, y = blobs(20, seed=5)
        m = LogisticRegression().fit(x, y)
        back = LogisticRegression.from_dict(m.to_dict())
        assert np.array_equal(back.predict_proba(x), m.predict_proba(x))

    def test_single_class(self):
        with pytest.raises(MissingClass):
            LogisticRegression().fit(np.ones((3, 2)), [1, 1, 1])


class TestKnn:
    def test_vote_share(self):
        x = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
        y = np.array([1, 1, 0, 0, 0])
        assert knn_predict(x, y, [[0.5]], k=3).tolist() == [pytest.approx(2 / 3)]
        assert knn_predict(x, y, [[10.5]], k=1).tolist() == [0.0]

    def test_ties_prefer_lower_index(self):
        x = np.array([[1.0], [-1.0]])
        m = KNearestNeighbors(1).fit(x, [0, 1])
        assert m.neighbors([[0.0]]).tolist() == [[0]]
        m = KNearestNeighbors(1).fit(x[::-1], [1, 0])
        assert m.neighbors([[0.0]]).tolist() == [[0]]

    def test_matches_brute_force(self, rng):
        xt, yt = rng.random((50, 3)), rng.integers(0, 2, 50)
        xq = rng.random((70, 3))
        got = knn_predict(xt, yt, xq, k=5)
        d = ((xq[:, None] - xt[None]) ** 2).sum(-1)
        want = np.array([yt[np.argsort(row, kind="stable")[:5]].mean() for row in d])
        assert np.array_equal(got, want)

    def test_bad_k(self):
        with pytest.raises(InvalidK):
            KNearestNeighbors(0)
        with pytest.raises(InvalidK):
            KNearestNeighbors(5).fit(np.ones((3, 1)), [0, 1, 0])

    def test_dimension_mismatch(self):
        m = KNearestNeighbors(1).fit(np.ones((3, 2)), [0, 1, 0])
        with pytest.raises(DimensionMismatch):
            m.predict([[1.0, 2.0, 3.0]])


XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


class TestTree:
    def test_gini_values(self):
        assert gini(2, 4) == 0.5
        assert gini(0, 4) == 0.0 and gini(4, 4) == 0.0

    def test_solves_xor(self):
        t = DecisionTree().fit(XOR_X, XOR_Y)
        assert t.predict(XOR_X).tolist() == XOR_Y.tolist()
        assert t.depth == 2

    def test_zero_training_error_on_distinct_rows(self, rng):
        x = rng.random((80, 4))
        y = rng.integers(0, 2, 80)
        t = DecisionTree().fit(x, y)
        assert np.array_equal(t.predict(x), y)

    def test_max_depth(self, rng):
        x, y = rng.random((80, 4)), rng.integers(0, 2, 80)
        assert DecisionTree(TreeConfig(max_depth=2)).fit(x, y).depth <= 2

    def test_weights_change_the_leaf_share(self):
        x = np.array([[0.0], [0.0], [0.0]])
        t = DecisionTree().fit(x, [1, 0, 0], sample_weight=[2.0, 1.0, 1.0])
        assert t.predict_proba([[0.0]])[0] == 0.5

    def test_round_trip(self):
        t = DecisionTree().fit(XOR_X, XOR_Y)
        back = DecisionTree.from_dict(t.to_dict())
        assert np.array_equal(back.predict_proba(XOR_X), t.predict_proba(XOR_X))

    def test_bad_config(self):
        with pytest.raises(InvalidConfig):
            TreeConfig(criterion="entropy")
        with pytest.raises(InvalidConfig):
            TreeConfig(min_samples_split=1)


class TestAdaBoost:
    def test_alpha_value(self):
        assert samme_alpha(0.25) == pytest.approx(math.log(3))

    def test_single_round(self, rng):
        x, y = blobs(30, gap=1.0, seed=6)
        m = AdaBoost(BoostConfig(n_estimators=1, max_depth=1, min_samples_split=2)).fit(x, y)
        assert len(m.estimators) == 1
        assert np.array_equal(m.predict(x), m.estimators[0].predict(x))

    def test_perfect_learner_stops(self):
        m = AdaBoost(BoostConfig(max_depth=3, min_samples_split=2)).fit(XOR_X, XOR_Y)
        assert len(m.estimators) == 1 and m.alphas == [1.0]

    def test_rounds_are_better_than_chance(self):
        x, y = blobs(60, gap=0.8, seed=7)
        m = AdaBoost(BoostConfig(n_estimators=15, max_depth=1, min_samples_split=2)).fit(x, y)
        assert len(m.estimators) > 1
        assert all(0 < e < 0.5 for e in m.errors)
        assert all(s == pytest.approx(1.0) for s in m.weight_sums)
        assert np.mean(m.predict(x) == y) >= np.mean(m.estimators[0].predict(x) == y)

    def test_scores_in_unit_interval(self):
        x, y = blobs(40, gap=0.8, seed=8)
        p = AdaBoost(BoostConfig(n_estimators=10, max_depth=2)).fit(x, y).predict_proba(x)
        assert np.all((p >= 0) & (p <= 1))


class TestSvm:
    def test_kernel_diagonal(self, rng):
        x = rng.random((6, 3))
        k = rbf_kernel(x, x, 0.7)
        assert np.allclose(np.diag(k), 1.0)
        assert np.all((k > 0) & (k <= 1))

    @pytest.mark.parametrize("c,gamma", [(0.5, 1.0), (8.0, 0.25), (8.0, 2.0), (1.0, 0.125)])
    def test_two_point_closed_form(self, c, gamma):
        x = np.array([[0.0], [1.0]])
        res = smo_solve(rbf_kernel(x, x, gamma), np.array([1.0, -1.0]), c, tol=1e-10)
        expected = min(c, 1.0 / (1.0 - math.exp(-gamma)))
        assert np.allclose(res.alpha, expected, rtol=1e-9)

    def test_kkt_conditions(self):
        x, y = blobs(40, gap=1.5, seed=9)
        m = SVM(c=1.0, gamma=0.5, tol=1e-3).fit(x, y)
        ys = np.where(y == 1, 1.0, -1.0)
        assert m.converged
        assert np.all((m.alpha >= 0) & (m.alpha <= 1.0))
        assert abs(float(m.alpha @ ys)) < 1e-10
        margin = ys * m.decision_function(x)
        free = (m.alpha > 1e-8) & (m.alpha < 1.0 - 1e-8)
        assert np.all(np.abs(margin[free] - 1.0) < 1e-2)
        assert np.all(margin[m.alpha < 1e-8] > 1.0 - 1e-2)
        assert np.all(margin[m.alpha > 1.0 - 1e-8] < 1.0 + 1e-2)

    def test_matches_libsvm(self):
        SVC = pytest.importorskip("sklearn.svm").SVC
        x, y = blobs(50, d=3, gap=1.2, seed=10)
        ours = SVM(c=2.0, gamma=0.5, tol=1e-3).fit(x, y)
        ref = SVC(C=2.0, gamma=0.5, tol=1e-3).fit(x, y)
        q = np.random.default_rng(0).standard_normal((30, 3))
        assert np.allclose(ours.decision_function(q), ref.decision_function(q), atol=1e-3)

    def test_grid_search_picks_from_grid(self):
        x, y = blobs(25, gap=2.0, seed=11)
        cfg = SvmConfig(grid_exponents=(-1, 0, 1))
        c, gamma, scores = grid_search(x, y, cfg)
        assert len(scores) == 9
        assert c in (0.5, 1.0, 2.0) and gamma in (0.5, 1.0, 2.0)
        best = max(scores.values())
        tied = sorted(k for k, v in scores.items() if v == best)
        assert (c, gamma) == tied[0]

    def test_default_grid_bounds(self):
        assert min(GRID_EXPONENTS) == -3 and max(GRID_EXPONENTS) == 3

    def test_stratified_folds_partition(self):
        y = np.array([0] * 10 + [1] * 5)
        folds = stratified_folds(y, 3, 0)
        assert sorted(np.concatenate(folds).tolist()) == list(range(15))
        assert [int(y[f].sum()) for f in folds] == [2, 2, 1]

    def test_fixed_params_skip_search(self):
        x, y = blobs(20, seed=12)
        m = svm_fit(x, y, SvmConfig(c=1.0, gamma=1.0))
        assert m.grid_scores == {} and (m.c, m.gamma) == (1.0, 1.0)
        p = m.predict_proba(x)
        assert np.all((p > 0) & (p < 1))

    def test_config_validation(self):
        with pytest.raises(InvalidConfig):
            SvmConfig(c=1.0)
        with pytest.raises(InvalidConfig):
            SvmConfig(cv_folds=1)
