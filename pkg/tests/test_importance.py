import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from riskcore.classic import LogisticRegression
from riskcore.errors import DimensionMismatch, InvalidFraction
from riskcore.importance import (
    ContributionRanking,
    dnn_contributions,
    lr_contributions,
    mean_ranking,
    rank_order,
    select_top_fraction,
    top_count,
)
from riskcore.mlp import MlpConfig, MlpModel
from riskcore.protocol import ProtocolConfig, fit_model, prepare_repeat


def _model_with_first_layer(w):
    w = np.asarray(w, dtype=float)
    m = MlpModel(MlpConfig(layer_sizes=(w.shape[0], w.shape[1], 2, 1)))
    m.weights[0][...] = w
    return m


def _lr(coef):
    m = LogisticRegression()
    m.coefficients = np.asarray(coef, dtype=float)
    return m


def _ranking(scores):
    return ContributionRanking(np.asarray(scores, float), None, [f"f{i}" for i in range(len(scores))])


class TestDnnScores:
    def test_example(self):
        r = dnn_contributions(_model_with_first_layer([[0.5, -1.5], [1.0, 1.0]]), [2.0, 0.0])
        assert r.scores.tolist() == [4.0, 0.0]

    def test_sigma_length_checked(self):
        with pytest.raises(DimensionMismatch):
            dnn_contributions(_model_with_first_layer(np.ones((3, 2))), [1.0, 1.0])

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (6, 4), elements=st.floats(-3, 3)),
           arrays(np.float64, 6, elements=st.floats(0, 5)),
           arrays(np.bool_, (6, 4)),
           st.floats(0.1, 10))
    def test_sign_invariance_and_sigma_scaling(self, w, sigma, flips, s):
        base = dnn_contributions(_model_with_first_layer(w), sigma).scores
        flipped = dnn_contributions(_model_with_first_layer(np.where(flips, -w, w)), sigma).scores
        assert np.array_equal(base, flipped)
        sigma2 = sigma.copy()
        sigma2[2] *= s
        scaled = dnn_contributions(_model_with_first_layer(w), sigma2).scores
        assert scaled[2] == pytest.approx(base[2] * s, rel=1e-12, abs=1e-300)
        assert np.array_equal(np.delete(scaled, 2), np.delete(base, 2))

    def test_names_default_and_given(self):
        m = _model_with_first_layer(np.ones((2, 2)))
        assert dnn_contributions(m, [1, 1]).factor_names == ("x0", "x1")
        assert dnn_contributions(m, [1, 1], ["a", "b"]).top_names(0.5) == ["a"]


class TestLrScores:
    def test_example(self):
        r = lr_contributions(_lr([2.0, -3.0, 0.5]))
        assert r.scores.tolist() == [2.0, 3.0, 0.5]
        assert r.order.tolist() == [1, 0, 2]

    def test_zero_ranks_last(self):
        assert lr_contributions(_lr([0.0, 0.1, -0.2])).order.tolist()[-1] == 0

    def test_sign_flip(self):
        assert np.array_equal(lr_contributions(_lr([1.0, -2.0])).scores,
                              lr_contributions(_lr([-1.0, 2.0])).scores)

    def test_sigma_mode(self):
        r = lr_contributions(_lr([2.0, -3.0]), sigma=[0.5, 0.1], mode="coef_sigma")
        assert r.scores.tolist() == pytest.approx([1.0, 0.3])
        with pytest.raises(ValueError):
            lr_contributions(_lr([1.0]), mode="coef_sigma")
        with pytest.raises(ValueError):
            lr_contributions(_lr([1.0]), mode="bogus")


class TestSelection:
    @pytest.mark.parametrize("fraction,k", [(0.10, 9), (0.25, 21), (0.50, 42), (0.75, 63), (1.0, 84)])
    def test_counts_for_84_factors(self, fraction, k):
        assert top_count(fraction, 84) == k
        assert select_top_fraction(_ranking(np.arange(84.0)), fraction).size == k

    def test_ties_by_lower_index(self):
        assert rank_order([1.0, 3.0, 3.0, 1.0]).tolist() == [1, 2, 0, 3]

    def test_returns_best_first(self):
        assert select_top_fraction(_ranking([0.1, 0.9, 0.5, 0.7]), 0.5).tolist() == [1, 3]

    @pytest.mark.parametrize("bad", [0.0, -0.1, 1.01])
    def test_invalid(self, bad):
        with pytest.raises(InvalidFraction):
            top_count(bad, 84)

    @settings(max_examples=80, deadline=None)
    @given(arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 5)),
           st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    def test_nested(self, scores, f1, f2):
        r = _ranking(scores)
        small, large = sorted((f1, f2))
        assert set(select_top_fraction(r, small)) <= set(select_top_fraction(r, large))

    def test_ranks_inverse_of_order(self):
        r = _ranking([0.2, 0.9, 0.4])
        assert r.ranks().tolist() == [2, 0, 1]

    def test_mean_ranking(self):
        a, b = _ranking([1.0, 2.0, 3.0]), _ranking([3.0, 2.0, 1.0])
        mean, std = mean_ranking([a, b])
        assert mean.scores.tolist() == [2.0, 2.0, 2.0]
        assert std.tolist() == pytest.approx([np.sqrt(2), 0.0, np.sqrt(2)])
        assert mean.order.tolist() == [0, 1, 2]


def test_planted_dims_rank_higher(small_planted):
    cfg, data = small_planted
    planted = np.array(cfg.informative_dims)
    noise = np.setdiff1d(np.arange(84), planted)
    pcfg = ProtocolConfig(repeats=3, base_seed=1)
    gaps = []
    for r in range(3):
        rep = prepare_repeat(data, pcfg, r)
        model = fit_model("dnn", rep.train.features, rep.train.labels, pcfg, rep.seeds.model)
        ranks = dnn_contributions(model, rep.sigma).ranks()
        gaps.append(ranks[noise].mean() - ranks[planted].mean())
    assert np.mean(gaps) > 0
