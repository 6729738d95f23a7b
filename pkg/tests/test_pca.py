import numpy as np
import pytest

from riskcore.errors import DimensionMismatch, MissingClass, TooFewSamples
from riskcore.mlp import MlpConfig, MlpModel, init
from riskcore.pca import layer_names, pca_fit, project_layers, separability_probe

from .conftest import blobs


def eig_oracle(x, k=2):
    xc = x - x.mean(axis=0)
    vals, vecs = np.linalg.eigh(xc.T @ xc / (x.shape[0] - 1))
    order = np.argsort(vals)[::-1][:k]
    return vals[order], vecs[:, order].T


class TestPcaFit:
    def test_line(self):
        t = np.linspace(-1, 1, 20)
        p = pca_fit(np.c_[t, t])
        assert np.allclose(p.axes[0], [2**-0.5, 2**-0.5], atol=1e-10)
        assert p.explained_variance[1] == pytest.approx(0.0, abs=1e-12)
        assert p.rank_deficient

    def test_isotropic_cloud(self):
        x = np.random.default_rng(0).standard_normal((5000, 2))
        v = pca_fit(x).explained_variance
        assert v[1] / v[0] > 0.9

    def test_matches_dense_eigensolver(self):
        r = np.random.default_rng(1)
        for _ in range(100):
            x = r.standard_normal((10, 4)) * r.uniform(0.2, 3.0, 4)
            p = pca_fit(x)
            vals, vecs = eig_oracle(x)
            for a, b in zip(p.axes, vecs):
                assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-8
            assert np.allclose(p.explained_variance, vals, rtol=1e-10, atol=1e-12)
            assert np.allclose(p.axes @ p.axes.T, np.eye(2), atol=1e-10)
            assert p.converged

    def test_sign_convention_and_ordering(self):
        x = np.random.default_rng(2).standard_normal((50, 5))
        p = pca_fit(x)
        for a in p.axes:
            assert a[np.argmax(np.abs(a))] > 0
        assert p.explained_variance[0] >= p.explained_variance[1] >= 0
        assert p.explained_variance.sum() <= p.total_variance + 1e-12

    def test_rank_two_data_keeps_all_variance(self):
        r = np.random.default_rng(3)
        x = r.standard_normal((30, 2)) @ r.standard_normal((2, 6))
        p = pca_fit(x)
        assert p.explained_variance.sum() == pytest.approx(p.total_variance, rel=1e-9)

    def test_transform_is_centered_projection(self):
        x = np.random.default_rng(4).standard_normal((20, 3))
        p = pca_fit(x)
        assert np.allclose(p.transform(x), (x - x.mean(axis=0)) @ p.axes.T, rtol=0, atol=0)

    def test_errors(self):
        with pytest.raises(TooFewSamples):
            pca_fit(np.ones((2, 3)))
        with pytest.raises(DimensionMismatch):
            pca_fit(np.ones((5, 1)))
        with pytest.raises(DimensionMismatch):
            pca_fit(np.random.default_rng(0).random((5, 3))).transform(np.ones((2, 2)))


class TestLayers:
    def test_three_layers_for_reference_net(self):
        m = init(MlpConfig(seed=1))
        x = np.random.default_rng(0).random((40, 84))
        out = project_layers(m, x, np.r_[np.zeros(20), np.ones(20)])
        assert [p.name for p in out] == ["input", "hidden1", "hidden2"] == layer_names(m)
        assert all(p.coords.shape == (40, 2) for p in out)

    def test_zero_model_is_degenerate(self):
        m = MlpModel(MlpConfig(layer_sizes=(4, 3, 3, 1)))
        x = np.random.default_rng(0).random((10, 4))
        out = project_layers(m, x, np.r_[np.zeros(5), np.ones(5)])
        assert not out[0].degenerate
        assert out[1].degenerate and out[2].degenerate
        assert np.all(out[1].coords == 0)


class TestProbe:
    def test_separated(self):
        x, y = blobs(30, gap=10.0)
        assert separability_probe(x, y) == 1.0

    def test_identical_coordinates(self):
        y = np.r_[np.ones(3), np.zeros(7)]
        assert separability_probe(np.zeros((10, 2)), y) == pytest.approx(0.7)

    def test_single_class(self):
        with pytest.raises(MissingClass):
            separability_probe(np.zeros((4, 2)), np.ones(4))
