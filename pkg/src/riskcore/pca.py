"""Two-component PCA by power iteration with deflation, and layer projections."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classic.logistic import LogisticRegression, LrConfig
from .errors import DimensionMismatch, MissingClass, TooFewSamples
from .mlp import MlpModel, forward

log = logging.getLogger(__name__)

# an axis whose variance falls below this share of the total counts as empty
RANK_TOL = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    axes: np.ndarray  # (n_components, d), unit rows
    explained_variance: np.ndarray
    total_variance: float
    rank_deficient: bool
    converged: bool

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.mean.size:
            raise DimensionMismatch(f"expected {self.mean.size} columns, got shape {x.shape}")
        return (x - self.mean) @ self.axes.T


def _power_iteration(c, start, tol, max_iter, found=(), floor=0.0):
    """Dominant eigenvector of ``c`` restricted to the complement of ``found``.

    An image shorter than ``floor`` means the remaining spectrum is
    numerically zero; the current vector is returned with eigenvalue 0.
    """
    v = _complement(start, found)
    v /= np.linalg.norm(v)
    prev_step = np.inf
    for _ in range(max_iter):
        w = _complement(c @ v, found)
        norm = np.linalg.norm(w)
        if norm <= floor:
            return v, 0.0, True
        w /= norm
        if w @ v < 0:
            w = -w
        step = np.linalg.norm(w - v)
        # steps shrink geometrically at rate r, so the distance still to go is about step * r / (1 - r)
        r = step / prev_step if prev_step > 0 else 0.0
        remaining = step * r / (1.0 - r) if r < 1.0 else np.inf
        if step < tol and remaining < tol:
            return w, float(w @ c @ w), True
        prev_step = step
        v = w
    return v, float(v @ c @ v), False


def _complement(v, found):
    for a in found:
        v = v - (v @ a) * a
    return v


def _orient(v):
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def pca_fit(matrix, n_components: int = 2, tol: float = 1e-10, max_iter: int = 10_000) -> PcaModel:
    """Leading principal axes of the sample covariance.

    Each axis is found by power iteration on the deflated covariance.  Every
    axis is flipped so that its largest-magnitude entry is positive.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch("PCA input must be a 2-D matrix")
    n, d = x.shape
    if n < 3:
        raise TooFewSamples("PCA needs at least three rows")
    if d < n_components:
        raise DimensionMismatch(f"cannot extract {n_components} axes from {d} columns")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (n - 1)
    total = float(np.trace(cov))
    rng = np.random.default_rng(0)
    axes, values = [], []
    converged = True
    work = cov.copy()
    floor = RANK_TOL * total
    for _ in range(n_components):
        start = rng.standard_normal(d)
        v, lam, ok = _power_iteration(work, start, tol, max_iter, axes, floor)
        # a second projection keeps rounding drift out of the orthogonality
        v = _complement(v, axes)
        v /= np.linalg.norm(v)
        lam = max(float(v @ cov @ v), 0.0)
        converged &= ok
        axes.append(_orient(v))
        values.append(lam)
        work = work - lam * np.outer(v, v)
    if not converged:
        log.warning("power iteration did not reach tol=%g within %d iterations", tol, max_iter)
    values = np.array(values)
    rank_def = total <= 0 or values[-1] <= RANK_TOL * max(total, 1e-300)
    return PcaModel(mean, np.vstack(axes), values, total, bool(rank_def), bool(converged))


@dataclass(frozen=True)
class LayerProjection:
    name: str
    coords: np.ndarray
    labels: np.ndarray
    explained_variance: np.ndarray
    degenerate: bool


def layer_names(model: MlpModel) -> list[str]:
    return ["input"] + [f"hidden{i}" for i in range(1, len(model.config.layer_sizes) - 1)]


def project_layers(model: MlpModel, x, labels) -> list[LayerProjection]:
    """2-D PCA coordinates of the inputs and of every hidden layer.

    Each layer gets its own PCA.  A layer whose activations do not vary
    (e.g. all zero) is flagged ``degenerate`` and projects to zeros.
    """
    labels = np.asarray(labels).astype(np.int64)
    _, acts = forward(model, x, return_activations=True)
    out = []
    for name, a in zip(layer_names(model), acts[:-1]):
        spread = float(np.ptp(a, axis=0).max()) if a.size else 0.0
        if spread == 0.0 or a.shape[1] < 2:
            out.append(LayerProjection(name, np.zeros((a.shape[0], 2)), labels, np.zeros(2), True))
            continue
        p = pca_fit(a)
        out.append(LayerProjection(name, p.transform(a), labels, p.explained_variance,
                                   bool(p.total_variance == 0)))
    return out


def separability_probe(coords, labels) -> float:
    """Training accuracy of logistic regression on the 2-D coordinates."""
    labels = np.asarray(labels).astype(np.int64)
    if labels.min() == labels.max():
        raise MissingClass("the probe needs both classes")
    model = LogisticRegression(LrConfig(max_iters=2000)).fit(coords, labels)
    return float(np.mean(model.predict(coords) == labels))
