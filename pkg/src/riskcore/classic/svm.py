"""RBF-kernel SVM trained by SMO, with grid search over (c, gamma).

The solver works on the standard dual

    min 1/2 a'Qa - sum(a)   s.t.  0 <= a_i <= c,  sum(y_i a_i) = 0,
    Q_ij = y_i y_j K(x_i, x_j),

picking the working pair by maximal violation for ``i`` and second-order
gain for ``j``.  It stops when the KKT gap drops below ``tol``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig
from ..mlp import sigmoid
from .base import Classifier, check_x, check_xy

log = logging.getLogger(__name__)

TAU = 1e-12


def sq_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d, 0.0)


def rbf_kernel(a, b, gamma: float) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return np.exp(-gamma * sq_distances(a, b))


@dataclass
class SmoResult:
    alpha: np.ndarray
    rho: float
    converged: bool
    n_iter: int
    gap: float


def smo_solve(kernel: np.ndarray, y: np.ndarray, c: float, tol: float = 1e-3,
              max_iter: int = 100_000) -> SmoResult:
    """Solve the dual for a precomputed kernel matrix; ``y`` in {-1, +1}."""
    n = y.size
    y = y.astype(float)
    q = kernel * np.outer(y, y)
    diag = np.diag(kernel).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    converged = False
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            converged, gap = True, 0.0
            break
        m_up = np.where(up, minus_yg, -np.inf)
        i = int(np.argmax(m_up))
        g_max = m_up[i]
        g_min = np.min(np.where(low, minus_yg, np.inf))
        gap = g_max - g_min
        if gap < tol:
            converged = True
            break
        b = g_max - minus_yg
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * kernel[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        step = b[j] / a[j]
        # alpha_i += y_i * t, alpha_j -= y_j * t keeps sum(y * alpha) fixed
        lo_i, hi_i = (-alpha[i], c - alpha[i]) if y[i] > 0 else (alpha[i] - c, alpha[i])
        lo_j, hi_j = (alpha[j] - c, alpha[j]) if y[j] > 0 else (-alpha[j], c - alpha[j])
        t = min(max(step, lo_i, lo_j), hi_i, hi_j)
        d_i, d_j = y[i] * t, -y[j] * t
        alpha[i] += d_i
        alpha[j] += d_j
        alpha[i] = min(max(alpha[i], 0.0), c)
        alpha[j] = min(max(alpha[j], 0.0), c)
        grad += q[:, i] * d_i + q[:, j] * d_j
    else:
        log.warning("SMO hit max_iter=%d with KKT gap %.3g", max_iter, gap)

    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        rho = float(yg[free].mean())
    else:
        ub = np.where(((y > 0) & (alpha >= c)) | ((y < 0) & (alpha <= 0)), yg, np.inf).min()
        lb = np.where(((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= c)), yg, -np.inf).max()
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return SmoResult(alpha, rho, converged, it, float(gap))


GRID_EXPONENTS = tuple(range(-3, 4))


@dataclass(frozen=True)
class SvmConfig:
    c: float | None = None
    gamma: float | None = None
    grid_exponents: tuple[int, ...] = GRID_EXPONENTS
    cv_folds: int = 3
    tol: float = 1e-3
    max_iter: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid_exponents", tuple(self.grid_exponents))
        if (self.c is None) != (self.gamma is None):
            raise InvalidConfig("give both c and gamma, or neither to grid-search them")
        if self.c is not None and (self.c <= 0 or self.gamma <= 0):
            raise InvalidConfig("c and gamma must be positive")
        if self.cv_folds < 2:
            raise InvalidConfig("cv_folds must be >= 2")


class SVM(Classifier):
    """Kernel SVM; scores are sigmoid(decision value)."""

    def __init__(self, c: float = 1.0, gamma: float = 1.0, tol: float = 1e-3,
                 max_iter: int = 100_000):
        self.c, self.gamma, self.tol, self.max_iter = c, gamma, tol, max_iter
        self.support_x: np.ndarray | None = None
        self.dual_coef: np.ndarray | None = None
        self.rho = 0.0
        self.alpha: np.ndarray | None = None
        self.converged = False
        self.grid_scores: dict[tuple[float, float], float] = {}

    def fit(self, x, y, kernel: np.ndarray | None = None) -> "SVM":
        x, y = check_xy(x, y)
        ys = np.where(y == 1, 1.0, -1.0)
        k = rbf_kernel(x, x, self.gamma) if kernel is None else kernel
        res = smo_solve(k, ys, self.c, self.tol, self.max_iter)
        self.alpha, self.rho, self.converged = res.alpha, res.rho, res.converged
        sv = res.alpha > 0
        self.support_x = x[sv]
        self.dual_coef = res.alpha[sv] * ys[sv]
        return self

    def decision_function(self, x) -> np.ndarray:
        x = check_x(x, self.support_x.shape[1])
        if self.dual_coef.size == 0:
            return np.full(x.shape[0], -self.rho)
        return rbf_kernel(x, self.support_x, self.gamma) @ self.dual_coef - self.rho

    def predict_proba(self, x) -> np.ndarray:
        return sigmoid(self.decision_function(x))

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "gamma": self.gamma,
            "rho": self.rho,
            "support_x": self.support_x.tolist(),
            "dual_coef": self.dual_coef.tolist(),
        }


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Fold index arrays; each class is shuffled then dealt round-robin."""
    rng = np.random.default_rng(seed)
    assign = np.empty(y.size, dtype=np.int64)
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        assign[idx] = np.arange(idx.size) % k
    return [np.flatnonzero(assign == f) for f in range(k)]


def _f1(y_true, y_pred) -> float:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    denom = int(np.sum(y_true == 1)) + int(np.sum(y_pred == 1))
    return 2.0 * tp / denom if denom else 0.0


def grid_search(x, y, config: SvmConfig) -> tuple[float, float, dict]:
    """Mean cross-validated F1 for every (c, gamma) on the grid.

    Ties go to the smaller c, then the smaller gamma.
    """
    x, y = check_xy(x, y)
    folds = stratified_folds(y, config.cv_folds, config.seed)
    d2 = sq_distances(x, x)
    values = [2.0**e for e in sorted(config.grid_exponents)]
    scores: dict[tuple[float, float], float] = {}
    best, best_score = None, -np.inf
    for c in values:
        for gamma in values:
            f1s = []
            kernel = np.exp(-gamma * d2)
            for f, test_idx in enumerate(folds):
                train_idx = np.concatenate([folds[g] for g in range(len(folds)) if g != f])
                if np.unique(y[train_idx]).size < 2:
                    f1s.append(0.0)
                    continue
                model = SVM(c, gamma, config.tol, config.max_iter)
                model.fit(x[train_idx], y[train_idx], kernel[np.ix_(train_idx, train_idx)])
                f1s.append(_f1(y[test_idx], model.predict(x[test_idx])))
            score = float(np.mean(f1s))
            scores[(c, gamma)] = score
            if score > best_score:
                best, best_score = (c, gamma), score
    return best[0], best[1], scores


def svm_fit(x, y, config: SvmConfig | None = None) -> SVM:
    """Fit with fixed (c, gamma) if given, otherwise grid-search them first."""
    config = config or SvmConfig()
    if config.c is None:
        c, gamma, scores = grid_search(x, y, config)
    else:
        c, gamma, scores = config.c, config.gamma, {}
    model = SVM(c, gamma, config.tol, config.max_iter).fit(x, y)
    model.grid_scores = scores
    return model
