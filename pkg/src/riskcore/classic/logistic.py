"""Unregularised logistic regression by full-batch gradient descent on the NLL."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..mlp import sigmoid
from .base import Classifier, check_x, check_xy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LrConfig:
    learning_rate: float = 1.0
    max_iters: int = 5000
    tol: float = 1e-6
    seed: int = 0  # unused: the solver is deterministic


def _nll(theta, xb, y):
    z = xb @ theta
    # log(1 + e^z) - y z, evaluated stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


class LogisticRegression(Classifier):
    def __init__(self, config: LrConfig | None = None):
        self.config = config or LrConfig()
        self.coefficients: np.ndarray | None = None
        self.intercept: float = 0.0
        self.converged = False
        self.n_iter = 0
        self.nll_history: list[float] = []

    def fit(self, x, y) -> "LogisticRegression":
        """Maximise the mean log-likelihood.

        Steps use Armijo backtracking from an adaptive step size, so the
        negative log-likelihood never increases between iterations.  Hitting
        ``max_iters`` leaves ``converged`` False and logs a warning.
        """
        x, y = check_xy(x, y)
        cfg = self.config
        # iterate in standardised coordinates; the likelihood is unchanged
        mu = x.mean(axis=0)
        sd = x.std(axis=0)
        sd[sd == 0] = 1.0
        xb = np.hstack([(x - mu) / sd, np.ones((x.shape[0], 1))])
        yf = y.astype(float)
        theta = np.zeros(xb.shape[1])
        f = _nll(theta, xb, yf)
        self.nll_history = [f]
        step = cfg.learning_rate
        self.converged = False
        it = 0
        for it in range(1, cfg.max_iters + 1):
            g = xb.T @ (sigmoid(xb @ theta) - yf) / xb.shape[0]
            gnorm2 = float(g @ g)
            if gnorm2 ** 0.5 < cfg.tol:
                self.converged = True
                it -= 1
                break
            while True:
                cand = theta - step * g
                f_new = _nll(cand, xb, yf)
                if f_new <= f - 0.5 * step * gnorm2:
                    break
                step *= 0.5
                if step < 1e-20:
                    cand, f_new = theta, f
                    break
            theta, f = cand, f_new
            self.nll_history.append(f)
            step *= 2.0
        self.n_iter = it
        if not self.converged:
            log.warning("logistic regression stopped after %d iterations without converging", it)
        self.coefficients = theta[:-1] / sd
        self.intercept = float(theta[-1] - self.coefficients @ mu)
        return self

    def decision_function(self, x) -> np.ndarray:
        x = check_x(x, self.coefficients.size)
        return x @ self.coefficients + self.intercept

    def predict_proba(self, x) -> np.ndarray:
        return sigmoid(self.decision_function(x))

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "intercept": self.intercept,
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticRegression":
        model = cls()
        model.coefficients = np.asarray(d["coefficients"], dtype=float)
        model.intercept = float(d["intercept"])
        model.converged = bool(d.get("converged", True))
        model.n_iter = int(d.get("n_iter", 0))
        return model


def lr_fit(x, y, config: LrConfig | None = None) -> LogisticRegression:
    return LogisticRegression(config).fit(x, y)
