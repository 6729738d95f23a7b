"""Two-class SAMME boosting over depth-limited weighted trees."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InvalidConfig
from .base import Classifier, check_x, check_xy
from .tree import DecisionTree, TreeConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoostConfig:
    n_estimators: int = 200
    max_depth: int = 10
    min_samples_split: int = 10

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1 or self.min_samples_split < 2:
            raise InvalidConfig("boosting parameters must be positive (min_samples_split >= 2)")


def samme_alpha(error: float) -> float:
    """Stage weight ln((1 - e) / e); the ln(K - 1) term vanishes for two classes."""
    return math.log((1.0 - error) / error)


class AdaBoost(Classifier):
    probabilistic = False

    def __init__(self, config: BoostConfig | None = None):
        self.config = config or BoostConfig()
        self.estimators: list[DecisionTree] = []
        self.alphas: list[float] = []
        self.errors: list[float] = []
        self.weight_sums: list[float] = []
        self.n_features = 0

    def fit(self, x, y) -> "AdaBoost":
        """Rounds stop early on a perfect learner (kept with weight 1) or on
        one no better than chance (discarded)."""
        x, y = check_xy(x, y)
        n = x.shape[0]
        self.n_features = x.shape[1]
        tree_cfg = TreeConfig(max_depth=self.config.max_depth,
                              min_samples_split=self.config.min_samples_split)
        w = np.full(n, 1.0 / n)
        self.estimators, self.alphas, self.errors, self.weight_sums = [], [], [], []
        for _ in range(self.config.n_estimators):
            tree = DecisionTree(tree_cfg).fit(x, y, sample_weight=w)
            miss = tree.predict(x) != y
            err = float(w[miss].sum() / w.sum())
            if err <= 0.0:
                self.estimators.append(tree)
                self.alphas.append(1.0)
                self.errors.append(0.0)
                break
            if err >= 0.5:
                log.info("boosting stopped: weak learner error %.4f >= 0.5", err)
                break
            alpha = samme_alpha(err)
            self.estimators.append(tree)
            self.alphas.append(alpha)
            self.errors.append(err)
            w = w * np.exp(alpha * miss)
            w /= w.sum()
            self.weight_sums.append(float(w.sum()))
        if not self.estimators:
            raise DataError("first weak learner is no better than chance; nothing to boost")
        return self

    def predict_proba(self, x) -> np.ndarray:
        """Share of stage weight voting positive."""
        x = check_x(x, self.n_features)
        votes = np.zeros(x.shape[0])
        for tree, a in zip(self.estimators, self.alphas):
            votes += a * tree.predict(x)
        return votes / sum(self.alphas)

    def to_dict(self) -> dict:
        return {
            "alphas": self.alphas,
            "errors": self.errors,
            "estimators": [t.to_dict() for t in self.estimators],
        }


def adaboost_fit(x, y, config: BoostConfig | None = None) -> AdaBoost:
    return AdaBoost(config).fit(x, y)
