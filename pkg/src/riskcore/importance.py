"""Risk-factor contribution scores and top-fraction selection.

For the network, factor ``i`` scores ``sigma_i * sum_j |W[i, j]|`` where ``W``
is the input-to-first-hidden weight matrix and ``sigma_i`` the sample standard
deviation of the factor on the training matrix.  For logistic regression the
score is ``|coef_i|``, optionally multiplied by ``sigma_i`` as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classic.logistic import LogisticRegression
from .errors import DimensionMismatch, InvalidFraction
from .mlp import MlpModel, first_layer_weights

DEFAULT_FRACTIONS = (0.10, 0.25, 0.50, 0.75, 1.00)
LR_MODES = ("coef", "coef_sigma")


def rank_order(scores) -> np.ndarray:
    """Indices by descending score; equal scores keep ascending index order."""
    return np.argsort(-np.asarray(scores, dtype=float), kind="stable")


@dataclass(frozen=True)
class ContributionRanking:
    scores: np.ndarray
    sigma: np.ndarray | None
    factor_names: tuple[str, ...]
    mode: str = "dnn"
    order: np.ndarray = field(init=False)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "factor_names", tuple(self.factor_names))
        object.__setattr__(self, "order", rank_order(scores))
        if len(self.factor_names) != scores.size:
            raise DimensionMismatch("one factor name is needed per score")

    def __len__(self) -> int:
        return self.scores.size

    def ranks(self) -> np.ndarray:
        """Rank of each factor (0 = highest score)."""
        r = np.empty(self.scores.size, dtype=np.int64)
        r[self.order] = np.arange(self.scores.size)
        return r

    def top_names(self, fraction: float) -> list[str]:
        return [self.factor_names[i] for i in select_top_fraction(self, fraction)]


def _names(names, n):
    return tuple(names) if names is not None else tuple(f"x{i}" for i in range(n))


def dnn_contributions(model: MlpModel, sigma, factor_names: Sequence[str] | None = None
                      ) -> ContributionRanking:
    w = first_layer_weights(model)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (w.shape[0],):
        raise DimensionMismatch(f"sigma has length {sigma.size}, model input is {w.shape[0]}")
    scores = sigma * np.abs(w).sum(axis=1)
    return ContributionRanking(scores, sigma, _names(factor_names, w.shape[0]), "dnn")


def lr_contributions(model: LogisticRegression, sigma=None, mode: str = "coef",
                     factor_names: Sequence[str] | None = None) -> ContributionRanking:
    if mode not in LR_MODES:
        raise ValueError(f"mode must be one of {LR_MODES}")
    coef = np.asarray(model.coefficients, dtype=float)
    scores = np.abs(coef)
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != coef.shape:
            raise DimensionMismatch(f"sigma has length {sigma.size}, model has {coef.size} coefficients")
    if mode == "coef_sigma":
        if sigma is None:
            raise ValueError("mode 'coef_sigma' needs sigma")
        scores = scores * sigma
    return ContributionRanking(scores, sigma, _names(factor_names, coef.size), f"lr_{mode}")


def top_count(fraction: float, n: int) -> int:
    if not 0.0 < fraction <= 1.0:
        raise InvalidFraction(f"fraction {fraction} outside (0, 1]")
    # the small slack keeps 0.7 * 10 from rounding up to 8
    return min(n, max(1, math.ceil(fraction * n - 1e-9)))


def select_top_fraction(ranking: ContributionRanking, fraction: float) -> np.ndarray:
    """The ceil(fraction * N) best-scoring factor indices, best first."""
    return ranking.order[: top_count(fraction, len(ranking))].copy()


def mean_ranking(rankings: Sequence[ContributionRanking]) -> tuple[ContributionRanking, np.ndarray]:
    """Ranking of the per-factor mean score, plus the per-factor std over runs."""
    stack = np.vstack([r.scores for r in rankings])
    std = stack.std(axis=0, ddof=1) if len(rankings) > 1 else np.zeros(stack.shape[1])
    first = rankings[0]
    return ContributionRanking(stack.mean(axis=0), None, first.factor_names, first.mode), std
