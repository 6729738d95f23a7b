from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, MissingClass


class Classifier:
    """Common surface: ``fit``, ``predict_proba`` (score in [0, 1]) and ``predict``.

    ``probabilistic`` says whether the scores are graded (AUC is reported
    for those by default) or hard 0/1 votes.
    """

    probabilistic = True

    def fit(self, x, y) -> "Classifier":
        raise NotImplementedError

    def predict_proba(self, x) -> np.ndarray:
        raise NotImplementedError

    def predict(self, x) -> np.ndarray:
        return (self.predict_proba(x) >= 0.5).astype(np.int64)


def check_xy(x, y, need_both: bool = True) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y).reshape(-1)
    if x.ndim != 2:
        raise DimensionMismatch("training features must be a 2-D matrix")
    if y.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"{y.shape[0]} labels for {x.shape[0]} rows")
    if x.shape[0] == 0:
        raise DimensionMismatch("empty training set")
    y = y.astype(np.int64)
    if need_both and (not np.any(y == 1) or not np.any(y == 0)):
        raise MissingClass("both classes must be present in the training set")
    return x, y


def check_x(x, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != n_features:
        raise DimensionMismatch(f"input has shape {x.shape}, model expects {n_features} features")
    return x
