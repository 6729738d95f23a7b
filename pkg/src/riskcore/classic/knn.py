from __future__ import annotations

import numpy as np

from ..errors import InvalidK
from .base import Classifier, check_x, check_xy

_CHUNK = 32


class KNearestNeighbors(Classifier):
    """Score = share of positives among the k nearest training rows (Euclidean).

    Equal distances are resolved in favour of the lower training row index.
    """

    probabilistic = False

    def __init__(self, k: int = 5):
        if k < 1:
            raise InvalidK("k must be >= 1")
        self.k = k
        self.x: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, x, y) -> "KNearestNeighbors":
        x, y = check_xy(x, y, need_both=False)
        if self.k > x.shape[0]:
            raise InvalidK(f"k={self.k} exceeds the {x.shape[0]} training rows")
        self.x, self.y = x, y
        return self

    def neighbors(self, x) -> np.ndarray:
        x = check_x(x, self.x.shape[1])
        out = np.empty((x.shape[0], self.k), dtype=np.int64)
        for start in range(0, x.shape[0], _CHUNK):
            block = x[start : start + _CHUNK]
            diff = block[:, None, :] - self.x[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            out[start : start + _CHUNK] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def predict_proba(self, x) -> np.ndarray:
        return self.y[self.neighbors(x)].mean(axis=1)

    def to_dict(self) -> dict:
        return {"k": self.k, "x": self.x.tolist(), "y": self.y.tolist()}


def knn_predict(x_train, y_train, x, k: int = 5) -> np.ndarray:
    return KNearestNeighbors(k).fit(x_train, y_train).predict_proba(x)
