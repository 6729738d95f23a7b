"""CART classification tree with Gini impurity and optional sample weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_x, check_xy

LEAF = -1


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = "gini"
    max_depth: int | None = None
    min_samples_split: int = 2

    def __post_init__(self):
        from ..errors import InvalidConfig

        if self.criterion != "gini":
            raise InvalidConfig("only the gini criterion is supported")
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidConfig("max_depth must be positive")
        if self.min_samples_split < 2:
            raise InvalidConfig("min_samples_split must be >= 2")


def gini(pos_weight: float, total_weight: float) -> float:
    p = pos_weight / total_weight
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(x, y, w, order):
    """Best (feature, threshold, child impurity) for one node, or None.

    ``order`` holds the node's row indices sorted by each column.  Splits
    that leave the impurity unchanged are still accepted, otherwise parity
    style labelings (XOR) could never be separated.
    """
    n, d = order.shape
    cols = np.arange(d)
    xs = x[order, cols]
    ws = w[order]
    wp = ws * y[order]
    total, pos = ws[:, 0].sum(), wp[:, 0].sum()
    wl = np.cumsum(ws, axis=0)[:-1]
    pl = np.cumsum(wp, axis=0)[:-1]
    wr = total - wl
    pr = pos - pl
    valid = (xs[1:] > xs[:-1]) & (wl > 0) & (wr > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        child = 2.0 * (pl * (wl - pl) / wl + pr * (wr - pr) / wr) / total
    child = np.where(valid, child, np.inf)
    pos_per_feature = np.argmin(child, axis=0)
    best_per_feature = child[pos_per_feature, cols]
    f = int(np.argmin(best_per_feature))
    i = int(pos_per_feature[f])
    lo, hi = xs[i, f], xs[i + 1, f]
    thr = (lo + hi) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return f, float(thr), float(best_per_feature[f])


class DecisionTree(Classifier):
    probabilistic = False

    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_features = 0

    def _add(self, value) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.value) - 1

    def fit(self, x, y, sample_weight=None) -> "DecisionTree":
        x, y = check_xy(x, y, need_both=False)
        n, d = x.shape
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        yf = y.astype(float)
        self.n_features = d
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        cfg = self.config
        root_order = np.argsort(x, axis=0, kind="stable")
        stack = [(self._add(0.0), root_order, 0)]
        while stack:
            node, order, depth = stack.pop()
            rows = order[:, 0]
            wn = w[rows]
            pos_w = float(wn @ yf[rows])
            tot_w = float(wn.sum())
            self.value[node] = pos_w / tot_w if tot_w > 0 else float(yf[rows].mean())
            labels = y[rows]
            if (
                labels.min() == labels.max()
                or rows.size < cfg.min_samples_split
                or (cfg.max_depth is not None and depth >= cfg.max_depth)
            ):
                continue
            found = _best_split(x, yf, w, order)
            if found is None:
                continue
            f, thr, _ = found
            go_left = np.zeros(n, dtype=bool)
            go_left[rows] = x[rows, f] <= thr
            mask = go_left[order]
            left_order = order.T[mask.T].reshape(d, -1).T
            right_order = order.T[~mask.T].reshape(d, -1).T
            self.feature[node] = f
            self.threshold[node] = thr
            li, ri = self._add(0.0), self._add(0.0)
            self.left[node], self.right[node] = li, ri
            stack.append((ri, right_order, depth + 1))
            stack.append((li, left_order, depth + 1))
        self._freeze()
        return self

    def _freeze(self):
        self._feature = np.asarray(self.feature, dtype=np.int64)
        self._threshold = np.asarray(self.threshold, dtype=float)
        self._left = np.asarray(self.left, dtype=np.int64)
        self._right = np.asarray(self.right, dtype=np.int64)
        self._value = np.asarray(self.value, dtype=float)

    def apply(self, x) -> np.ndarray:
        """Leaf index reached by each row."""
        x = check_x(x, self.n_features)
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = self._feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x[idx, self._feature[nd]] <= self._threshold[nd]
            node[idx] = np.where(go_left, self._left[nd], self._right[nd])
            active[idx] = self._feature[node[idx]] != LEAF
        return node

    def predict_proba(self, x) -> np.ndarray:
        """Weighted share of positives in the reached leaf (0 or 1 for pure leaves)."""
        return self._value[self.apply(x)]

    @property
    def node_count(self) -> int:
        return len(self.value)

    @property
    def depth(self) -> int:
        depths = [0] * self.node_count
        for i in range(self.node_count):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return max(depths)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        t = cls()
        t.feature, t.threshold = list(d["feature"]), list(d["threshold"])
        t.left, t.right, t.value = list(d["left"]), list(d["right"]), list(d["value"])
        t.n_features = int(d["n_features"])
        t._freeze()
        return t


def tree_fit(x, y, config: TreeConfig | None = None, sample_weight=None) -> DecisionTree:
    return DecisionTree(config).fit(x, y, sample_weight)
