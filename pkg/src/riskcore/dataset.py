"""Labeled datasets, random splitting, undersampling and synthetic data."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateSplit,
    DimensionMismatch,
    InvalidConfig,
    MissingClass,
    TooFewSamples,
)
from .schema import FILL_IN, MULTI_CHOICE, SINGLE_CHOICE, QuestionnaireSchema

LABEL_COLUMN = "label"
SUSPECTED_COLUMN = "suspected"


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    factor_names: tuple[str, ...]
    suspected: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if x.ndim != 2:
            raise DimensionMismatch("features must be a 2-D matrix")
        if y.shape != (x.shape[0],):
            raise DimensionMismatch(f"{y.shape[0] if y.ndim else 0} labels for {x.shape[0]} rows")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        names = tuple(self.factor_names)
        if len(names) != x.shape[1]:
            raise DimensionMismatch(f"{len(names)} factor names for {x.shape[1]} columns")
        s = self.suspected
        if s is not None:
            s = np.asarray(s)
            if s.shape != y.shape:
                raise DimensionMismatch("suspected column length differs from labels")
            if not np.all((s == 0) | (s == 1)):
                raise DataError("suspected labels must be 0 or 1")
            s = s.astype(np.int64)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y.astype(np.int64))
        object.__setattr__(self, "factor_names", names)
        object.__setattr__(self, "suspected", s)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.labels.sum())
        return len(self) - pos, pos

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return LabeledDataset(
            self.features[rows],
            self.labels[rows],
            self.factor_names,
            None if self.suspected is None else self.suspected[rows],
        )

    def project(self, columns) -> "LabeledDataset":
        """Keep only ``columns`` (in the order given)."""
        columns = np.asarray(columns, dtype=np.int64)
        return LabeledDataset(
            self.features[:, columns],
            self.labels,
            tuple(self.factor_names[c] for c in columns),
            self.suspected,
        )

    def with_features(self, features) -> "LabeledDataset":
        return LabeledDataset(features, self.labels, self.factor_names, self.suspected)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidConfig("train_fraction must lie strictly between 0 and 1")


def split(data: LabeledDataset, cfg: SplitConfig) -> tuple[LabeledDataset, LabeledDataset]:
    """Random train/test partition; train gets floor(train_fraction * n) rows.

    With ``cfg.stratified`` each class is split separately by the same floor
    rule, so the train size may differ from the unstratified one by one row.
    """
    n = len(data)
    if n < 2:
        raise DegenerateSplit("need at least two rows to split")
    rng = np.random.default_rng(cfg.seed)
    if cfg.stratified:
        train_parts = []
        for cls in (0, 1):
            idx = np.flatnonzero(data.labels == cls)
            idx = idx[rng.permutation(idx.size)]
            train_parts.append(idx[: math.floor(cfg.train_fraction * idx.size)])
        train_idx = np.concatenate(train_parts)
    else:
        perm = rng.permutation(n)
        train_idx = perm[: math.floor(cfg.train_fraction * n)]
    mask = np.zeros(n, dtype=bool)
    mask[train_idx] = True
    if mask.all() or not mask.any():
        raise DegenerateSplit(f"split of {n} rows at {cfg.train_fraction} leaves one side empty")
    return data.subset(np.flatnonzero(mask)), data.subset(np.flatnonzero(~mask))


def undersample(train: LabeledDataset, seed: int) -> LabeledDataset:
    """Keep every minority-class row and an equal-size random draw of the majority."""
    pos = np.flatnonzero(train.labels == 1)
    neg = np.flatnonzero(train.labels == 0)
    if pos.size == 0 or neg.size == 0:
        raise MissingClass("undersampling needs both classes in the training set")
    rng = np.random.default_rng(seed)
    if neg.size >= pos.size:
        keep = np.concatenate([pos, rng.choice(neg, size=pos.size, replace=False)])
    else:
        keep = np.concatenate([neg, rng.choice(pos, size=neg.size, replace=False)])
    return train.subset(np.sort(keep))


def feature_stddev(data: LabeledDataset | np.ndarray) -> np.ndarray:
    x = data.features if isinstance(data, LabeledDataset) else np.asarray(data, dtype=float)
    if x.shape[0] < 2:
        raise TooFewSamples("sample standard deviation needs at least two rows")
    return x.std(axis=0, ddof=1)


# -- synthetic data -----------------------------------------------------------


@dataclass(frozen=True)
class SyntheticConfig:
    """Generator settings.

    Labels follow a logistic model on the informative dimensions after mapping
    each raw value onto [0, 1] by its question's natural range (fill-ins use
    ``fill_range``).  The suspected flag fires when the true log-odds plus
    Gaussian noise of scale ``suspected_noise`` exceeds ``suspected_threshold``.
    """

    schema: QuestionnaireSchema
    n_samples: int
    informative_dims: tuple[int, ...] = ()
    true_coefficients: tuple[float, ...] = ()
    intercept: float = 0.0
    seed: int = 0
    fill_range: tuple[float, float] = (0.0, 100.0)
    suspected_noise: float = 1.5
    suspected_threshold: float = 1.0

    def __post_init__(self):
        for name in ("informative_dims", "true_coefficients", "fill_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n_dims = self.schema.dimension
        if self.n_samples < 2:
            raise InvalidConfig("n_samples must be >= 2")
        if len(self.informative_dims) != len(self.true_coefficients):
            raise InvalidConfig("one true coefficient is needed per informative dimension")
        if len(set(self.informative_dims)) != len(self.informative_dims):
            raise InvalidConfig("informative dimensions must be distinct")
        if any(not 0 <= d < n_dims for d in self.informative_dims):
            raise InvalidConfig(f"informative dimensions must lie in [0, {n_dims})")
        lo, hi = self.fill_range
        if not hi > lo:
            raise InvalidConfig("fill_range must have high > low")
        if self.suspected_noise < 0:
            raise InvalidConfig("suspected_noise must be >= 0")


@dataclass(frozen=True)
class SyntheticTruth:
    informative_dims: tuple[int, ...]
    true_coefficients: tuple[float, ...]
    intercept: float
    seed: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "informative_dims": list(self.informative_dims),
            "true_coefficients": list(self.true_coefficients),
            "intercept": self.intercept,
            "seed": self.seed,
        }
        d.update(self.extra)
        return d


def synthetic_truth(cfg: SyntheticConfig) -> SyntheticTruth:
    return SyntheticTruth(
        cfg.informative_dims,
        cfg.true_coefficients,
        cfg.intercept,
        cfg.seed,
        {
            "suspected_noise": cfg.suspected_noise,
            "suspected_threshold": cfg.suspected_threshold,
            "fill_range": list(cfg.fill_range),
        },
    )


def true_logits(cfg: SyntheticConfig, features: np.ndarray) -> np.ndarray:
    """Planted log-odds for raw (unscaled) feature rows."""
    lo, hi = cfg.schema.natural_bounds(cfg.fill_range)
    dims = np.asarray(cfg.informative_dims, dtype=np.int64)
    if dims.size == 0:
        return np.full(features.shape[0], float(cfg.intercept))
    z = (features[:, dims] - lo[dims]) / (hi[dims] - lo[dims])
    return cfg.intercept + z @ np.asarray(cfg.true_coefficients, dtype=float)


def _sample_raw(cfg: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    n = cfg.n_samples
    cols = []
    for q in cfg.schema.questions:
        if q.kind == SINGLE_CHOICE:
            cols.append(rng.integers(0, q.option_count, size=(n, 1)).astype(float))
        elif q.kind == MULTI_CHOICE:
            cols.append(rng.integers(0, 2, size=(n, q.option_count)).astype(float))
        elif q.kind == FILL_IN:
            lo, hi = cfg.fill_range
            cols.append(np.round(rng.uniform(lo, hi, size=(n, 1)), 1))
    if not cols:
        return np.zeros((n, 0))
    return np.hstack(cols)


def generate_synthetic(cfg: SyntheticConfig) -> LabeledDataset:
    rng = np.random.default_rng(cfg.seed)
    raw = _sample_raw(cfg, rng)
    logits = true_logits(cfg, raw)
    labels = (rng.random(cfg.n_samples) < 1.0 / (1.0 + np.exp(-logits))).astype(np.int64)
    noisy = logits + cfg.suspected_noise * rng.standard_normal(cfg.n_samples)
    suspected = (noisy > cfg.suspected_threshold).astype(np.int64)
    return LabeledDataset(raw, labels, tuple(cfg.schema.factor_names), suspected)


def planted_config(
    schema: QuestionnaireSchema | None = None,
    n_samples: int = 4000,
    seed: int = 0,
    n_informative: int = 9,
    strength: float = 6.0,
    prevalence_shift: float = -4.0,
) -> SyntheticConfig:
    """A ready-made planted-truth configuration.

    ``n_informative`` dimensions are picked at random (by ``seed``) and given
    coefficients of magnitude ``strength`` with random signs.  The intercept
    centres the log-odds and then adds ``prevalence_shift``.  The suspected
    flag is tuned to miss most cases while rarely firing on negatives.
    """
    from .schema import reference_schema

    schema = schema or reference_schema()
    rng = np.random.default_rng([seed, 7919])
    dims = np.sort(rng.choice(schema.dimension, size=n_informative, replace=False))
    signs = rng.choice([-1.0, 1.0], size=n_informative)
    coefs = strength * signs
    intercept = -0.5 * float(coefs.sum()) + prevalence_shift
    return SyntheticConfig(
        schema=schema,
        n_samples=n_samples,
        informative_dims=tuple(int(d) for d in dims),
        true_coefficients=tuple(float(c) for c in coefs),
        intercept=intercept,
        seed=seed,
        suspected_noise=2.0 * strength,
        suspected_threshold=5.0 * strength / 3.0,
    )


# -- file formats ---------------------------------------------------------------


def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def write_csv(data: LabeledDataset, path: str | Path) -> None:
    header = list(data.factor_names) + [LABEL_COLUMN]
    if data.suspected is not None:
        header.append(SUSPECTED_COLUMN)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(data)):
            row = [_fmt(v) for v in data.features[i]] + [str(int(data.labels[i]))]
            if data.suspected is not None:
                row.append(str(int(data.suspected[i])))
            w.writerow(row)


def read_csv(path: str | Path, factor_names: Sequence[str] | None = None) -> LabeledDataset:
    """Read a dataset CSV.  ``factor_names``, if given, must match the header."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if LABEL_COLUMN not in header:
        raise DataError(f"{path}: no {LABEL_COLUMN!r} column")
    label_col = header.index(LABEL_COLUMN)
    susp_col = header.index(SUSPECTED_COLUMN) if SUSPECTED_COLUMN in header else None
    feat_cols = [i for i, h in enumerate(header) if i not in (label_col, susp_col)]
    names = tuple(header[i] for i in feat_cols)
    if factor_names is not None and tuple(factor_names) != names:
        raise DataError(f"{path}: header does not match schema factor names")
    try:
        table = np.array([[float(v) for v in r] for r in body if r], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell ({exc})") from None
    if table.size == 0:
        raise DataError(f"{path}: no data rows")
    if table.ndim != 2 or table.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    if not np.all(np.isfinite(table)):
        raise DataError(f"{path}: non-finite values")
    return LabeledDataset(
        table[:, feat_cols],
        table[:, label_col],
        names,
        None if susp_col is None else table[:, susp_col],
    )


def write_truth(truth: SyntheticTruth, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
