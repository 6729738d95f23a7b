"""Repeated train/test protocol shared by the CLI verbs.

One repeat ``r``: random split -> undersample the training part -> scale the
balanced training set and the test set -> fit each model -> evaluate on the
(unbalanced) test set.  Seeds are ``base + r`` for the split,
``base + 10_000 + r`` for undersampling and ``base + 20_000 + r`` for model
randomness, so the three streams never collide.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .classic import (
    AdaBoost,
    BoostConfig,
    DecisionTree,
    KNearestNeighbors,
    LogisticRegression,
    LrConfig,
    SvmConfig,
    TreeConfig,
    svm_fit,
)
from .dataset import LabeledDataset, SplitConfig, feature_stddev, split, undersample
from .errors import InvalidConfig
from .importance import (
    DEFAULT_FRACTIONS,
    ContributionRanking,
    dnn_contributions,
    lr_contributions,
    mean_ranking,
    select_top_fraction,
    top_count,
)
from .metrics import AggregateReport, RunMetrics, aggregate, evaluate, evaluate_baseline
from .mlp import MlpConfig, MlpModel
from .mlp import train as train_mlp
from .schema import ScalingParams, apply_scaling, fit_scaling

log = logging.getLogger(__name__)

MODEL_NAMES = ("lr", "knn", "svm", "dt", "adaboost", "dnn")
ALL_MODELS = ("baseline",) + MODEL_NAMES
DISPLAY_NAMES = {
    "baseline": "Baseline",
    "lr": "Logistic Regression",
    "knn": "KNN",
    "svm": "Support Vector Machines",
    "dt": "Decision Tree",
    "adaboost": "AdaBoost",
    "dnn": "Deep Neural Networks",
}

UNDERSAMPLE_OFFSET = 10_000
MODEL_OFFSET = 20_000


@dataclass(frozen=True)
class RepeatSeeds:
    split: int
    undersample: int
    model: int

    @classmethod
    def for_repeat(cls, base: int, r: int) -> "RepeatSeeds":
        return cls(base + r, base + UNDERSAMPLE_OFFSET + r, base + MODEL_OFFSET + r)


@dataclass(frozen=True)
class ProtocolConfig:
    repeats: int = 10
    base_seed: int = 0
    train_fraction: float = 0.8
    stratified: bool = False
    scaling_orientation: str = "paper"
    test_scaling: str = "independent"
    auc_models: tuple[str, ...] = ("lr", "svm", "dnn")
    mlp: MlpConfig = field(default_factory=MlpConfig)
    lr: LrConfig = field(default_factory=LrConfig)
    knn_k: int = 5
    svm: SvmConfig = field(default_factory=SvmConfig)
    tree: TreeConfig = field(default_factory=TreeConfig)
    boost: BoostConfig = field(default_factory=BoostConfig)
    lr_importance_mode: str = "coef"
    ablation_ranking: str = "per_repeat"

    def __post_init__(self):
        object.__setattr__(self, "auc_models", tuple(self.auc_models))
        if self.repeats < 1:
            raise InvalidConfig("repeats must be >= 1")
        if self.test_scaling not in ("independent", "leakage_safe"):
            raise InvalidConfig("test_scaling must be 'independent' or 'leakage_safe'")
        if self.ablation_ranking not in ("per_repeat", "averaged"):
            raise InvalidConfig("ablation_ranking must be 'per_repeat' or 'averaged'")
        unknown = set(self.auc_models) - set(MODEL_NAMES)
        if unknown:
            raise InvalidConfig(f"unknown models in auc_models: {sorted(unknown)}")


@dataclass
class RepeatData:
    index: int
    seeds: RepeatSeeds
    train: LabeledDataset  # balanced and scaled
    test: LabeledDataset  # scaled
    sigma: np.ndarray
    train_scaling: ScalingParams
    test_scaling: ScalingParams

    @property
    def constant_columns(self) -> list[int]:
        return np.flatnonzero(self.train_scaling.constant).tolist()

    def project(self, columns) -> "RepeatData":
        cols = np.asarray(columns, dtype=np.int64)
        return RepeatData(
            self.index,
            self.seeds,
            self.train.project(cols),
            self.test.project(cols),
            self.sigma[cols],
            self.train_scaling,
            self.test_scaling,
        )


def prepare_repeat(data: LabeledDataset, cfg: ProtocolConfig, r: int) -> RepeatData:
    seeds = RepeatSeeds.for_repeat(cfg.base_seed, r)
    train, test = split(data, SplitConfig(cfg.train_fraction, seeds.split, cfg.stratified))
    balanced = undersample(train, seeds.undersample)
    p_train = fit_scaling(balanced.features, cfg.scaling_orientation)
    if cfg.test_scaling == "independent":
        p_test = fit_scaling(test.features, cfg.scaling_orientation)
    else:
        p_test = p_train
    x_train = apply_scaling(p_train, balanced.features)
    x_test = apply_scaling(p_test, test.features)
    return RepeatData(
        r,
        seeds,
        balanced.with_features(x_train),
        test.with_features(x_test),
        feature_stddev(x_train),
        p_train,
        p_test,
    )


def fit_model(name: str, x, y, cfg: ProtocolConfig, seed: int):
    """Train one model family; the result exposes ``predict_proba``."""
    if name == "dnn":
        mcfg = replace(cfg.mlp.with_input_size(x.shape[1]), seed=seed)
        return train_mlp(x, y, mcfg)
    if name == "lr":
        return LogisticRegression(cfg.lr).fit(x, y)
    if name == "knn":
        return KNearestNeighbors(cfg.knn_k).fit(x, y)
    if name == "svm":
        return svm_fit(x, y, replace(cfg.svm, seed=seed))
    if name == "dt":
        return DecisionTree(cfg.tree).fit(x, y)
    if name == "adaboost":
        return AdaBoost(cfg.boost).fit(x, y)
    raise InvalidConfig(f"unknown model {name!r}")


def evaluate_model(name: str, model, test: LabeledDataset, cfg: ProtocolConfig) -> RunMetrics:
    scores = model.predict_proba(test.features)
    return evaluate(test.labels, scores, with_auc=name in cfg.auc_models)


@dataclass
class ProtocolResult:
    models: tuple[str, ...]
    runs: dict[str, list[RunMetrics]]
    baseline: RunMetrics | None
    seeds: list[RepeatSeeds]
    sigmas: list[np.ndarray]
    trained: dict[str, list] = field(default_factory=dict)
    constant_columns: list[list[int]] = field(default_factory=list)
    factor_names: tuple[str, ...] = ()

    def aggregate(self, model: str) -> AggregateReport:
        if model == "baseline":
            return aggregate([self.baseline])
        return aggregate(self.runs[model])


def run_protocol(data: LabeledDataset, cfg: ProtocolConfig, models: Sequence[str],
                 keep: Sequence[str] = ("dnn", "lr")) -> ProtocolResult:
    """Repeat the protocol ``cfg.repeats`` times for every model in ``models``.

    ``baseline`` evaluates the suspected flag once against the diagnosis
    labels of the full dataset.  Fitted models listed in ``keep`` are
    returned for importance analysis.
    """
    models = tuple(models)
    unknown = set(models) - set(ALL_MODELS)
    if unknown:
        raise InvalidConfig(f"unknown models: {sorted(unknown)}")
    if not models:
        raise InvalidConfig("select at least one model")
    trainable = [m for m in MODEL_NAMES if m in models]
    baseline = evaluate_baseline(data.labels, data.suspected) if "baseline" in models else None
    runs: dict[str, list[RunMetrics]] = {m: [] for m in trainable}
    trained: dict[str, list] = {m: [] for m in trainable if m in keep}
    seeds, sigmas, constants = [], [], []
    for r in range(cfg.repeats):
        rd = prepare_repeat(data, cfg, r)
        seeds.append(rd.seeds)
        sigmas.append(rd.sigma)
        constants.append(rd.constant_columns)
        for name in trainable:
            model = fit_model(name, rd.train.features, rd.train.labels, cfg, rd.seeds.model)
            runs[name].append(evaluate_model(name, model, rd.test, cfg))
            if name in trained:
                trained[name].append(model)
            log.info("repeat %d %s done", r, name)
    return ProtocolResult(models, runs, baseline, seeds, sigmas, trained, constants,
                          data.factor_names)


# -- importance -------------------------------------------------------------------------


def dnn_rankings(models: Sequence[MlpModel], sigmas, names) -> list[ContributionRanking]:
    return [dnn_contributions(m, s, names) for m, s in zip(models, sigmas)]


def lr_rankings(models: Sequence[LogisticRegression], sigmas, names, mode="coef"
                ) -> list[ContributionRanking]:
    return [lr_contributions(m, s, mode, names) for m, s in zip(models, sigmas)]


# -- ablation -------------------------------------------------------------------------------


@dataclass
class FractionResult:
    fraction: float
    k: int
    selected: list[np.ndarray]
    runs: list[RunMetrics]

    @property
    def report(self) -> AggregateReport:
        return aggregate(self.runs)


@dataclass
class AblationResult:
    fractions: list[FractionResult]
    rankings: list[ContributionRanking]
    ranking_mode: str

    def by_fraction(self, fraction: float) -> FractionResult:
        for fr in self.fractions:
            if abs(fr.fraction - fraction) < 1e-12:
                return fr
        raise KeyError(fraction)


def run_ablation(data: LabeledDataset, cfg: ProtocolConfig,
                 fractions: Sequence[float] = DEFAULT_FRACTIONS) -> AblationResult:
    """Retrain the network on the top-ranked factors for each fraction.

    Every repeat ranks factors with the network trained on all of them in
    that repeat (or, with ``ablation_ranking='averaged'``, with the mean
    score over all repeats).  Selected columns keep their original order and
    every retraining uses the repeat's model seed, so fraction 1.0
    reproduces the full-factor run exactly.
    """
    fractions = sorted({float(f) for f in fractions} | {1.0})
    for f in fractions:
        top_count(f, data.dimension)
    prepared = [prepare_repeat(data, cfg, r) for r in range(cfg.repeats)]
    full_models = [fit_model("dnn", rd.train.features, rd.train.labels, cfg, rd.seeds.model)
                   for rd in prepared]
    rankings = [dnn_contributions(m, rd.sigma, data.factor_names)
                for m, rd in zip(full_models, prepared)]
    if cfg.ablation_ranking == "averaged":
        shared, _ = mean_ranking(rankings)
        per_repeat = [shared] * len(prepared)
    else:
        per_repeat = rankings
    results = []
    for f in fractions:
        selected, runs = [], []
        for rd, model, ranking in zip(prepared, full_models, per_repeat):
            cols = np.sort(select_top_fraction(ranking, f))
            selected.append(cols)
            if cols.size == data.dimension:
                fitted, sub = model, rd
            else:
                sub = rd.project(cols)
                fitted = fit_model("dnn", sub.train.features, sub.train.labels, cfg, rd.seeds.model)
            runs.append(evaluate_model("dnn", fitted, sub.test, cfg))
        results.append(FractionResult(f, int(selected[0].size), selected, runs))
        log.info("ablation fraction %.2f done", f)
    return AblationResult(results, rankings, cfg.ablation_ranking)
