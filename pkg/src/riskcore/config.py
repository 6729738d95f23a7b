"""Experiment configuration: one JSON file, overridable from the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .classic import BoostConfig, LrConfig, SvmConfig, TreeConfig
from .dataset import (
    LabeledDataset,
    SyntheticConfig,
    generate_synthetic,
    planted_config,
    read_csv,
)
from .errors import ConfigError, InvalidConfig
from .importance import DEFAULT_FRACTIONS
from .mlp import MlpConfig
from .protocol import ALL_MODELS, ProtocolConfig
from .schema import QuestionnaireSchema, load_schema, reference_schema

DEFAULT_MODELS = ALL_MODELS

_PROTOCOL_KEYS = {
    "train_fraction",
    "stratified",
    "scaling_orientation",
    "test_scaling",
    "auc_models",
    "lr_importance_mode",
    "ablation_ranking",
}
_HYPER_TYPES = {
    "dnn": MlpConfig,
    "lr": LrConfig,
    "svm": SvmConfig,
    "dt": TreeConfig,
    "adaboost": BoostConfig,
}


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    synthetic: dict | None = None
    schema: str | None = None
    models: list[str] = field(default_factory=lambda: list(DEFAULT_MODELS))
    repeats: int = 10
    seed: int = 0
    out: str = "results"
    fractions: list[float] = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    protocol: dict = field(default_factory=dict)
    hyperparameters: dict = field(default_factory=dict)
    pca_repeat: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def validate(self) -> None:
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not self.models:
            raise ConfigError("select at least one model")
        bad = set(self.models) - set(ALL_MODELS)
        if bad:
            raise ConfigError(f"unknown models {sorted(bad)}; choose from {list(ALL_MODELS)}")
        bad = set(self.protocol) - _PROTOCOL_KEYS
        if bad:
            raise ConfigError(f"unknown protocol keys: {sorted(bad)}")
        bad = set(self.hyperparameters) - set(_HYPER_TYPES) - {"knn"}
        if bad:
            raise ConfigError(f"unknown hyperparameter sections: {sorted(bad)}")
        if any(not 0 < f <= 1 for f in self.fractions):
            raise ConfigError("fractions must lie in (0, 1]")
        if self.dataset is None and self.synthetic is None:
            raise ConfigError("config needs either 'dataset' or 'synthetic'")

    # -- resolution --------------------------------------------------------------------

    def load_schema(self) -> QuestionnaireSchema:
        if self.schema is None:
            return reference_schema()
        try:
            return load_schema(self.schema)
        except OSError as exc:
            raise ConfigError(f"cannot read schema {self.schema}: {exc}") from None

    def synthetic_config(self) -> SyntheticConfig:
        if self.synthetic is None:
            raise ConfigError("config has no 'synthetic' section")
        s = dict(self.synthetic)
        s.pop("output", None)
        schema = self.load_schema()
        try:
            if "informative_dims" in s:
                return SyntheticConfig(schema=schema, **s)
            extra = {k: s.pop(k) for k in ("fill_range", "suspected_noise", "suspected_threshold")
                     if k in s}
            base = planted_config(schema, **s)
            return replace(base, **extra)
        except TypeError as exc:
            raise ConfigError(f"bad synthetic section: {exc}") from None

    def load_data(self) -> LabeledDataset:
        if self.dataset is not None:
            names = None
            if self.schema is not None:
                names = self.load_schema().factor_names
            return read_csv(self.dataset, names)
        return generate_synthetic(self.synthetic_config())

    def protocol_config(self) -> ProtocolConfig:
        hp = self.hyperparameters
        kwargs: dict[str, Any] = dict(self.protocol)
        try:
            for section, key in (("dnn", "mlp"), ("lr", "lr"), ("svm", "svm"), ("dt", "tree"),
                                 ("adaboost", "boost")):
                if section in hp:
                    kwargs[key] = _HYPER_TYPES[section](**hp[section])
            if "knn" in hp:
                kwargs["knn_k"] = int(hp["knn"].get("k", 5))
            return ProtocolConfig(repeats=self.repeats, base_seed=self.seed, **kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad hyperparameters: {exc}") from None


def load_config(path: str | Path | None, overrides: dict) -> ExperimentConfig:
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, InvalidConfig) as exc:
        raise ConfigError(str(exc)) from None
