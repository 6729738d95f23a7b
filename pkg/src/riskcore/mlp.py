"""Feed-forward binary classifier trained with Adam and early stopping.

Layout: ReLU hidden layers, one sigmoid output unit.  Weight matrix ``l`` has
shape ``(layer_sizes[l], layer_sizes[l + 1])`` so the first matrix is indexed
``[risk factor, hidden unit]``.

The training objective is mean binary cross-entropy plus ``l2_hidden`` times
the sum of squared weights feeding each hidden layer (every weight matrix but
the output one).  Biases are never penalised.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyBatch, InvalidConfig, NonFiniteValue, TooFewSamples

log = logging.getLogger(__name__)

PROB_CLIP = 1e-12


@dataclass(frozen=True)
class MlpConfig:
    layer_sizes: tuple[int, ...] = (84, 8, 8, 1)
    l2_hidden: float = 0.02
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    validation_fraction: float = 0.2
    patience: int = 10
    max_epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 3 or self.layer_sizes[-1] != 1:
            raise InvalidConfig("layer_sizes needs >= 3 entries and a single output unit")
        if any(s < 1 for s in self.layer_sizes):
            raise InvalidConfig("layer sizes must be positive")
        if self.l2_hidden < 0:
            raise InvalidConfig("l2_hidden must be >= 0")
        for name in ("learning_rate", "epsilon", "batch_size", "patience", "max_epochs"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise InvalidConfig("Adam betas must lie in (0, 1)")
        if not 0 < self.validation_fraction < 1:
            raise InvalidConfig("validation_fraction must lie in (0, 1)")

    def with_input_size(self, n: int) -> "MlpConfig":
        return MlpConfig(**{**asdict(self), "layer_sizes": (n,) + self.layer_sizes[1:]})


def _shapes(layer_sizes):
    return [(a, b) for a, b in zip(layer_sizes[:-1], layer_sizes[1:])]


class MlpModel:
    """Parameters live in one flat vector; ``weights``/``biases`` are views into it."""

    def __init__(self, config: MlpConfig, params: np.ndarray | None = None):
        self.config = config
        shapes = _shapes(config.layer_sizes)
        size = sum(a * b + b for a, b in shapes)
        self.params = np.zeros(size) if params is None else np.array(params, dtype=float)
        if self.params.shape != (size,):
            raise DimensionMismatch(f"expected {size} parameters, got {self.params.shape}")
        self.weights, self.biases = _views(self.params, shapes)
        self.history: dict[str, list[float]] = {"train_loss": [], "val_loss": []}
        self.best_epoch: int | None = None
        self.stopped_epoch: int | None = None

    @property
    def input_size(self) -> int:
        return self.config.layer_sizes[0]

    def copy(self) -> "MlpModel":
        other = MlpModel(self.config, self.params)
        other.history = {k: list(v) for k, v in self.history.items()}
        other.best_epoch, other.stopped_epoch = self.best_epoch, self.stopped_epoch
        return other

    def predict_proba(self, x) -> np.ndarray:
        return forward(self, x)

    def predict(self, x) -> np.ndarray:
        return (self.predict_proba(x) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.config.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "config": asdict(self.config),
            "history": self.history,
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        cfg = dict(d["config"])
        cfg["layer_sizes"] = tuple(d["layer_sizes"])
        model = cls(MlpConfig(**cfg))
        for dst, src in zip(model.weights, d["weights"]):
            dst[...] = np.asarray(src, dtype=float)
        for dst, src in zip(model.biases, d["biases"]):
            dst[...] = np.asarray(src, dtype=float)
        model.history = {k: list(v) for k, v in d.get("history", {}).items()}
        model.best_epoch = d.get("best_epoch")
        model.stopped_epoch = d.get("stopped_epoch")
        return model

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "MlpModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _views(flat, shapes):
    weights, biases, pos = [], [], 0
    for a, b in shapes:
        weights.append(flat[pos : pos + a * b].reshape(a, b))
        pos += a * b
        biases.append(flat[pos : pos + b])
        pos += b
    return weights, biases


def init(config: MlpConfig, rng: np.random.Generator | None = None) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    model = MlpModel(config)
    for w in model.weights:
        fan_in, fan_out = w.shape
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        w[...] = rng.uniform(-limit, limit, size=w.shape)
    return model


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_input(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != model.input_size:
        raise DimensionMismatch(f"input has shape {x.shape}, model expects {model.input_size} features")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("input contains NaN or infinity")
    return x


def _forward_all(model: MlpModel, x2d: np.ndarray):
    """Pre-activations and activations for every layer (batch form)."""
    acts, pres = [x2d], []
    a = x2d
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        pres.append(z)
        a = sigmoid(z) if l == last else np.maximum(z, 0.0)
        acts.append(a)
    return pres, acts


def forward(model: MlpModel, x, return_activations: bool = False):
    """Probability of the positive class for one vector or a batch of rows.

    With ``return_activations`` the per-layer activations (input, hidden
    layers, output) are returned as well.
    """
    x = _check_input(model, x)
    single = x.ndim == 1
    _, acts = _forward_all(model, x[None, :] if single else x)
    prob = acts[-1][:, 0]
    if single:
        prob = prob[0]
        acts = [a[0] for a in acts]
    if return_activations:
        return prob, acts
    return prob


def l2_penalty(model: MlpModel) -> float:
    return model.config.l2_hidden * sum(float(np.sum(w * w)) for w in model.weights[:-1])


def _bce(p, y):
    pc = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))


def loss(model: MlpModel, x, y) -> float:
    x = _check_input(model, x)
    x = np.atleast_2d(x)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape[0] == 0:
        raise EmptyBatch("loss of an empty batch")
    if y.shape[0] != x.shape[0]:
        raise DimensionMismatch("labels and rows differ in count")
    p = _forward_all(model, x)[1][-1][:, 0]
    return float(np.mean(_bce(p, y))) + l2_penalty(model)


def gradient(model: MlpModel, x, y, out: np.ndarray | None = None) -> np.ndarray:
    """Gradient of :func:`loss` as a flat vector aligned with ``model.params``.

    ReLU uses derivative 0 at exactly 0; samples whose probability is clipped
    contribute no gradient, matching the clipped loss.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    n = x.shape[0]
    if n == 0:
        raise EmptyBatch("gradient of an empty batch")
    pres, acts = _forward_all(model, x)
    grad = np.zeros_like(model.params) if out is None else out
    gw, gb = _views(grad, _shapes(model.config.layer_sizes))
    p = acts[-1][:, 0]
    inside = (p > PROB_CLIP) & (p < 1.0 - PROB_CLIP)
    delta = (np.where(inside, p - y, 0.0) / n)[:, None]
    l2 = model.config.l2_hidden
    last = len(model.weights) - 1
    for l in range(last, -1, -1):
        np.matmul(acts[l].T, delta, out=gw[l])
        if l < last:
            gw[l] += 2.0 * l2 * model.weights[l]
        gb[l][...] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (pres[l - 1] > 0)
    return grad


class Adam:
    """Bias-corrected Adam without AMSGrad, operating on one flat vector."""

    def __init__(self, size: int, lr=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr, self.beta1, self.beta2, self.epsilon = lr, beta1, beta2, epsilon
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        self.m *= b1
        self.m += (1.0 - b1) * grad
        self.v *= b2
        self.v += (1.0 - b2) * grad * grad
        m_hat = self.m / (1.0 - b1**self.t)
        v_hat = self.v / (1.0 - b2**self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


class EarlyStopping:
    """Tracks the best monitored value; ``update`` returns True when training should stop."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch: int | None = None
        self.wait = 0

    def update(self, epoch: int, value: float) -> bool:
        if value < self.best:
            self.best, self.best_epoch, self.wait = value, epoch, 0
            return False
        self.wait += 1
        return self.wait >= self.patience


def train(x, y, config: MlpConfig) -> MlpModel:
    """Fit a network on an (ideally balanced) training set.

    A validation subset of ``validation_fraction`` is drawn once up front.
    History index 0 holds the losses of the untrained network; the returned
    model carries the weights of the epoch with the lowest validation loss.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.ndim != 2 or x.shape[1] != config.layer_sizes[0]:
        raise DimensionMismatch(f"training matrix {x.shape} does not fit {config.layer_sizes}")
    if y.shape[0] != x.shape[0]:
        raise DimensionMismatch("labels and rows differ in count")
    if min(np.sum(y == 1), np.sum(y == 0)) < 2:
        raise TooFewSamples("training needs at least two samples of each class")

    rng = np.random.default_rng(config.seed)
    model = init(config, rng)
    n = x.shape[0]
    n_val = min(max(1, math.floor(config.validation_fraction * n)), n - 1)
    perm = rng.permutation(n)
    val_idx, fit_idx = np.sort(perm[:n_val]), np.sort(perm[n_val:])
    x_fit, y_fit, x_val, y_val = x[fit_idx], y[fit_idx], x[val_idx], y[val_idx]

    opt = Adam(model.params.size, config.learning_rate, config.beta1, config.beta2, config.epsilon)
    stopper = EarlyStopping(config.patience)
    grad = np.zeros_like(model.params)
    best_params = model.params.copy()
    model.history["train_loss"].append(loss(model, x_fit, y_fit))
    model.history["val_loss"].append(loss(model, x_val, y_val))
    bs = config.batch_size
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(x_fit.shape[0])
        for start in range(0, order.size, bs):
            batch = order[start : start + bs]
            gradient(model, x_fit[batch], y_fit[batch], out=grad)
            opt.step(model.params, grad)
        train_loss = loss(model, x_fit, y_fit)
        val_loss = loss(model, x_val, y_val)
        model.history["train_loss"].append(train_loss)
        model.history["val_loss"].append(val_loss)
        if not math.isfinite(train_loss):
            log.warning("training diverged at epoch %d", epoch)
            break
        stop = stopper.update(epoch, val_loss)
        if stopper.best_epoch == epoch:
            best_params[...] = model.params
        if stop:
            break
    model.params[...] = best_params
    model.best_epoch = stopper.best_epoch
    model.stopped_epoch = epoch
    log.debug("mlp stopped at epoch %d, best %s", epoch, model.best_epoch)
    return model


def first_layer_weights(model: MlpModel) -> np.ndarray:
    """Input-to-first-hidden weights, one row per risk factor."""
    return model.weights[0].copy()
