"""Confusion-matrix rates, ROC/AUC, run aggregation and significance tests."""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSamples,
    LengthMismatch,
    MissingClass,
    MissingSuspectedColumn,
    NonBinary,
    NonFiniteValue,
)

RATE_METRICS = ("sensitivity", "fpr", "specificity", "fnr", "precision", "f1", "accuracy")
ALL_METRICS = RATE_METRICS + ("auc",)

# Column header -> metric, in printed order.
TABLE_COLUMNS = (
    ("Sensitivity", "sensitivity"),
    ("FPR", "fpr"),
    ("Specificity", "specificity"),
    ("FNR", "fnr"),
    ("Accuracy", "accuracy"),
    ("AUC", "auc"),
)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class RunMetrics:
    """Rates of one evaluation.  ``None`` marks a 0/0 ratio (see ``undefined``)."""

    sensitivity: float | None
    fpr: float | None
    specificity: float | None
    fnr: float | None
    precision: float | None
    f1: float | None
    accuracy: float
    auc: float | None = None
    roc_points: list[tuple[float, float]] = field(default_factory=list)
    counts: ConfusionCounts | None = None

    @property
    def undefined(self) -> list[str]:
        return [m for m in RATE_METRICS if getattr(self, m) is None]

    def to_dict(self) -> dict:
        d = {m: getattr(self, m) for m in ALL_METRICS}
        d["undefined"] = self.undefined
        if self.counts is not None:
            d["counts"] = asdict(self.counts)
        d["roc_points"] = [list(p) for p in self.roc_points]
        return d


def _binary(values, name) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be one-dimensional")
    if not np.all((arr == 0) | (arr == 1)):
        raise NonBinary(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def confusion(labels, predictions) -> ConfusionCounts:
    y = _binary(labels, "labels")
    p = _binary(predictions, "predictions")
    if y.shape != p.shape:
        raise LengthMismatch(f"{y.size} labels vs {p.size} predictions")
    if y.size == 0:
        raise LengthMismatch("nothing to evaluate")
    return ConfusionCounts(
        tp=int(np.sum((y == 1) & (p == 1))),
        fp=int(np.sum((y == 0) & (p == 1))),
        tn=int(np.sum((y == 0) & (p == 0))),
        fn=int(np.sum((y == 1) & (p == 0))),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def derive(counts: ConfusionCounts) -> RunMetrics:
    c = counts
    sens = _ratio(c.tp, c.tp + c.fn)
    prec = _ratio(c.tp, c.tp + c.fp)
    if sens is None or prec is None or sens + prec == 0:
        f1 = None
    else:
        f1 = 2 * prec * sens / (prec + sens)
    return RunMetrics(
        sensitivity=sens,
        fpr=_ratio(c.fp, c.fp + c.tn),
        specificity=_ratio(c.tn, c.fp + c.tn),
        fnr=_ratio(c.fn, c.tp + c.fn),
        precision=prec,
        f1=f1,
        accuracy=(c.tp + c.tn) / c.total,
        counts=c,
    )


def roc_curve(labels, scores) -> tuple[np.ndarray, np.ndarray]:
    """Integer (false positive, true positive) counts at each distinct threshold.

    Thresholds sweep the unique scores from high to low; the first point is
    (0, 0) and the last is (N, P).
    """
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=float)
    if s.shape != y.shape:
        raise LengthMismatch(f"{y.size} labels vs {s.size} scores")
    if not np.all(np.isfinite(s)):
        raise NonFiniteValue("scores must be finite")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise MissingClass("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), y.size - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    return np.r_[0, fp], np.r_[0, tp]


def auc(labels, scores) -> tuple[float, list[tuple[float, float]]]:
    """Trapezoid area under the ROC curve plus the normalised ROC points."""
    fp, tp = roc_curve(labels, scores)
    n_neg, n_pos = int(fp[-1]), int(tp[-1])
    # twice the area in count units stays an exact integer
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    area = twice_area / (2.0 * n_pos * n_neg)
    points = [(f / n_neg, t / n_pos) for f, t in zip(fp.tolist(), tp.tolist())]
    return area, points


def evaluate(labels, scores, with_auc: bool = True, threshold: float = 0.5) -> RunMetrics:
    """Metrics for scores thresholded at ``threshold``, optionally with AUC."""
    scores = np.asarray(scores, dtype=float)
    metrics = derive(confusion(labels, (scores >= threshold).astype(np.int64)))
    if with_auc:
        metrics.auc, metrics.roc_points = auc(labels, scores)
    return metrics


def evaluate_baseline(labels, suspected) -> RunMetrics:
    """Metrics of the expert suspected flag used directly as the prediction."""
    if suspected is None:
        raise MissingSuspectedColumn("dataset has no suspected column")
    return derive(confusion(labels, suspected))


# -- aggregation ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSummary:
    mean: float | None
    std: float | None
    n_runs: int
    n_undefined: int = 0


@dataclass
class AggregateReport:
    summaries: dict[str, MetricSummary]
    run_count: int

    def __getitem__(self, metric: str) -> MetricSummary:
        return self.summaries[metric]

    def to_dict(self) -> dict:
        return {
            "run_count": self.run_count,
            "metrics": {k: asdict(v) for k, v in self.summaries.items()},
        }


def summarize(values: Sequence[float | None]) -> MetricSummary:
    defined = [v for v in values if v is not None]
    n_undef = len(values) - len(defined)
    if not defined:
        return MetricSummary(None, None, 0, n_undef)
    # statistics works in exact arithmetic, so equal runs give std exactly 0
    defined = [float(v) for v in defined]
    std = statistics.stdev(defined) if len(defined) >= 2 else None
    return MetricSummary(statistics.fmean(defined), std, len(defined), n_undef)


def aggregate(runs: Sequence[RunMetrics]) -> AggregateReport:
    """Mean and sample standard deviation of every metric across runs.

    Runs where a metric is undefined are left out of that metric's summary
    and counted in ``n_undefined``.
    """
    if not runs:
        raise ValueError("aggregate needs at least one run")
    return AggregateReport(
        {m: summarize([getattr(r, m) for r in runs]) for m in ALL_METRICS},
        len(runs),
    )


# -- Welch's t-test -----------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularised incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with (possibly fractional) ``df``."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0:
        return 1.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float


def welch_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise DegenerateSamples("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va == 0 and vb == 0:
        raise DegenerateSamples("both samples have zero variance")
    diff = a.mean() - b.mean()
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return WelchResult(float(t), float(df), t_two_sided_p(float(t), float(df)))


def compare_runs(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Welch t-test p-value."""
    return welch_test(a, b).p_value


def pvalue_matrix(per_model: dict[str, Sequence[float | None]]) -> dict[str, dict[str, float | None]]:
    """Pairwise Welch p-values; the diagonal is 1 and undefined pairs are None."""
    names = list(per_model)
    out: dict[str, dict[str, float | None]] = {n: {} for n in names}
    for i, a in enumerate(names):
        out[a][a] = 1.0
        for b in names[i + 1 :]:
            va = [v for v in per_model[a] if v is not None]
            vb = [v for v in per_model[b] if v is not None]
            try:
                p = compare_runs(va, vb)
            except DegenerateSamples:
                p = None
            out[a][b] = out[b][a] = p
    return out


# -- table rendering ------------------------------------------------------------------


def format_cell(summary: MetricSummary, metric: str) -> str:
    """``mean (std)``: percentages with 2 decimals, AUC as a fraction with 3."""
    if summary.mean is None:
        return "None"
    if metric == "auc":
        scale, digits = 1.0, 3
    else:
        scale, digits = 100.0, 2
    text = f"{summary.mean * scale:.{digits}f}"
    if summary.std is not None:
        text += f" ({summary.std * scale:.{digits}f})"
    return text


def table_row(report: AggregateReport) -> list[str]:
    return [format_cell(report[m], m) for _, m in TABLE_COLUMNS]


def metric_values(runs: Iterable[RunMetrics], metric: str) -> list[float | None]:
    if metric not in {f.name for f in fields(RunMetrics)}:
        raise KeyError(metric)
    return [getattr(r, metric) for r in runs]
