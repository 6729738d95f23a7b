"""Questionnaire schemas, response encoding and min-max scaling.

A schema is an ordered list of questions.  Each question contributes a fixed
number of dimensions to the risk vector:

* single choice -> 1 (the selected option index, starting at 0)
* multi choice  -> one 0/1 indicator per option
* fill-in       -> 1 (the number as written)

Scaling maps every column into [0, 1].  The default ``"paper"`` orientation
sends the column maximum to 0 and the minimum to 1, ``"standard"`` is the
usual min-max map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    IndexOutOfRange,
    InvalidConfig,
    NonFiniteValue,
    ShapeMismatch,
)

SINGLE_CHOICE = "single_choice"
MULTI_CHOICE = "multi_choice"
FILL_IN = "fill_in"
KINDS = (SINGLE_CHOICE, MULTI_CHOICE, FILL_IN)

ORIENTATIONS = ("paper", "standard")


@dataclass(frozen=True)
class QuestionSpec:
    id: str
    name: str
    kind: str
    option_count: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"question {self.id!r}: unknown kind {self.kind!r}")
        if self.kind == FILL_IN:
            if self.option_count is not None:
                raise InvalidConfig(f"question {self.id!r}: fill_in takes no option_count")
        elif self.option_count is None or int(self.option_count) < 2:
            raise InvalidConfig(f"question {self.id!r}: option_count must be >= 2")

    @property
    def width(self) -> int:
        return self.option_count if self.kind == MULTI_CHOICE else 1

    def dimension_names(self) -> list[str]:
        if self.kind == MULTI_CHOICE:
            return [f"{self.id}_{k + 1}: {self.name}" for k in range(self.option_count)]
        return [f"{self.id}: {self.name}"]

    def to_dict(self) -> dict:
        d = {"id": self.id, "name": self.name, "kind": self.kind}
        if self.option_count is not None:
            d["option_count"] = self.option_count
        return d


@dataclass(frozen=True)
class QuestionnaireSchema:
    questions: tuple[QuestionSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "questions", tuple(self.questions))
        seen = set()
        for q in self.questions:
            if q.id in seen:
                raise InvalidConfig(f"duplicate question id {q.id!r}")
            seen.add(q.id)

    @property
    def dimension(self) -> int:
        return sum(q.width for q in self.questions)

    @property
    def factor_names(self) -> list[str]:
        return [name for q in self.questions for name in q.dimension_names()]

    def offsets(self) -> list[int]:
        """Start column of each question in the risk vector."""
        out, pos = [], 0
        for q in self.questions:
            out.append(pos)
            pos += q.width
        return out

    def natural_bounds(self, fill_range: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension (low, high) implied by the question kinds.

        Fill-in questions have no natural range so ``fill_range`` is used.
        """
        lo, hi = [], []
        for q in self.questions:
            if q.kind == SINGLE_CHOICE:
                lo.append(0.0)
                hi.append(float(q.option_count - 1))
            elif q.kind == MULTI_CHOICE:
                lo.extend([0.0] * q.option_count)
                hi.extend([1.0] * q.option_count)
            else:
                lo.append(float(fill_range[0]))
                hi.append(float(fill_range[1]))
        return np.array(lo), np.array(hi)

    @classmethod
    def from_list(cls, items: Iterable[dict]) -> "QuestionnaireSchema":
        questions = []
        for item in items:
            try:
                questions.append(
                    QuestionSpec(
                        id=str(item["id"]),
                        name=str(item.get("name", item["id"])),
                        kind=str(item["kind"]),
                        option_count=item.get("option_count"),
                    )
                )
            except KeyError as exc:
                raise InvalidConfig(f"schema entry {item!r} lacks field {exc}") from None
        return cls(tuple(questions))

    def to_list(self) -> list[dict]:
        return [q.to_dict() for q in self.questions]


def load_schema(path: str | Path) -> QuestionnaireSchema:
    with open(path, encoding="utf-8") as fh:
        items = json.load(fh)
    if not isinstance(items, list):
        raise InvalidConfig(f"{path}: schema file must hold a JSON array")
    return QuestionnaireSchema.from_list(items)


def save_schema(schema: QuestionnaireSchema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_list(), fh, indent=2)
        fh.write("\n")


def reference_schema() -> QuestionnaireSchema:
    """The bundled 84-dimension questionnaire layout (groups A to F)."""
    text = resources.files("riskcore.data").joinpath("reference_schema.json").read_text("utf-8")
    return QuestionnaireSchema.from_list(json.loads(text))


def vector_dimension(schema: QuestionnaireSchema) -> int:
    return schema.dimension


def encode_response(schema: QuestionnaireSchema, response: Sequence) -> np.ndarray:
    """Encode one questionnaire as an unscaled risk vector.

    ``response`` holds one answer per question, in schema order: an int for
    single choice, a collection of ints for multi choice, a number for fill-in.
    Missing answers are an error.
    """
    if len(response) != len(schema.questions):
        raise ShapeMismatch(
            f"response has {len(response)} answers, schema has {len(schema.questions)} questions"
        )
    out = np.zeros(schema.dimension)
    pos = 0
    for q, answer in zip(schema.questions, response):
        if q.kind == SINGLE_CHOICE:
            k = _choice_index(q, answer)
            out[pos] = k
        elif q.kind == MULTI_CHOICE:
            if isinstance(answer, (str, bytes)) or not hasattr(answer, "__iter__"):
                raise ShapeMismatch(f"{q.id}: multi-choice answer must be a collection of indices")
            picked = [_choice_index(q, a) for a in answer]
            if len(set(picked)) != len(picked):
                raise ShapeMismatch(f"{q.id}: duplicate option in multi-choice answer")
            out[pos + np.array(picked, dtype=int)] = 1.0
        else:
            if isinstance(answer, bool) or not isinstance(answer, (int, float, np.number)):
                raise NonFiniteValue(f"{q.id}: fill-in answer {answer!r} is not a number")
            if not math.isfinite(float(answer)):
                raise NonFiniteValue(f"{q.id}: fill-in answer {answer!r} is not finite")
            out[pos] = float(answer)
        pos += q.width
    return out


def _choice_index(q: QuestionSpec, answer) -> int:
    if isinstance(answer, bool) or not isinstance(answer, (int, np.integer)):
        raise ShapeMismatch(f"{q.id}: choice answer {answer!r} is not an option index")
    k = int(answer)
    if not 0 <= k < q.option_count:
        raise IndexOutOfRange(f"{q.id}: option {k} outside [0, {q.option_count})")
    return k


def decode_choices(schema: QuestionnaireSchema, vector: Sequence[float]) -> list:
    """Inverse of :func:`encode_response` for choice questions.

    Fill-in answers are returned as floats.
    """
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (schema.dimension,):
        raise DimensionMismatch(f"expected vector of length {schema.dimension}")
    answers = []
    for q, pos in zip(schema.questions, schema.offsets()):
        block = vector[pos : pos + q.width]
        if q.kind == SINGLE_CHOICE:
            answers.append(int(round(block[0])))
        elif q.kind == MULTI_CHOICE:
            answers.append(frozenset(int(k) for k in np.flatnonzero(block > 0.5)))
        else:
            answers.append(float(block[0]))
    return answers


def encode_responses(schema: QuestionnaireSchema, responses: Iterable[Sequence]) -> np.ndarray:
    rows = [encode_response(schema, r) for r in responses]
    if not rows:
        return np.zeros((0, schema.dimension))
    return np.vstack(rows)


@dataclass(frozen=True)
class ScalingParams:
    x_max: np.ndarray
    x_min: np.ndarray
    orientation: str = "paper"
    constant: np.ndarray = field(init=False)

    def __post_init__(self):
        x_max = np.asarray(self.x_max, dtype=float)
        x_min = np.asarray(self.x_min, dtype=float)
        if x_max.shape != x_min.shape or x_max.ndim != 1:
            raise DimensionMismatch("x_max and x_min must be 1-D and equally long")
        if np.any(x_max < x_min):
            raise InvalidConfig("x_max must be >= x_min in every dimension")
        if self.orientation not in ORIENTATIONS:
            raise InvalidConfig(f"unknown scaling orientation {self.orientation!r}")
        object.__setattr__(self, "x_max", x_max)
        object.__setattr__(self, "x_min", x_min)
        object.__setattr__(self, "constant", x_max == x_min)

    @property
    def dimension(self) -> int:
        return self.x_max.shape[0]

    def to_dict(self) -> dict:
        return {
            "x_max": self.x_max.tolist(),
            "x_min": self.x_min.tolist(),
            "orientation": self.orientation,
        }


def fit_scaling(matrix, orientation: str = "paper") -> ScalingParams:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise EmptyMatrix("cannot fit scaling on an empty matrix")
    return ScalingParams(m.max(axis=0), m.min(axis=0), orientation)


def apply_scaling(params: ScalingParams, matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] != params.dimension:
        raise DimensionMismatch(
            f"matrix has shape {m.shape}, scaling expects {params.dimension} columns"
        )
    span = np.where(params.constant, 1.0, params.x_max - params.x_min)
    if params.orientation == "paper":
        out = (params.x_max - m) / span
    else:
        out = (m - params.x_min) / span
    out[:, params.constant] = 0.0
    return np.clip(out, 0.0, 1.0)


def fit_apply_scaling(matrix, orientation: str = "paper") -> tuple[ScalingParams, np.ndarray]:
    params = fit_scaling(matrix, orientation)
    return params, apply_scaling(params, matrix)
