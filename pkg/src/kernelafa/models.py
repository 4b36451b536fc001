"""Tabular models, background data, and the games they induce.

The value of a coalition ``S`` is the empirical interventional expectation

    v(S) = (1/t) sum_r f(x_S, r_{N \\ S})

over background rows ``r``: features in ``S`` come from the explained
instance, the rest from each background row in turn. Cost is
``O(2**n * t)`` model evaluations.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, EmptyBackground, IndexOutOfRange, NonFinite, ParseError, ValidationError
from .game import MAX_FEATURES, CoalitionGame


def _vector(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{what} must be a vector")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{what} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    rows: np.ndarray
    names: tuple | None = None

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise DimensionMismatch("dataset rows must form a 2-d table")
        if rows.shape[0] < 1:
            raise EmptyBackground("dataset has no rows")
        if not np.all(np.isfinite(rows)):
            raise NonFinite("dataset contains non-finite values")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if self.names is not None:
            names = tuple(str(x) for x in self.names)
            if len(names) != rows.shape[1]:
                raise DimensionMismatch("one name per column is required")
            if len(set(names)) != len(names):
                raise ValidationError("feature names must be unique")
            object.__setattr__(self, "names", names)

    @property
    def t(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class LinearModel:
    beta0: float
    beta: np.ndarray

    def __post_init__(self):
        if not math.isfinite(self.beta0):
            raise NonFinite("beta0 must be finite")
        object.__setattr__(self, "beta0", float(self.beta0))
        object.__setattr__(self, "beta", _vector(self.beta, "beta"))

    @property
    def n(self) -> int:
        return len(self.beta)

    def predict_rows(self, x: np.ndarray) -> np.ndarray:
        return self.beta0 + x @ self.beta


@dataclass(frozen=True)
class AdditiveModel:
    """``f(x) = sum_j f_j(x_j)`` with ``f_j`` a polynomial, coefficients low to high."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(_vector(c, f"terms[{j}]") for j, c in enumerate(self.terms))
        if not terms:
            raise DimensionMismatch("additive model needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return len(self.terms)

    def predict_rows(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape[0])
        for j, coef in enumerate(self.terms):
            out += np.polynomial.polynomial.polyval(x[:, j], coef) if len(coef) else 0.0
        return out


@dataclass(frozen=True)
class InteractionModel:
    """Linear part plus pairwise products ``gamma_jk x_j x_k`` (1-based ``j < k``)."""

    beta0: float
    beta: np.ndarray
    gamma: tuple = field(default=())

    def __post_init__(self):
        if not math.isfinite(self.beta0):
            raise NonFinite("beta0 must be finite")
        object.__setattr__(self, "beta0", float(self.beta0))
        beta = _vector(self.beta, "beta")
        object.__setattr__(self, "beta", beta)
        n = len(beta)
        seen = set()
        gamma = []
        for entry in self.gamma:
            j, k, g = entry
            if int(j) != j or int(k) != k:
                raise ValidationError(f"interaction indices must be integers: {entry!r}")
            j, k = int(j), int(k)
            if not 1 <= j < k <= n:
                raise IndexOutOfRange(f"interaction ({j}, {k}) needs 1 <= j < k <= {n}")
            if (j, k) in seen:
                raise ValidationError(f"duplicate interaction ({j}, {k})")
            if not math.isfinite(g):
                raise NonFinite("interaction coefficients must be finite")
            seen.add((j, k))
            gamma.append((j, k, float(g)))
        object.__setattr__(self, "gamma", tuple(gamma))

    @property
    def n(self) -> int:
        return len(self.beta)

    def predict_rows(self, x: np.ndarray) -> np.ndarray:
        out = self.beta0 + x @ self.beta
        for j, k, g in self.gamma:
            out = out + g * x[:, j - 1] * x[:, k - 1]
        return out


PredictionModel = Union[LinearModel, AdditiveModel, InteractionModel]


def predict(model: PredictionModel, row: Sequence[float]) -> float:
    x = np.asarray(row, dtype=float)
    if x.shape != (model.n,):
        raise DimensionMismatch(f"model expects {model.n} features, got shape {x.shape}")
    return float(model.predict_rows(x[None, :])[0])


def feature_means(ds: Dataset) -> np.ndarray:
    return ds.rows.mean(axis=0)


def resolve_instance(instance, background: Dataset) -> np.ndarray:
    """An ``int`` selects a background row (0-based); anything else is the vector itself."""
    if isinstance(instance, (int, np.integer)) and not isinstance(instance, bool):
        if not 0 <= instance < background.t:
            raise IndexOutOfRange(f"instance {instance} outside rows 0..{background.t - 1}")
        return background.rows[int(instance)].copy()
    x = np.array(instance, dtype=float)
    if x.shape != (background.n,):
        raise DimensionMismatch(f"instance must have {background.n} values")
    if not np.all(np.isfinite(x)):
        raise NonFinite("instance must be finite")
    return x


def estimate_value_function(model: PredictionModel, background: Dataset, instance) -> CoalitionGame:
    n = background.n
    if model.n != n:
        raise DimensionMismatch(f"model has {model.n} features, background has {n}")
    if not 1 <= n <= MAX_FEATURES:
        raise DimensionMismatch(f"feature count {n} outside 1..{MAX_FEATURES}")
    x = resolve_instance(instance, background)
    rows = background.rows
    values = np.empty(1 << n)
    bits = np.arange(n)
    for mask in range(1 << n):
        keep = ((mask >> bits) & 1).astype(bool)
        composite = np.where(keep, x, rows)
        values[mask] = model.predict_rows(composite).mean()
    values[-1] = predict(model, x)
    return CoalitionGame(n, values)


# -- file formats --------------------------------------------------------------


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_dataset_csv(text: str) -> Dataset:
    """Comma-separated reals; a first line with any non-numeric cell is a header."""
    lines = [(i + 1, row) for i, row in enumerate(csv.reader(text.splitlines())) if row]
    if not lines:
        raise EmptyBackground("CSV has no rows")
    names = None
    if not all(_is_number(c) for c in lines[0][1]):
        names = [c.strip() for c in lines[0][1]]
        lines = lines[1:]
    if not lines:
        raise EmptyBackground("CSV has a header but no data rows")
    width = len(names) if names is not None else len(lines[0][1])
    data = []
    for lineno, row in lines:
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line=lineno)
        try:
            data.append([float(c) for c in row])
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", line=lineno) from None
    return Dataset(np.array(data), names)


def load_dataset_csv(path) -> Dataset:
    return parse_dataset_csv(Path(path).read_text())


def _load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None


def _numbers(value, what: str) -> list:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ParseError(f"{what} must be a list of numbers")
    return value


def _number(value, what: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ParseError(f"{what} must be a number")
    return value


_MODEL_KEYS = {
    "linear": {"type", "beta0", "beta"},
    "additive": {"type", "terms"},
    "interaction": {"type", "beta0", "beta", "gamma"},
}


def model_from_dict(data) -> PredictionModel:
    if not isinstance(data, dict) or "type" not in data:
        raise ParseError('model JSON must be an object with a "type" key')
    kind = data["type"]
    if kind not in _MODEL_KEYS:
        raise ParseError(f"unknown model type {kind!r}")
    keys = set(data)
    if keys != _MODEL_KEYS[kind]:
        extra, missing = keys - _MODEL_KEYS[kind], _MODEL_KEYS[kind] - keys
        raise ParseError(f"{kind} model: unknown keys {sorted(extra)}, missing {sorted(missing)}")
    if kind == "linear":
        return LinearModel(_number(data["beta0"], "beta0"), _numbers(data["beta"], "beta"))
    if kind == "additive":
        terms = data["terms"]
        if not isinstance(terms, list):
            raise ParseError("terms must be a list of coefficient lists")
        return AdditiveModel(tuple(_numbers(t, "terms entry") for t in terms))
    gamma = data["gamma"]
    if not isinstance(gamma, list) or not all(
        isinstance(g, list) and len(g) == 3 for g in gamma
    ):
        raise ParseError("gamma must be a list of [j, k, value] triples")
    return InteractionModel(
        _number(data["beta0"], "beta0"),
        _numbers(data["beta"], "beta"),
        tuple(tuple(_numbers(g, "gamma entry")) for g in gamma),
    )


def model_to_dict(model: PredictionModel) -> dict:
    if isinstance(model, LinearModel):
        return {"type": "linear", "beta0": model.beta0, "beta": model.beta.tolist()}
    if isinstance(model, AdditiveModel):
        return {"type": "additive", "terms": [t.tolist() for t in model.terms]}
    return {
        "type": "interaction",
        "beta0": model.beta0,
        "beta": model.beta.tolist(),
        "gamma": [[j, k, g] for j, k, g in model.gamma],
    }


def load_model_json(path) -> PredictionModel:
    return model_from_dict(_load_json(path))


def load_game_json(path) -> CoalitionGame:
    return CoalitionGame.from_dict(_load_json(path))


def save_game_json(game: CoalitionGame, path) -> None:
    Path(path).write_text(game.to_json())
