"""Core domain types: datasets, step functions, additive models, losses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "StepFunction",
    "GamModel",
    "LossSpec",
    "build_dataset",
    "predict",
    "loss_value",
]


class DataError(ValueError):
    """Raised for invalid or malformed input data."""


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant univariate function, right-continuous on its knots.

    ``f(x) = values[t]`` for ``knots[t] <= x < knots[t+1]``.  Outside the knot
    range the behaviour depends on ``extension_mode``:

    - ``"compact"``: zero below the first knot and strictly above the last one
      (``f(knots[-1]) = values[-1]`` still holds exactly);
    - ``"clamp"``: hold the first/last value.

    An empty function (no knots) is identically zero.
    """

    knots: np.ndarray
    values: np.ndarray
    extension_mode: str = "compact"

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if knots.ndim != 1 or values.ndim != 1:
            raise ValueError("knots and values must be one-dimensional")
        if knots.shape != values.shape:
            raise ValueError("knots and values must have equal length")
        if knots.size and not np.all(np.diff(knots) > 0):
            raise ValueError("knots must be strictly increasing")
        if self.extension_mode not in ("compact", "clamp"):
            raise ValueError(f"unknown extension_mode {self.extension_mode!r}")

    @classmethod
    def zero(cls, extension_mode: str = "compact") -> "StepFunction":
        return cls(np.empty(0), np.empty(0), extension_mode)

    @property
    def is_zero(self) -> bool:
        return self.knots.size == 0

    def with_mode(self, extension_mode: str) -> "StepFunction":
        return StepFunction(self.knots, self.values, extension_mode)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self.knots.size == 0:
            out = np.zeros_like(x)
            return float(out[0]) if scalar else out
        idx = np.searchsorted(self.knots, x, side="right") - 1
        out = self.values[np.clip(idx, 0, self.values.size - 1)]
        if self.extension_mode == "compact":
            out = np.where((x < self.knots[0]) | (x > self.knots[-1]), 0.0, out)
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class Dataset:
    """Samples, targets, and per-feature sorted orders with tie groups.

    ``feature_orders[j]`` is the stable argsort of column j.  ``tie_groups[j]``
    assigns each *sorted position* a group id; positions sharing a feature
    value (bitwise equality) share a group id, and ids increase with the
    sorted order starting from 0.
    """

    features: np.ndarray
    targets: np.ndarray
    feature_orders: tuple
    tie_groups: tuple

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def sorted_column(self, j: int) -> np.ndarray:
        return self.features[self.feature_orders[j], j]

    def unique_column(self, j: int):
        """Unique sorted values of column j and the per-sample group index."""
        order = self.feature_orders[j]
        groups = self.tie_groups[j]
        uniq = self.sorted_column(j)[np.r_[True, np.diff(groups) > 0]]
        per_sample = np.empty(self.m, dtype=np.int64)
        per_sample[order] = groups
        return uniq, per_sample


def build_dataset(features, targets) -> Dataset:
    """Build a :class:`Dataset`, computing sort orders and tie groups.

    Rejects non-finite entries (with their location) and empty data.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    if features.ndim != 2:
        raise DataError("features must be a 2-D array")
    m, p = features.shape
    if m == 0 or p == 0:
        raise DataError("dataset must contain at least one sample and one feature")
    if targets.shape != (m,):
        raise DataError(f"targets must have length {m}, got shape {targets.shape}")
    bad = np.argwhere(~np.isfinite(features))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"non-finite feature value at row {r}, column {c}")
    if not np.all(np.isfinite(targets)):
        r = int(np.flatnonzero(~np.isfinite(targets))[0])
        raise DataError(f"non-finite target value at row {r}")

    orders = []
    groups = []
    for j in range(p):
        order = np.argsort(features[:, j], kind="stable")
        col = features[order, j]
        gid = np.concatenate([[0], np.cumsum(np.diff(col) > 0)]).astype(np.int64)
        orders.append(order)
        groups.append(gid)
    return Dataset(features, targets, tuple(orders), tuple(groups))


@dataclass(frozen=True)
class GamModel:
    """Additive predictor: intercept plus one step function per feature."""

    weight_functions: tuple
    intercept: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "weight_functions", tuple(self.weight_functions))

    @property
    def p(self) -> int:
        return len(self.weight_functions)

    @property
    def budget_used(self) -> float:
        # compact-mode TV regardless of each function's prediction-time mode
        from .tv import total_variation

        return float(sum(total_variation(f, mode="compact") for f in self.weight_functions))

    def with_mode(self, extension_mode: str) -> "GamModel":
        return GamModel(
            tuple(f.with_mode(extension_mode) for f in self.weight_functions),
            self.intercept,
        )

    def predict_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValueError(f"expected a matrix with {self.p} columns, got shape {X.shape}")
        out = np.full(X.shape[0], self.intercept, dtype=float)
        for j, f in enumerate(self.weight_functions):
            if not f.is_zero:
                out += f(X[:, j])
        return out


def predict(model: GamModel, x) -> float:
    """Evaluate the additive predictor at a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape != (model.p,):
        raise ValueError(f"expected {model.p} coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("prediction point must be finite")
    return float(model.predict_matrix(x[None, :])[0])


_LOSS_KINDS = ("squared", "logistic", "hinge", "absolute")


@dataclass(frozen=True)
class LossSpec:
    """A loss with its Lipschitz constant and bound, where declarable.

    ``logistic``, ``hinge`` and ``absolute`` are 1-Lipschitz unconditionally.
    The squared loss only gets finite constants once a prediction range and a
    target range are declared.  A ``clip`` level on the hinge loss caps it at
    that value (keeping Lipschitz constant 1), which makes it bounded without
    any range declaration.
    """

    kind: str
    prediction_range: tuple | None = None
    target_range: tuple | None = None
    clip: float | None = None

    def __post_init__(self):
        if self.kind not in _LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.clip is not None and self.kind != "hinge":
            raise ValueError("clip is only supported for the hinge loss")
        if self.clip is not None and self.clip <= 0:
            raise ValueError("clip must be positive")

    @property
    def is_classification(self) -> bool:
        return self.kind in ("logistic", "hinge")

    @property
    def is_convex(self) -> bool:
        return self.clip is None

    @property
    def is_smooth(self) -> bool:
        return self.kind in ("squared", "logistic")

    @property
    def lipschitz(self) -> float | None:
        """Lipschitz constant in the prediction argument, or None if unbounded."""
        if self.kind in ("logistic", "hinge", "absolute"):
            return 1.0
        if self.prediction_range is None or self.target_range is None:
            return None
        pmax = max(abs(self.prediction_range[0]), abs(self.prediction_range[1]))
        ymax = max(abs(self.target_range[0]), abs(self.target_range[1]))
        return 2.0 * (pmax + ymax)

    @property
    def bound(self) -> float | None:
        """Upper bound on the loss value, or None if unbounded."""
        if self.kind == "hinge" and self.clip is not None:
            return float(self.clip)
        if self.prediction_range is None or self.target_range is None:
            return None
        pmax = max(abs(self.prediction_range[0]), abs(self.prediction_range[1]))
        ymax = max(abs(self.target_range[0]), abs(self.target_range[1]))
        if self.kind == "squared":
            return (pmax + ymax) ** 2
        if self.kind == "absolute":
            return pmax + ymax
        if self.kind == "logistic":
            return float(np.log1p(np.exp(pmax)))
        return 1.0 + pmax  # plain hinge

    def values(self, predictions, targets) -> np.ndarray:
        predictions = np.asarray(predictions, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if self.is_classification and not np.all(np.isin(targets, (-1.0, 1.0))):
            raise ValueError(f"{self.kind} loss requires labels in {{-1, +1}}")
        if self.kind == "squared":
            return (predictions - targets) ** 2
        if self.kind == "absolute":
            return np.abs(predictions - targets)
        margin = predictions * targets
        if self.kind == "logistic":
            # stable log(1 + exp(-margin))
            return np.logaddexp(0.0, -margin)
        out = np.maximum(0.0, 1.0 - margin)
        if self.clip is not None:
            out = np.minimum(out, self.clip)
        return out


def loss_value(spec: LossSpec, prediction: float, target: float) -> float:
    """Single-sample loss value."""
    return float(spec.values(np.array([prediction]), np.array([target]))[0])
