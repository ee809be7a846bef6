"""Exact total-variation arithmetic for step functions.

This module carries the three interchangeable representations of a
unit-budget univariate component and the conversions between them:

- a step function (knots + values, compactly supported),
- its fitted values ``v`` at the sorted sample points,
- sparse interval weights ``w[i, j]`` over index pairs ``i <= j`` whose
  cumulative coverage reproduces ``v`` and whose scaled L1 mass equals the
  compact TV of ``v``.

It also exposes the exact linear-time supremum of ``sum γ_i f(x_i)`` over
unit-TV step functions, which drives the complexity estimators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import StepFunction

__all__ = [
    "PartialSums",
    "TriangleWeights",
    "total_variation",
    "tv_of_values",
    "partial_sums",
    "sup_gam1",
    "v_to_w",
    "w_to_step",
    "min_tv_interpolant",
]


def kahan_prefix(values: np.ndarray) -> np.ndarray:
    """Prefix sums [0, s_1, ..., s_n] with compensated accumulation."""
    values = np.asarray(values, dtype=float)
    out = np.empty(values.size + 1)
    out[0] = 0.0
    total = 0.0
    comp = 0.0
    for i, g in enumerate(values):
        y = g - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i + 1] = total
    return out


@dataclass(frozen=True)
class PartialSums:
    """Coefficients (tie groups pre-merged) with their prefix sums."""

    gammas: np.ndarray
    prefix: np.ndarray = field(init=False)

    def __post_init__(self):
        gammas = np.asarray(self.gammas, dtype=float)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "prefix", kahan_prefix(gammas))

    def interval_sum(self, i: int, j: int) -> float:
        """Sum of gammas[i-1 .. j-1] (one-based inclusive interval)."""
        return float(self.prefix[j] - self.prefix[i - 1])


def partial_sums(gammas) -> PartialSums:
    return PartialSums(np.asarray(gammas, dtype=float))


def tv_of_values(values, compact: bool = True) -> float:
    """TV of the step function taking these values, in sorted-knot order.

    Compact form includes the boundary jumps from and back to zero:
    ``|v_1| + sum |v_t - v_{t+1}| + |v_n|``.  The clamp form keeps only the
    interior jumps.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    interior = float(np.sum(np.abs(np.diff(values))))
    if compact:
        return abs(float(values[0])) + interior + abs(float(values[-1]))
    return interior


def total_variation(f: StepFunction, mode: str | None = None) -> float:
    """Total variation of a step function.

    ``mode`` overrides the function's own extension mode; compact includes
    the two boundary jumps to zero, clamp omits them.
    """
    mode = f.extension_mode if mode is None else mode
    if mode not in ("compact", "clamp"):
        raise ValueError(f"unknown mode {mode!r}")
    return tv_of_values(f.values, compact=(mode == "compact"))


def merge_ties(gammas: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Sum coefficients over runs of equal x (x must be sorted ascending)."""
    gammas = np.asarray(gammas, dtype=float)
    x = np.asarray(x, dtype=float)
    if gammas.shape != x.shape:
        raise ValueError("gammas and x must have equal length")
    if x.size and np.any(np.diff(x) < 0):
        raise ValueError("x must be sorted ascending")
    if x.size == 0:
        return gammas
    gid = np.concatenate([[0], np.cumsum(np.diff(x) > 0)])
    return np.bincount(gid, weights=gammas)


def sup_gam1(gammas, x=None) -> float:
    """sup of sum γ_i f(x_i) over unit-TV compactly supported step functions.

    Equals half the range of the prefix-sum sequence (with the empty prefix 0
    included).  When ``x`` is given, coefficients of tied sample points are
    merged first; otherwise the coefficients are assumed tie-free.
    """
    gammas = np.asarray(gammas, dtype=float)
    if x is not None:
        gammas = merge_ties(gammas, x)
    if gammas.size == 0:
        return 0.0
    prefix = kahan_prefix(gammas)
    return 0.5 * float(prefix.max() - prefix.min())


@dataclass(frozen=True)
class TriangleWeights:
    """Sparse weights over index pairs (i, j), 0-based, i <= j."""

    entries: dict

    def __post_init__(self):
        for (i, j) in self.entries:
            if not (0 <= i <= j):
                raise ValueError(f"invalid pair ({i}, {j}): need 0 <= i <= j")

    @property
    def l1_mass(self) -> float:
        return float(sum(abs(w) for w in self.entries.values()))

    def coverage(self, m: int) -> np.ndarray:
        """values[t] = sum of w[i, j] over pairs with i <= t <= j."""
        out = np.zeros(m)
        for (i, j), w in self.entries.items():
            if i >= m or j >= m:
                raise ValueError(f"pair ({i}, {j}) outside [0, {m})")
            out[i : j + 1] += w
        return out


def _construct_w(indices: list, values: list, out: dict) -> None:
    # Inductive construction: peel off the smallest-index maximizer each
    # round.  Neighbour relations are positional in the current subsequence;
    # interval endpoints keep their original indices.
    if not indices:
        return
    if max(values) < 0.0:
        # the peeling step needs a nonnegative maximum; both defining
        # conditions are odd under negation, so solve for -v and flip
        neg: dict = {}
        _construct_w(indices, [-v for v in values], neg)
        for key, w in neg.items():
            out[key] = out.get(key, 0.0) - w
        return
    if len(indices) == 1:
        out[(indices[0], indices[0])] = out.get((indices[0], indices[0]), 0.0) + values[0]
        return
    k = int(np.argmax(values))  # first occurrence of the maximum
    star = indices[k]
    v_prev = values[k - 1] if k > 0 else 0.0
    v_next = values[k + 1] if k < len(values) - 1 else 0.0
    sub: dict = {}
    _construct_w(indices[:k] + indices[k + 1 :], values[:k] + values[k + 1 :], sub)
    if v_next < v_prev:
        prev_idx = indices[k - 1] if k > 0 else None
        out[(star, star)] = out.get((star, star), 0.0) + (values[k] - v_prev)
        for (i, j), w in sub.items():
            key = (i, star) if j == prev_idx else (i, j)
            out[key] = out.get(key, 0.0) + w
    else:
        next_idx = indices[k + 1] if k < len(indices) - 1 else None
        out[(star, star)] = out.get((star, star), 0.0) + (values[k] - v_next)
        for (i, j), w in sub.items():
            key = (star, j) if i == next_idx else (i, j)
            out[key] = out.get(key, 0.0) + w


def v_to_w(v) -> TriangleWeights:
    """Interval weights reproducing the fitted values v.

    The result satisfies, exactly in exact arithmetic:

    - ``2 * sum |w[i, j]|`` equals the compact TV of ``v``;
    - the cumulative coverage at every position t equals ``v[t]``.
    """
    v = np.asarray(v, dtype=float)
    out: dict = {}
    _construct_w(list(range(v.size)), [float(a) for a in v], out)
    return TriangleWeights({k: w for k, w in out.items() if w != 0.0})


def w_to_step(w: TriangleWeights, x) -> StepFunction:
    """Assemble the compact step function realized by interval weights.

    The function takes value ``sum_{i <= t <= j} w[i, j]`` on the piece
    starting at ``x[t]``; its compact TV is at most ``2 * sum |w[i, j]|``.
    """
    x = np.asarray(x, dtype=float)
    if x.size and np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")
    if not w.entries:
        return StepFunction.zero()
    values = w.coverage(x.size)
    return StepFunction(x, values, "compact")


def min_tv_interpolant(x, v) -> StepFunction:
    """Minimum-TV compact step function with f(x[t]) = v[t].

    ``x`` must be sorted with ties already merged: equal knots are only
    accepted when they carry equal values, and are collapsed.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape:
        raise ValueError("x and v must have equal length")
    if x.size == 0 or not np.any(v):
        return StepFunction.zero()
    if np.any(np.diff(x) < 0):
        raise ValueError("x must be sorted ascending")
    keep = np.r_[True, np.diff(x) > 0]
    if not np.all(keep):
        for t in np.flatnonzero(~keep):
            if v[t] != v[t - 1]:
                raise ValueError(f"tied knots at x={x[t]} carry unequal values")
    return StepFunction(x[keep], v[keep], "compact")
