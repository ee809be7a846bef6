"""Monte-Carlo complexity estimation and the theoretical rate bounds.

Per draw, the supremum over the whole TV-budgeted additive class reduces to
the budget times the best single feature: reorder the random coefficients by
each feature's sort order, merge tie groups, and take half the range of the
prefix-sum walk.  The class is symmetric under negation, so the absolute
value inside the definition can be dropped.

Draws come from a counter-based (Philox) generator in fixed-size blocks, so
results for a given seed do not depend on chunking or execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, build_dataset

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

__all__ = [
    "ComplexityReport",
    "BoundInputs",
    "TightnessReport",
    "estimate_complexity",
    "theorem_bound",
    "tightness_experiment",
    "scaling_experiment",
    "synthetic_features",
]

_CHUNK_TARGET = 2_000_000  # sigma entries per generation block


@dataclass(frozen=True)
class ComplexityReport:
    estimate: float
    std_error: float
    draws: int
    kind: str
    bound: float | None
    per_feature_argmax: np.ndarray

    @property
    def slack(self) -> float | None:
        if self.bound is None:
            return None
        return self.bound - self.estimate

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "draws": self.draws,
            "kind": self.kind,
            "bound": self.bound,
            "slack": self.slack,
            "per_feature_argmax": [int(c) for c in self.per_feature_argmax],
        }


@dataclass(frozen=True)
class BoundInputs:
    p: int
    m: int
    C: float
    rho: float

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("bound proven for p >= 2 only")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.C <= 0 or self.rho <= 0:
            raise ValueError("C and rho must be positive")


def theorem_bound(inputs: BoundInputs, kind: str) -> float:
    """Rate bound for the loss-composed class: rho*C*sqrt(k*ceil(ln p)/m).

    The leading constant k is 5 for p >= 3 and 6 for p = 2; the Gaussian
    variant carries an extra sqrt(2/pi) factor.
    """
    if kind not in ("rademacher", "gaussian"):
        raise ValueError(f"unknown kind {kind!r}")
    const = 6.0 if inputs.p == 2 else 5.0
    val = inputs.rho * inputs.C * np.sqrt(const * np.ceil(np.log(inputs.p)) / inputs.m)
    if kind == "gaussian":
        val *= np.sqrt(2.0 / np.pi)
    return float(val)


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _sup_draws_noties(sig, orders):
        # 4 interleaved prefix chains per feature to break the serial
        # floating-point dependency; exact same result as a single scan.
        d, m = sig.shape
        p = orders.shape[0]
        out = np.empty(d)
        arg = np.empty(d, np.int64)
        q = m // 4
        for k in range(d):
            best = -1.0
            bj = 0
            for j in range(p):
                r0 = 0.0
                r1 = 0.0
                r2 = 0.0
                r3 = 0.0
                mx0 = 0.0
                mn0 = 0.0
                mx1 = -1e300
                mn1 = 1e300
                mx2 = -1e300
                mn2 = 1e300
                mx3 = -1e300
                mn3 = 1e300
                for t in range(q):
                    r0 += sig[k, orders[j, t]]
                    if r0 > mx0:
                        mx0 = r0
                    elif r0 < mn0:
                        mn0 = r0
                    r1 += sig[k, orders[j, q + t]]
                    if r1 > mx1:
                        mx1 = r1
                    if r1 < mn1:
                        mn1 = r1
                    r2 += sig[k, orders[j, 2 * q + t]]
                    if r2 > mx2:
                        mx2 = r2
                    if r2 < mn2:
                        mn2 = r2
                    r3 += sig[k, orders[j, 3 * q + t]]
                    if r3 > mx3:
                        mx3 = r3
                    if r3 < mn3:
                        mn3 = r3
                mx = mx0
                mn = mn0
                if q > 0:
                    if r0 + mx1 > mx:
                        mx = r0 + mx1
                    if r0 + mn1 < mn:
                        mn = r0 + mn1
                    if r0 + r1 + mx2 > mx:
                        mx = r0 + r1 + mx2
                    if r0 + r1 + mn2 < mn:
                        mn = r0 + r1 + mn2
                    if r0 + r1 + r2 + mx3 > mx:
                        mx = r0 + r1 + r2 + mx3
                    if r0 + r1 + r2 + mn3 < mn:
                        mn = r0 + r1 + r2 + mn3
                run = r0 + r1 + r2 + r3
                for t in range(4 * q, m):
                    run += sig[k, orders[j, t]]
                    if run > mx:
                        mx = run
                    elif run < mn:
                        mn = run
                v = 0.5 * (mx - mn)
                if v > best:
                    best = v
                    bj = j
            out[k] = best
            arg[k] = bj
        return out, arg

    @numba.njit(cache=True)
    def _sup_draws_ties(sig, orders, group_end):
        # general scan: prefix extrema only sampled at tie-group boundaries
        d, m = sig.shape
        p = orders.shape[0]
        out = np.empty(d)
        arg = np.empty(d, np.int64)
        for k in range(d):
            best = -1.0
            bj = 0
            for j in range(p):
                run = 0.0
                mx = 0.0
                mn = 0.0
                for t in range(m):
                    run += sig[k, orders[j, t]]
                    if group_end[j, t]:
                        if run > mx:
                            mx = run
                        elif run < mn:
                            mn = run
                v = 0.5 * (mx - mn)
                if v > best:
                    best = v
                    bj = j
            out[k] = best
            arg[k] = bj
        return out, arg


def _sup_draws_numpy(sig, orders, group_end):
    d = sig.shape[0]
    p = orders.shape[0]
    sups = np.full(d, -np.inf)
    args = np.zeros(d, dtype=np.int64)
    for j in range(p):
        cs = np.cumsum(sig[:, orders[j]], axis=1)[:, group_end[j]]
        v = 0.5 * (
            np.maximum(cs.max(axis=1), 0.0) - np.minimum(cs.min(axis=1), 0.0)
        )
        better = v > sups
        sups[better] = v[better]
        args[better] = j
    return sups, args


def _per_draw_sups(sig, orders, group_end, has_ties):
    if _HAVE_NUMBA:
        if has_ties:
            return _sup_draws_ties(sig, orders, group_end)
        return _sup_draws_noties(sig, orders)
    return _sup_draws_numpy(sig, orders, group_end)


def estimate_complexity(
    data: Dataset, C: float, kind: str, draws: int, seed: int
) -> ComplexityReport:
    """Monte-Carlo estimate of the empirical Rademacher/Gaussian complexity.

    Each draw contributes ``(C/m) * max_j sup_gam1(sigma in feature-j order)``
    computed with the exact prefix-range formula.
    """
    if kind not in ("rademacher", "gaussian"):
        raise ValueError(f"unknown kind {kind!r}")
    if draws < 1:
        raise ValueError("draws must be at least 1")
    if C <= 0:
        raise ValueError("C must be positive")
    m, p = data.m, data.p
    orders = np.ascontiguousarray(np.stack([o for o in data.feature_orders]))
    group_end = np.empty((p, m), dtype=np.bool_)
    for j in range(p):
        gid = data.tie_groups[j]
        group_end[j, :-1] = gid[1:] != gid[:-1]
        group_end[j, -1] = True
    has_ties = not bool(group_end.all())

    rng = np.random.Generator(np.random.Philox(key=seed))
    chunk = max(1, min(draws, _CHUNK_TARGET // m))
    sups = np.empty(draws)
    argmax_counts = np.zeros(p, dtype=np.int64)
    done = 0
    while done < draws:
        d = min(chunk, draws - done)
        if kind == "rademacher":
            sig = np.where(rng.random((d, m)) < 0.5, -1.0, 1.0)
        else:
            sig = rng.standard_normal((d, m))
        vals, args = _per_draw_sups(sig, orders, group_end, has_ties)
        sups[done : done + d] = vals
        argmax_counts += np.bincount(args, minlength=p)
        done += d

    scale = C / m
    estimate = scale * float(sups.mean())
    if draws > 1:
        se = scale * float(sups.std(ddof=1)) / np.sqrt(draws)
    else:
        se = 0.0
    bound = theorem_bound(BoundInputs(p, m, C, 1.0), kind) if p >= 2 else None
    return ComplexityReport(
        estimate=estimate,
        std_error=se,
        draws=draws,
        kind=kind,
        bound=bound,
        per_feature_argmax=argmax_counts,
    )


def synthetic_features(p: int, m: int, distribution: str, rng) -> np.ndarray:
    if distribution == "uniform":
        return rng.uniform(-1.0, 1.0, (m, p))
    if distribution == "normal":
        return rng.standard_normal((m, p))
    if distribution == "rademacher":
        return np.where(rng.random((m, p)) < 0.5, -1.0, 1.0)
    raise ValueError(f"unknown distribution {distribution!r}")


@dataclass(frozen=True)
class TightnessReport:
    p: int
    m: int
    draws: int
    sign_class_estimate: float
    sign_class_std_error: float
    gam_estimate: float
    gam_std_error: float

    @property
    def combined_std_error(self) -> float:
        return float(np.hypot(self.sign_class_std_error, self.gam_std_error))

    @property
    def ordering_holds(self) -> bool:
        return (
            self.sign_class_estimate
            <= self.gam_estimate + 3.0 * self.combined_std_error
        )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "draws": self.draws,
            "sign_class_estimate": self.sign_class_estimate,
            "sign_class_std_error": self.sign_class_std_error,
            "gam_estimate": self.gam_estimate,
            "gam_std_error": self.gam_std_error,
            "combined_std_error": self.combined_std_error,
            "ordering_holds": self.ordering_holds,
        }


def tightness_experiment(p: int, m: int, draws: int, seed: int) -> TightnessReport:
    """Compare the sign-classifier class against the TV budget-2 class.

    Samples live on the hypercube {-1, +1}^p.  The sign classifiers
    ``x -> +/- sign(x_j)`` are contained in the budget-2 class, so their
    estimated Rademacher complexity should not exceed it (within MC error).
    """
    if p < 2:
        raise ValueError("tightness experiment requires p >= 2")
    if draws < 1:
        raise ValueError("draws must be at least 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    X = np.where(rng.random((m, p)) < 0.5, -1.0, 1.0)
    data = build_dataset(X, np.zeros(m))

    # sign-class complexity: (1/m) E max_j |sum_i eps_i x_ij|
    vals = np.empty(draws)
    done = 0
    chunk = max(1, min(draws, _CHUNK_TARGET // m))
    while done < draws:
        d = min(chunk, draws - done)
        eps = np.where(rng.random((d, m)) < 0.5, -1.0, 1.0)
        vals[done : done + d] = np.abs(eps @ X).max(axis=1) / m
        done += d
    jp_est = float(vals.mean())
    jp_se = float(vals.std(ddof=1)) / np.sqrt(draws) if draws > 1 else 0.0

    gam = estimate_complexity(data, C=2.0, kind="rademacher", draws=draws, seed=seed + 1)
    return TightnessReport(
        p=p,
        m=m,
        draws=draws,
        sign_class_estimate=jp_est,
        sign_class_std_error=jp_se,
        gam_estimate=gam.estimate,
        gam_std_error=gam.std_error,
    )


def scaling_experiment(
    p_grid,
    m_grid,
    C: float,
    draws: int,
    seed: int,
    distribution: str = "uniform",
    kind: str = "rademacher",
) -> list:
    """Estimate/bound table over a (p, m) grid with i.i.d. synthetic features."""
    p_grid = list(p_grid)
    m_grid = list(m_grid)
    if not p_grid or not m_grid:
        raise ValueError("grids must be nonempty")
    rows = []
    for pi, p in enumerate(p_grid):
        for mi, m in enumerate(m_grid):
            ss = np.random.SeedSequence(entropy=seed, spawn_key=(pi, mi))
            rng = np.random.Generator(np.random.Philox(ss))
            X = synthetic_features(p, m, distribution, rng)
            data = build_dataset(X, np.zeros(m))
            draw_seed = int(ss.generate_state(1)[0])
            rep = estimate_complexity(data, C, kind, draws, draw_seed)
            rows.append(
                {
                    "p": p,
                    "m": m,
                    "estimate": rep.estimate,
                    "std_error": rep.std_error,
                    "bound": rep.bound,
                    "ratio": rep.estimate / rep.bound if rep.bound else None,
                }
            )
    return rows
