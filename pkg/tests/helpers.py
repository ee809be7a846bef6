"""Independent reference implementations used to check the library.

Everything here is deliberately slow and simple: dynamic programs over
value grids and linear programs, with no code shared with the package.
"""

from __future__ import annotations

import numpy as np


def grid_sup_unit_tv(gammas, step=1.0 / 64.0):
    """Maximize sum(gammas * v) over the unit compact-TV polytope by grid DP.

    The polytope is {v : |v_1| + sum|v_t - v_{t+1}| + |v_n| <= 1}; every
    coordinate of a feasible point lies in [-1/2, 1/2].  Values and budget
    are discretized in units of ``step``; all jump costs are then integral,
    so the DP tracks the budget exactly and only searches feasible points.
    """
    gammas = np.asarray(gammas, dtype=float)
    n_units = int(round(1.0 / step))
    half = n_units // 2
    vals = np.arange(-half, half + 1) * step  # value grid
    nv = vals.size
    nb = n_units + 1  # budget units used so far, 0..n_units
    D = np.full((nb, nv), -np.inf)
    for vi in range(nv):
        cost = abs(vi - half)
        D[cost, vi] = gammas[0] * vals[vi]
    for g in gammas[1:]:
        D2 = np.full_like(D, -np.inf)
        for d in range(nb):
            src = D[: nb - d, :]
            if d == 0:
                np.maximum(D2, D, out=D2)
                continue
            np.maximum(D2[d:, d:], src[:, : nv - d], out=D2[d:, d:])
            np.maximum(D2[d:, : nv - d], src[:, d:], out=D2[d:, : nv - d])
        D2 += g * vals[None, :]
        D = D2
    best = -np.inf
    for vi in range(nv):
        cost = abs(vi - half)
        col = D[: nb - cost, vi]
        if col.size:
            best = max(best, col.max())
    return float(best)


def grid_prox(z, weights, lam, step=1.0 / 128.0, pad=0.25):
    """Exhaustive grid minimizer of the boundary-anchored fused objective.

    Objective: 0.5 sum w_t (v_t - z_t)^2 + lam (|v_1| + sum|v_t - v_{t+1}| + |v_n|),
    restricted to a value grid of spacing ``step``.  The chain structure makes
    per-coordinate exhaustion exact: a min-convolution against lam|.| between
    coordinates is computed with two monotone passes.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(weights, dtype=float)
    lo = min(0.0, z.min()) - pad
    hi = max(0.0, z.max()) + pad
    lo_i = int(np.floor(lo / step))
    hi_i = int(np.ceil(hi / step))
    vals = np.arange(lo_i, hi_i + 1) * step
    nv = vals.size
    cost = 0.5 * w[0] * (vals - z[0]) ** 2 + lam * np.abs(vals)
    back = []
    for t in range(1, z.size):
        # min-convolution with lam|.|: forward and backward relaxations
        run = cost.copy()
        arg = np.arange(nv)
        for i in range(1, nv):
            if run[i - 1] + lam * step < run[i]:
                run[i] = run[i - 1] + lam * step
                arg[i] = arg[i - 1]
        for i in range(nv - 2, -1, -1):
            if run[i + 1] + lam * step < run[i]:
                run[i] = run[i + 1] + lam * step
                arg[i] = arg[i + 1]
        back.append(arg)
        cost = run + 0.5 * w[t] * (vals - z[t]) ** 2
    total = cost + lam * np.abs(vals)
    idx = int(np.argmin(total))
    path = [idx]
    for arg in reversed(back):
        path.append(int(arg[path[-1]]))
    path.reverse()
    return vals[np.asarray(path)], float(total[idx])


def fused_objective(z, weights, lam, v):
    z = np.asarray(z, dtype=float)
    w = np.asarray(weights, dtype=float)
    v = np.asarray(v, dtype=float)
    tv = abs(v[0]) + np.abs(np.diff(v)).sum() + abs(v[-1])
    return float(0.5 * np.sum(w * (v - z) ** 2) + lam * tv)


def lp_fit_objective(A, y, lam, loss):
    """LP value of min_w sum_loss(A @ w, y) + 2 lam ||w||_1.

    Supports ``absolute`` (|pred - y|) and ``hinge`` (max(0, 1 - y pred)).
    """
    from scipy.optimize import linprog

    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, k = A.shape
    # variables: w+ (k), w- (k), slack s (m)
    c = np.concatenate([np.full(2 * k, 2.0 * lam), np.ones(m)])
    if loss == "absolute":
        # s >= A w - y  and  s >= y - A w
        A_ub = np.block([[A, -A, -np.eye(m)], [-A, A, -np.eye(m)]])
        b_ub = np.concatenate([y, -y])
    elif loss == "hinge":
        # s >= 1 - y * (A w), s >= 0 via bounds
        Ay = A * y[:, None]
        A_ub = np.hstack([-Ay, Ay, -np.eye(m)])
        b_ub = np.full(m, -1.0)
    else:
        raise ValueError(loss)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * (2 * k + m), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)
