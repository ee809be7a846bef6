"""Figure rendering for CLI reports (Agg backend, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_fit_trace",
    "render_model",
    "render_scaling",
    "render_tightness",
]


def render_fit_trace(trace, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(trace)), trace, marker=".", lw=1)
    ax.set_xlabel("outer cycle")
    ax.set_ylabel("objective")
    ax.set_title("backfitting objective trace")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_model(model, path):
    p = model.p
    ncols = min(p, 3)
    nrows = (p + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 2.5 * nrows), squeeze=False)
    for j, f in enumerate(model.weight_functions):
        ax = axes[j // ncols][j % ncols]
        if f.is_zero:
            ax.axhline(0.0, color="gray", lw=1)
        else:
            k, v = f.knots, f.values
            span = max(k[-1] - k[0], 1.0)
            grid = np.concatenate([[k[0] - 0.1 * span], k, [k[-1] + 0.1 * span]])
            ax.step(grid, f(grid), where="post")
        ax.set_title(f"feature {j}", fontsize=9)
    for j in range(p, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_scaling(rows, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ps = sorted({r["p"] for r in rows})
    for p in ps:
        sub = sorted((r for r in rows if r["p"] == p), key=lambda r: r["m"])
        ms = [r["m"] for r in sub]
        ax.errorbar(
            ms,
            [r["estimate"] for r in sub],
            yerr=[3 * r["std_error"] for r in sub],
            marker="o",
            capsize=3,
            label=f"estimate p={p}",
        )
        ax.plot(ms, [r["bound"] for r in sub], ls="--", color=ax.lines[-1].get_color(), alpha=0.6)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("samples m")
    ax.set_ylabel("Rademacher complexity")
    ax.legend(fontsize=8)
    ax.set_title("estimate (solid) vs bound (dashed)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_tightness(report, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["sign class", "TV budget 2"]
    vals = [report.sign_class_estimate, report.gam_estimate]
    errs = [3 * report.sign_class_std_error, 3 * report.gam_std_error]
    ax.bar(labels, vals, yerr=errs, capsize=5, color=["tab:orange", "tab:blue"])
    ax.set_ylabel("estimated Rademacher complexity")
    ax.set_title(f"p={report.p}, m={report.m}, draws={report.draws}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
