"""Command-line surface: ingestion, fitting, reports, and figures.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 non-convergence, 5 bound violation detected.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .bounds import erm_excess_bound, uniform_deviation_bound
from .complexity import (
    estimate_complexity,
    scaling_experiment,
    synthetic_features,
    tightness_experiment,
)
from .core import DataError, Dataset, GamModel, LossSpec, StepFunction, build_dataset
from .solver import FitConfig, fit

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NO_CONVERGENCE = 4
EXIT_BOUND_VIOLATION = 5

MODEL_FORMAT_VERSION = 1


def _canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def read_csv_columns(path):
    """Header names and float columns; cells must all be finite numbers."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        dupe = next(h for h in header if header.count(h) > 1)
        raise DataError(f"{path}: duplicate column name {dupe!r}")
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
        for j, cell in enumerate(row):
            try:
                val = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at row {i}, column {header[j]!r}"
                ) from None
            if not np.isfinite(val):
                raise DataError(
                    f"{path}: non-finite cell {cell!r} at row {i}, column {header[j]!r}"
                )
            data[i - 2, j] = val
    if data.shape[0] == 0:
        raise DataError(f"{path}: no data rows")
    return header, data


def ingest_csv(path, target_column) -> Dataset:
    """Dataset from a CSV file; features are the non-target columns in order."""
    header, data = read_csv_columns(path)
    if target_column is not None:
        if target_column not in header:
            raise DataError(f"{path}: target column {target_column!r} not found")
        tj = header.index(target_column)
        targets = data[:, tj]
        features = np.delete(data, tj, axis=1)
    else:
        targets = np.zeros(data.shape[0])
        features = data
    if features.shape[1] == 0:
        raise DataError(f"{path}: no feature columns besides the target")
    return build_dataset(features, targets)


def serialize_model(model: GamModel, metadata: dict | None = None) -> str:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "p": model.p,
        "intercept": model.intercept,
        "budget_used": model.budget_used,
        "features": [
            {
                "knots": [float(k) for k in f.knots],
                "values": [float(v) for v in f.values],
                "extension_mode": f.extension_mode,
            }
            for f in model.weight_functions
        ],
        "metadata": metadata or {},
    }
    return _canonical_json(doc)


def deserialize_model(text: str):
    doc = json.loads(text)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataError(f"unsupported model format version {doc.get('format_version')!r}")
    funcs = []
    for entry in doc["features"]:
        knots = np.asarray(entry["knots"], dtype=float)
        if knots.size and np.any(np.diff(knots) <= 0):
            raise DataError("model file has non-increasing knots")
        funcs.append(StepFunction(knots, np.asarray(entry["values"], dtype=float), entry["extension_mode"]))
    model = GamModel(tuple(funcs), intercept=float(doc["intercept"]))
    return model, doc.get("metadata", {})


def _parse_grid(text: str, cast=float):
    try:
        vals = [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse grid {text!r}")
    if not vals:
        raise click.BadParameter(f"empty grid {text!r}")
    return vals


def _build_loss(kind, clip):
    try:
        return LossSpec(kind, clip=clip)
    except ValueError as exc:
        raise click.UsageError(str(exc))


class _Fail(click.ClickException):
    def __init__(self, message, code):
        super().__init__(message)
        self.exit_code = code


def _guard(func):
    """Translate library errors into the exit-code contract."""
    import functools

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DataError as exc:
            raise _Fail(str(exc), EXIT_DATA)
        except (ValueError, TypeError) as exc:
            raise _Fail(str(exc), EXIT_CONFIG)

    return wrapper


@click.group()
def main():
    """Fit TV-regularized additive models and certify their complexity."""


@main.command("fit")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--target", required=True, help="Name of the target column.")
@click.option("--loss", "loss_kind", default="squared", show_default=True,
              type=click.Choice(["squared", "logistic"]))
@click.option("--lambda", "lam", required=True,
              help="Regularization weight, or a comma-separated grid.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--tol", default=1e-8, show_default=True, type=float)
@click.option("--max-iters", default=10_000, show_default=True, type=int)
@click.option("--intercept/--no-intercept", default=False, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=False, show_default=True,
              help="Also render objective-trace and weight-function figures.")
@_guard
def cmd_fit(input_path, target, loss_kind, lam, seed, tol, max_iters, intercept, out_path, figures):
    """Fit one model per lambda; write model files and a JSON-lines report."""
    lambdas = _parse_grid(lam)
    data = ingest_csv(input_path, target)
    loss = LossSpec(loss_kind)
    out = Path(out_path)
    report_lines = []
    any_unconverged = False
    for lam_val in lambdas:
        config = FitConfig(lam=lam_val, max_outer_iters=max_iters, tol=tol,
                           seed=seed, intercept=intercept)
        model, report = fit(data, loss, config)
        meta = {
            "lambda": lam_val,
            "loss": loss_kind,
            "seed": seed,
            "objective": report.final_objective,
            "converged": report.converged,
            "iterations": report.iterations,
        }
        if len(lambdas) == 1:
            path = out
        else:
            path = out.with_name(f"{out.stem}-lam{lam_val:g}{out.suffix or '.json'}")
        path.write_text(serialize_model(model, meta), encoding="utf-8")
        report_lines.append({
            **meta,
            "model_file": path.name,
            "budget_used": report.budget_used,
            "objective_trace": [float(v) for v in report.objective_trace],
        })
        any_unconverged = any_unconverged or not report.converged
        if figures:
            from . import plots

            plots.render_fit_trace(report.objective_trace, path.with_suffix(".trace.png"))
            plots.render_model(model, path.with_suffix(".model.png"))
    report_path = out.with_suffix(".report.jsonl")
    report_path.write_text(
        "".join(json.dumps(line, sort_keys=True) + "\n" for line in report_lines),
        encoding="utf-8",
    )
    click.echo(f"wrote {len(lambdas)} model file(s), report at {report_path}")
    if any_unconverged:
        raise _Fail("fit did not converge within --max-iters", EXIT_NO_CONVERGENCE)


@main.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--extension", type=click.Choice(["clamp", "compact"]), default="clamp",
              show_default=True, help="Extrapolation mode outside the trained knots.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def cmd_predict(model_path, input_path, extension, out_path):
    """Predict for every row of a CSV feature file."""
    try:
        model, _ = deserialize_model(Path(model_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"cannot load model {model_path}: {exc}") from exc
    model = model.with_mode(extension)
    header, X = read_csv_columns(input_path)
    if X.shape[1] != model.p:
        raise DataError(
            f"model expects {model.p} feature columns, {input_path} has {X.shape[1]}"
        )
    preds = model.predict_matrix(X)
    lines = ["prediction"] + [repr(float(v)) for v in preds]
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote {preds.size} predictions to {out_path}")


@main.command("complexity")
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="CSV of features (use --target to drop a label column).")
@click.option("--target", default=None)
@click.option("--p", "p", type=int, default=None, help="Synthetic feature count.")
@click.option("--m", "m", type=int, default=None, help="Synthetic sample count.")
@click.option("--distribution", default="uniform", show_default=True,
              type=click.Choice(["uniform", "normal", "rademacher"]))
@click.option("--C", "budget", default=1.0, show_default=True, type=float)
@click.option("--kind", default="rademacher", show_default=True,
              type=click.Choice(["rademacher", "gaussian"]))
@click.option("--draws", default=10_000, show_default=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def cmd_complexity(input_path, target, p, m, distribution, budget, kind, draws, seed, out_path):
    """Estimate empirical complexity and compare to the theoretical bound."""
    if input_path is not None:
        data = ingest_csv(input_path, target)
    elif p is not None and m is not None:
        rng = np.random.Generator(np.random.Philox(key=seed))
        data = build_dataset(synthetic_features(p, m, distribution, rng), np.zeros(m))
    else:
        raise click.UsageError("provide --input or both --p and --m")
    report = estimate_complexity(data, budget, kind, draws, seed)
    doc = report.to_dict()
    doc.update({"C": budget, "seed": seed, "p": data.p, "m": data.m})
    Path(out_path).write_text(_canonical_json(doc), encoding="utf-8")
    click.echo(_canonical_json(doc), nl=False)
    if report.bound is not None and report.slack < -3.0 * report.std_error:
        raise _Fail(
            f"estimate {report.estimate:.6g} exceeds bound {report.bound:.6g}"
            f" by more than 3 standard errors",
            EXIT_BOUND_VIOLATION,
        )


@main.command("certify")
@click.option("--p", required=True, type=int)
@click.option("--m", required=True, type=int)
@click.option("--C", "budget", required=True, type=float)
@click.option("--rho", required=True, type=float)
@click.option("--c", "c_bound", required=True, type=float)
@click.option("--delta", required=True, type=float)
@click.option("--kind", default="uniform", show_default=True,
              type=click.Choice(["uniform", "erm"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def cmd_certify(p, m, budget, rho, c_bound, delta, kind, out_path):
    """Emit a finite-sample generalization certificate."""
    builder = uniform_deviation_bound if kind == "uniform" else erm_excess_bound
    cert = builder(p, m, budget, rho, c_bound, delta)
    doc = cert.to_dict()
    Path(out_path).write_text(_canonical_json(doc), encoding="utf-8")
    click.echo(_canonical_json(doc), nl=False)


@main.command("tightness")
@click.option("--p", required=True, type=int)
@click.option("--m", required=True, type=int)
@click.option("--draws", default=10_000, show_default=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=False, show_default=True)
@_guard
def cmd_tightness(p, m, draws, seed, out_path, figures):
    """Compare sign-classifier and TV-class complexities on hypercube data."""
    report = tightness_experiment(p, m, draws, seed)
    doc = report.to_dict()
    out = Path(out_path)
    out.write_text(_canonical_json(doc), encoding="utf-8")
    csv_path = out.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        keys = sorted(doc)
        writer.writerow(keys)
        writer.writerow([doc[k] for k in keys])
    if figures:
        from . import plots

        plots.render_tightness(report, out.with_suffix(".png"))
    click.echo(_canonical_json(doc), nl=False)


@main.command("scaling")
@click.option("--p-grid", required=True, help="Comma-separated feature counts.")
@click.option("--m-grid", required=True, help="Comma-separated sample counts.")
@click.option("--C", "budget", default=1.0, show_default=True, type=float)
@click.option("--draws", default=10_000, show_default=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--distribution", default="uniform", show_default=True,
              type=click.Choice(["uniform", "normal", "rademacher"]))
@click.option("--kind", default="rademacher", show_default=True,
              type=click.Choice(["rademacher", "gaussian"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--figures/--no-figures", default=False, show_default=True)
@_guard
def cmd_scaling(p_grid, m_grid, budget, draws, seed, distribution, kind, out_path, figures):
    """Tabulate complexity estimates against bounds over a (p, m) grid."""
    rows = scaling_experiment(
        _parse_grid(p_grid, int), _parse_grid(m_grid, int),
        budget, draws, seed, distribution, kind,
    )
    out = Path(out_path)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "m", "estimate", "std_error", "bound", "ratio"])
        for r in rows:
            writer.writerow([r["p"], r["m"], repr(r["estimate"]), repr(r["std_error"]),
                             repr(r["bound"]), repr(r["ratio"])])
    if figures:
        from . import plots

        plots.render_scaling(rows, out.with_suffix(".png"))
    click.echo(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    sys.exit(main())
