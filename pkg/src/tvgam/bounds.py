"""Finite-sample generalization certificates.

Both certificates combine the complexity rate term with a confidence term;
they require a loss with a declared Lipschitz constant and bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, GamModel, LossSpec

__all__ = [
    "Certificate",
    "uniform_deviation_bound",
    "erm_excess_bound",
    "empirical_deviation",
]


@dataclass(frozen=True)
class Certificate:
    kind: str
    value: float
    complexity_term: float
    confidence_term: float
    p: int
    m: int
    C: float
    rho: float
    c: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "complexity_term": self.complexity_term,
            "confidence_term": self.confidence_term,
            "p": self.p,
            "m": self.m,
            "C": self.C,
            "rho": self.rho,
            "c": self.c,
            "delta": self.delta,
        }


def _validate(p, m, C, rho, c, delta):
    if p <= 2:
        raise ValueError("certificates are proven for p > 2 only")
    if m < 1:
        raise ValueError("m must be at least 1")
    if rho is None or c is None:
        raise ValueError(
            "loss has an unbounded Lipschitz constant or bound; declare a"
            " finite prediction/target range (or a clip level) first"
        )
    if C <= 0 or rho <= 0 or c <= 0:
        raise ValueError("C, rho, and c must be positive")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")


def _terms(p, m, C, rho, c, delta):
    complexity = rho * C * np.sqrt(5.0 * np.ceil(np.log(p)) / m)
    confidence = c * np.sqrt(2.0 * np.log(2.0 / delta) / m)
    return float(complexity), float(confidence)


def uniform_deviation_bound(p, m, C, rho, c, delta) -> Certificate:
    """High-probability bound on the class-uniform train/population gap."""
    _validate(p, m, C, rho, c, delta)
    complexity, confidence = _terms(p, m, C, rho, c, delta)
    return Certificate(
        kind="uniform_deviation",
        value=complexity + confidence,
        complexity_term=complexity,
        confidence_term=confidence,
        p=p,
        m=m,
        C=C,
        rho=rho,
        c=c,
        delta=delta,
    )


def erm_excess_bound(p, m, C, rho, c, delta) -> Certificate:
    """High-probability bound on the ERM excess risk over the class optimum."""
    _validate(p, m, C, rho, c, delta)
    complexity, confidence = _terms(p, m, C, rho, c, delta)
    return Certificate(
        kind="erm_excess",
        value=complexity + 5.0 * confidence,
        complexity_term=complexity,
        confidence_term=5.0 * confidence,
        p=p,
        m=m,
        C=C,
        rho=rho,
        c=c,
        delta=delta,
    )


def empirical_deviation(
    models, train: Dataset, test: Dataset, loss: LossSpec
) -> float:
    """Largest realized (test risk - train risk) over the supplied models.

    Risks are mean losses.  Compare against a certificate built with the
    smallest budget C covering every model's ``budget_used``.
    """
    models = list(models)
    if not models:
        raise ValueError("empty model sweep")
    if train.p != test.p:
        raise ValueError("train and test dimensionality differ")
    gap = -np.inf
    for model in models:
        if not isinstance(model, GamModel):
            raise TypeError("sweep entries must be GamModel instances")
        tr = float(np.mean(loss.values(model.predict_matrix(train.features), train.targets)))
        te = float(np.mean(loss.values(model.predict_matrix(test.features), test.targets)))
        gap = max(gap, te - tr)
    return float(gap)
