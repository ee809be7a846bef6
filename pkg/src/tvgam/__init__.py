"""Total-variation-regularized additive models with complexity certificates."""

from .bounds import (
    Certificate,
    empirical_deviation,
    erm_excess_bound,
    uniform_deviation_bound,
)
from .complexity import (
    BoundInputs,
    ComplexityReport,
    TightnessReport,
    estimate_complexity,
    scaling_experiment,
    synthetic_features,
    theorem_bound,
    tightness_experiment,
)
from .core import (
    DataError,
    Dataset,
    GamModel,
    LossSpec,
    StepFunction,
    build_dataset,
    loss_value,
    predict,
)
from .solver import (
    FitConfig,
    FitReport,
    ProxProblem,
    fit,
    fit_oracle_l1,
    objective,
    prox_fused_boundary,
    prox_subgradient_residual,
)
from .tv import (
    PartialSums,
    TriangleWeights,
    merge_ties,
    min_tv_interpolant,
    partial_sums,
    sup_gam1,
    total_variation,
    tv_of_values,
    v_to_w,
    w_to_step,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "Certificate",
    "ComplexityReport",
    "DataError",
    "Dataset",
    "FitConfig",
    "FitReport",
    "GamModel",
    "LossSpec",
    "PartialSums",
    "ProxProblem",
    "StepFunction",
    "TightnessReport",
    "TriangleWeights",
    "build_dataset",
    "empirical_deviation",
    "erm_excess_bound",
    "estimate_complexity",
    "fit",
    "fit_oracle_l1",
    "loss_value",
    "merge_ties",
    "min_tv_interpolant",
    "objective",
    "partial_sums",
    "predict",
    "prox_fused_boundary",
    "prox_subgradient_residual",
    "scaling_experiment",
    "sup_gam1",
    "synthetic_features",
    "theorem_bound",
    "tightness_experiment",
    "total_variation",
    "tv_of_values",
    "uniform_deviation_bound",
    "v_to_w",
    "w_to_step",
]
