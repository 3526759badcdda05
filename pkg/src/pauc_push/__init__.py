"""Partial-AUC targeted marker selection and model fitting.

Binary classifiers are built by weighted penalized logistic regression
("logistic push"): non-diseased observations receive a weight w >= 1 so
that minimizing the logistic loss pushes high-scoring non-diseased
subjects down the ranked list, which raises the partial AUC over a low
false-positive-rate window.  The package provides the nonparametric
partial-AUC estimator, the coordinate-descent solver, nested
cross-validation for tuning (w, lambda), and a replicated simulation
benchmark, all behind a deterministic CLI.
"""

from ._kernels import backend as kernel_backend
from .data import (
    Dataset,
    FoldAssignment,
    Standardization,
    load_csv,
    standardize,
    stratified_folds,
)
from .metrics import (
    PaucResult,
    PaucSpec,
    RocCurve,
    logistic_losses,
    pauc_estimate,
    pnorm_push_loss,
    roc_curve,
    zero_one_push_loss,
)
from .select import (
    CvReport,
    SearchSpec,
    baseline_lasso,
    derive_seed,
    evaluate_external,
    external_scores,
    select_weight_and_lambda,
)
from .simulate import (
    BenchReport,
    BlockParams,
    SimDesign,
    block_auc,
    block_pauc,
    generate,
    permute_labels,
    run_benchmark,
)
from .solver import (
    FitConfig,
    FitReport,
    LinearModel,
    default_lambda_path,
    destandardize_model,
    fit,
    fit_path,
    lambda_max,
    loss_gradient,
    model_from_dict,
    model_to_dict,
    predict,
    weighted_logistic_loss,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "BlockParams",
    "CvReport",
    "Dataset",
    "FitConfig",
    "FitReport",
    "FoldAssignment",
    "LinearModel",
    "PaucResult",
    "PaucSpec",
    "RocCurve",
    "SearchSpec",
    "SimDesign",
    "Standardization",
    "baseline_lasso",
    "block_auc",
    "block_pauc",
    "default_lambda_path",
    "derive_seed",
    "destandardize_model",
    "evaluate_external",
    "external_scores",
    "fit",
    "fit_path",
    "generate",
    "kernel_backend",
    "lambda_max",
    "load_csv",
    "logistic_losses",
    "loss_gradient",
    "model_from_dict",
    "model_to_dict",
    "pauc_estimate",
    "permute_labels",
    "pnorm_push_loss",
    "predict",
    "roc_curve",
    "run_benchmark",
    "select_weight_and_lambda",
    "standardize",
    "stratified_folds",
    "weighted_logistic_loss",
    "zero_one_push_loss",
]
