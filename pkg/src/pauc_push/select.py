"""Hyperparameter search for the weighted lasso.

The main procedure runs outer stratified k-fold CV over the non-diseased
weight grid with a nested inner stratified k-fold CV selecting the l1
strength, both scored by held-out partial AUC.  The baseline is the
single-level lasso tuned by held-out logistic deviance at weight 1.

Every training split refits its own standardization inside `fit`, so
held-out rows never leak into the statistics, the path grid, or the
penalty choice.  All randomness flows from the spec seed through
`derive_seed`, and grid points / folds are independent work items, so
running them on a thread pool cannot change any reported number.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, FoldAssignment, stratified_folds
from .errors import ColumnMismatch, InfeasibleFolds
from .metrics import PaucSpec, PaucResult, logistic_losses, pauc_estimate
from .solver import (
    FitConfig,
    FitReport,
    LinearModel,
    fit,
    fit_path,
    lambda_max,
    predict,
)

OBJECTIVE_PAUC = "pauc"
OBJECTIVE_DEVIANCE = "deviance"

DEFAULT_WEIGHT_GRID = (1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0)


def derive_seed(seed: int, *tags) -> int:
    """Stable 64-bit child seed from a root seed and context tags."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    words = [int(seed)] + [zlib.crc32(str(t).encode("utf-8")) for t in tags]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SearchSpec:
    """Grids, fold counts and objective for hyperparameter search.

    ``lambda_grid`` of None means an automatic geometric path of
    ``n_lambdas`` values from lambda_max down to
    ``lambda_min_ratio * lambda_max``, recomputed on each training portion.
    Weight ties resolve to the smallest weight; lambda ties to the largest
    (most regularized) value.
    """

    weight_grid: tuple = DEFAULT_WEIGHT_GRID
    lambda_grid: tuple | None = None
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-3
    outer_k: int = 5
    inner_k: int = 5
    pauc: PaucSpec = PaucSpec(0.2)
    seed: int = 0
    objective: str = OBJECTIVE_PAUC

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weight_grid)
        if not weights or any(w < 1.0 for w in weights):
            raise ValueError("weight_grid must be non-empty with every weight >= 1")
        if list(weights) != sorted(set(weights)):
            raise ValueError("weight_grid must be strictly ascending")
        object.__setattr__(self, "weight_grid", weights)
        if self.lambda_grid is not None:
            grid = tuple(float(l) for l in self.lambda_grid)
            if not grid or any(l <= 0 for l in grid):
                raise ValueError("lambda_grid must be positive")
            if any(b >= a for a, b in zip(grid, grid[1:])):
                raise ValueError("lambda_grid must be strictly descending")
            object.__setattr__(self, "lambda_grid", grid)
        if self.outer_k < 2 or self.inner_k < 2:
            raise ValueError("outer_k and inner_k must be at least 2")
        if self.n_lambdas < 1 or not (0 < self.lambda_min_ratio < 1):
            raise ValueError("invalid automatic lambda path settings")
        if self.objective not in (OBJECTIVE_PAUC, OBJECTIVE_DEVIANCE):
            raise ValueError("objective must be 'pauc' or 'deviance'")


@dataclass(frozen=True)
class CvReport:
    """Cross-validation outcome.

    ``outer_scores[wi, fold]`` holds the held-out objective value (partial
    AUC for the push search, deviance for the baseline) and
    ``per_fold_lambdas[wi, fold]`` the inner-selected l1 strengths.
    """

    objective: str
    weight_grid: tuple
    outer_scores: np.ndarray
    per_fold_lambdas: np.ndarray
    chosen_w: float
    chosen_lambda: float
    final_model: LinearModel
    final_fit: FitReport
    selected_markers: tuple[str, ...]
    pauc: PaucSpec
    seed: int

    def to_dict(self) -> dict:
        rows = []
        for wi, w in enumerate(self.weight_grid):
            for fold in range(self.outer_scores.shape[1]):
                rows.append(
                    {
                        "w": w,
                        "fold": fold,
                        "score": float(self.outer_scores[wi, fold]),
                        "lambda": float(self.per_fold_lambdas[wi, fold]),
                    }
                )
        return {
            "objective": self.objective,
            "t": self.pauc.t,
            "tie_policy": self.pauc.tie_policy,
            "seed": self.seed,
            "weight_grid": list(self.weight_grid),
            "scores": rows,
            "chosen_w": self.chosen_w,
            "chosen_lambda": self.chosen_lambda,
            "selected_markers": list(self.selected_markers),
        }


def _base_config(config: FitConfig | None) -> FitConfig:
    if config is None:
        return FitConfig(penalty="lasso")
    if config.penalty not in ("lasso", "elastic_net"):
        raise ValueError("search requires an l1 penalty in the base config")
    return config


def _ceil_div(count: int, k: int) -> int:
    return -(-count // k)


def _check_feasible(data: Dataset, spec: SearchSpec) -> None:
    for count, label in ((data.n_diseased, "diseased"), (data.n_non_diseased, "non-diseased")):
        if count < spec.outer_k:
            raise InfeasibleFolds(
                f"only {count} {label} samples for outer_k={spec.outer_k}"
            )
        worst_train = count - _ceil_div(count, spec.outer_k)
        if worst_train < spec.inner_k:
            raise InfeasibleFolds(
                f"outer training split keeps only {worst_train} {label} samples, "
                f"fewer than inner_k={spec.inner_k}"
            )


def _path_grid(train: Dataset, w: float, spec: SearchSpec, base: FitConfig) -> np.ndarray:
    if spec.lambda_grid is not None:
        return np.asarray(spec.lambda_grid, dtype=np.float64)
    cfg = replace(base, w=float(w))
    lmax = lambda_max(train, cfg)
    return np.geomspace(lmax, lmax * spec.lambda_min_ratio, spec.n_lambdas)


def _path_scores(reports: list[FitReport], markers: np.ndarray) -> np.ndarray:
    """Score a held-out matrix under every model of a path: (rows, n_lambda)."""
    coef = np.column_stack([r.model.coefficients for r in reports])
    intercepts = np.array([r.model.intercept for r in reports])
    return markers @ coef + intercepts


def _cv_curve(
    train: Dataset,
    folds: FoldAssignment,
    w: float,
    grid: np.ndarray,
    spec: SearchSpec,
    base: FitConfig,
    objective: str,
) -> np.ndarray:
    """Mean held-out objective per lambda over the folds of `folds`."""
    total = np.zeros(grid.size)
    cfg = replace(base, w=float(w))
    for fold in range(folds.k):
        tr = train.subset(folds.training_indices(fold))
        va = train.subset(folds.heldout_indices(fold))
        reports = fit_path(tr, cfg, lambdas=grid)
        scores = _path_scores(reports, va.markers)
        for li in range(grid.size):
            if objective == OBJECTIVE_PAUC:
                total[li] += pauc_estimate(scores[:, li], va.labels, spec.pauc).value
            else:
                # held-out logistic deviance at weight 1 (summed per fold)
                total[li] += logistic_losses(scores[:, li], va.labels, 1.0)[0]
    return total / folds.k


def _pick_lambda(curve: np.ndarray, grid: np.ndarray, maximize: bool) -> float:
    # grids descend, so the first argmax/argmin is the most regularized tie
    best = int(np.argmax(curve)) if maximize else int(np.argmin(curve))
    return float(grid[best])


def _outer_fold_work(
    data: Dataset,
    outer: FoldAssignment,
    inner: FoldAssignment,
    fold: int,
    w: float,
    spec: SearchSpec,
    base: FitConfig,
):
    """Inner CV, refit and held-out scoring for one (weight, outer fold) cell.

    Touches only the outer-training rows until the final held-out scoring,
    which is what the leakage tests pin down.
    """
    train = data.subset(outer.training_indices(fold))
    heldout = data.subset(outer.heldout_indices(fold))
    grid = _path_grid(train, w, spec, base)
    curve = _cv_curve(train, inner, w, grid, spec, base, OBJECTIVE_PAUC)
    lam = _pick_lambda(curve, grid, maximize=True)
    report = fit(train, replace(base, w=float(w), lam1=lam))
    held_scores = predict(report.model, heldout.markers)
    score = pauc_estimate(held_scores, heldout.labels, spec.pauc).value
    return lam, score, report


def _run_tasks(tasks, runner, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(runner, tasks))
    return [runner(t) for t in tasks]


def select_weight_and_lambda(
    data: Dataset,
    spec: SearchSpec,
    config: FitConfig | None = None,
    threads: int = 1,
) -> CvReport:
    """Nested CV over (weight, lambda) with held-out partial AUC as objective.

    For every weight and outer fold, an inner CV on the outer-training
    portion picks lambda(w, fold); the refit model is scored on the held-out
    fold.  The weight with the best mean outer score wins (smallest weight
    on ties), its lambda is then re-selected by a fresh CV on the full data,
    and the final model is refit on everything.
    """
    if spec.objective != OBJECTIVE_PAUC:
        raise ValueError("select_weight_and_lambda uses the pauc objective")
    base = _base_config(config)
    _check_feasible(data, spec)

    outer = stratified_folds(data, spec.outer_k, derive_seed(spec.seed, "outer"))
    inner = [
        stratified_folds(
            data.subset(outer.training_indices(fold)),
            spec.inner_k,
            derive_seed(spec.seed, "inner", fold),
        )
        for fold in range(spec.outer_k)
    ]

    n_w = len(spec.weight_grid)
    scores = np.zeros((n_w, spec.outer_k))
    lambdas = np.zeros((n_w, spec.outer_k))
    tasks = [(wi, fold) for wi in range(n_w) for fold in range(spec.outer_k)]

    def runner(task):
        wi, fold = task
        return _outer_fold_work(
            data, outer, inner[fold], fold, spec.weight_grid[wi], spec, base
        )

    for (wi, fold), (lam, score, _) in zip(tasks, _run_tasks(tasks, runner, threads)):
        lambdas[wi, fold] = lam
        scores[wi, fold] = score

    mean_by_w = scores.mean(axis=1)
    best_wi = int(np.argmax(mean_by_w))  # ascending grid: ties go to smallest w
    chosen_w = spec.weight_grid[best_wi]

    final_folds = stratified_folds(data, spec.inner_k, derive_seed(spec.seed, "final"))
    full_grid = _path_grid(data, chosen_w, spec, base)
    full_curve = _cv_curve(data, final_folds, chosen_w, full_grid, spec, base, OBJECTIVE_PAUC)
    chosen_lambda = _pick_lambda(full_curve, full_grid, maximize=True)

    final_fit = fit(data, replace(base, w=float(chosen_w), lam1=chosen_lambda))
    selected = tuple(data.marker_names[j] for j in final_fit.active_set)
    return CvReport(
        objective=OBJECTIVE_PAUC,
        weight_grid=spec.weight_grid,
        outer_scores=scores,
        per_fold_lambdas=lambdas,
        chosen_w=float(chosen_w),
        chosen_lambda=chosen_lambda,
        final_model=final_fit.model,
        final_fit=final_fit,
        selected_markers=selected,
        pauc=spec.pauc,
        seed=spec.seed,
    )


def baseline_lasso(
    data: Dataset,
    spec: SearchSpec,
    config: FitConfig | None = None,
    threads: int = 1,
) -> CvReport:
    """Plain lasso at weight 1 with lambda tuned by held-out deviance.

    The lambda grid is computed once on the full data (the usual CV-lasso
    convention) and each fold refits its own standardization.
    """
    base = replace(_base_config(config), w=1.0)
    if min(data.n_diseased, data.n_non_diseased) < spec.outer_k:
        raise InfeasibleFolds(
            f"need {spec.outer_k} samples per class for {spec.outer_k}-fold CV"
        )
    folds = stratified_folds(data, spec.outer_k, derive_seed(spec.seed, "baseline"))
    grid = _path_grid(data, 1.0, spec, base)

    def runner(fold):
        tr = data.subset(folds.training_indices(fold))
        va = data.subset(folds.heldout_indices(fold))
        reports = fit_path(tr, base, lambdas=grid)
        scores = _path_scores(reports, va.markers)
        return np.array(
            [logistic_losses(scores[:, li], va.labels, 1.0)[0] for li in range(grid.size)]
        )

    curves = np.vstack(_run_tasks(list(range(spec.outer_k)), runner, threads))
    mean_curve = curves.mean(axis=0)
    chosen_lambda = _pick_lambda(mean_curve, grid, maximize=False)
    chosen_col = int(np.argmin(mean_curve))

    final_fit = fit(data, replace(base, lam1=chosen_lambda))
    selected = tuple(data.marker_names[j] for j in final_fit.active_set)
    per_fold_best = np.array([[float(grid[int(np.argmin(c))]) for c in curves]])
    return CvReport(
        objective=OBJECTIVE_DEVIANCE,
        weight_grid=(1.0,),
        outer_scores=curves[:, chosen_col].reshape(1, -1),
        per_fold_lambdas=per_fold_best,
        chosen_w=1.0,
        chosen_lambda=chosen_lambda,
        final_model=final_fit.model,
        final_fit=final_fit,
        selected_markers=selected,
        pauc=spec.pauc,
        seed=spec.seed,
    )


def external_scores(model: LinearModel, test: Dataset) -> np.ndarray:
    """Scores on an external dataset, aligning marker columns by name."""
    if model.marker_names is None:
        if test.p != model.coefficients.size:
            raise ColumnMismatch(
                f"model has {model.coefficients.size} coefficients, data has {test.p} columns"
            )
        markers = test.markers
    else:
        index = {name: j for j, name in enumerate(test.marker_names)}
        missing = [name for name in model.marker_names if name not in index]
        if missing:
            raise ColumnMismatch(f"dataset lacks model columns: {missing[:5]}")
        order = np.array([index[name] for name in model.marker_names], dtype=np.int64)
        markers = test.markers[:, order]
    return model.intercept + markers @ model.coefficients


def evaluate_external(model: LinearModel, test: Dataset, pauc: PaucSpec) -> PaucResult:
    """Partial AUC of a fitted model on an untouched test set."""
    return pauc_estimate(external_scores(model, test), test.labels, pauc)
