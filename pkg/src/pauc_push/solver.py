"""Weighted penalized logistic regression via IRLS + cyclic coordinate descent.

The smooth objective is the class-weighted logistic loss

    L(b0, beta) = sum_j log(1 + exp(-f_j)) + w * sum_k log(1 + exp(f_k)),

with linear scores f = b0 + X beta, j over diseased and k over non-diseased
rows.  The optional penalty is lam1 * ||beta||_1 for the lasso,
(lam2 / 2) * ||beta||_2^2 for the ridge, or their sum for the elastic net;
the intercept is never penalized.  Each outer iteration builds the usual
quadratic approximation with per-observation curvature
v_i * mu_i * (1 - mu_i) (v_i the class weight) and solves it by cyclic
coordinate descent with soft-thresholding, using an active-set strategy.
Warm starts make descending regularization paths cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import _kernels
from .data import Dataset, Standardization, standardize
from .errors import DimensionMismatch, NonFiniteLoss

PENALTIES = ("none", "lasso", "ridge", "elastic_net")

# Floor on the IRLS curvature weights; guards division blow-ups when the
# fitted probabilities saturate.
_CURVATURE_FLOOR = 1e-9

# Coefficients below this magnitude after an l1 fit are summation dust from
# an exact lambda_max boundary, not genuine selections.
_COEF_SNAP = 1e-12

_MAX_HALVINGS = 40


@dataclass(frozen=True)
class FitConfig:
    """Class weight, penalty and convergence controls for `fit`.

    ``w`` is the weight applied to every non-diseased observation (w = 1
    recovers plain logistic regression).  ``tol`` bounds the largest
    absolute coefficient change, and ``max_iters`` caps the total number of
    coordinate sweeps.
    """

    w: float = 1.0
    penalty: str = "none"
    lam1: float = 0.0
    lam2: float = 0.0
    max_iters: int = 100_000
    tol: float = 1e-7
    standardize: bool = True

    def __post_init__(self):
        if self.w < 1.0:
            raise ValueError(f"w must be >= 1, got {self.w}")
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}")
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("penalty strengths must be non-negative")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.penalty == "none" and (self.lam1 > 0 or self.lam2 > 0):
            raise ValueError("penalty='none' is incompatible with nonzero strengths")
        if self.penalty == "lasso" and self.lam2 > 0:
            raise ValueError("penalty='lasso' uses lam1 only")
        if self.penalty == "ridge" and self.lam1 > 0:
            raise ValueError("penalty='ridge' uses lam2 only")

    @property
    def l1(self) -> float:
        return self.lam1 if self.penalty in ("lasso", "elastic_net") else 0.0

    @property
    def l2(self) -> float:
        return self.lam2 if self.penalty in ("ridge", "elastic_net") else 0.0


@dataclass(frozen=True)
class LinearModel:
    """Linear scoring rule: score(x) = intercept + coefficients . x."""

    intercept: float
    coefficients: np.ndarray
    on_standardized_scale: bool = False
    marker_names: tuple[str, ...] | None = None

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=np.float64)
        if coef.ndim != 1:
            raise ValueError("coefficients must be 1-d")
        if not (math.isfinite(self.intercept) and np.all(np.isfinite(coef))):
            raise ValueError("model parameters must be finite")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        if self.marker_names is not None:
            names = self.marker_names
            if type(names) is not tuple:
                names = tuple(str(n) for n in names)
            if len(names) != coef.size:
                raise ValueError("marker_names length must match coefficients")
            object.__setattr__(self, "marker_names", names)


@dataclass(frozen=True)
class FitReport:
    """Fit outcome: original-scale model plus solver diagnostics.

    ``final_loss`` is the penalized objective on the scale the problem was
    actually solved on (standardized when config.standardize is set);
    ``loss_trace`` records it per outer iteration and is non-increasing.
    ``active_set`` lists columns with nonzero coefficients.
    """

    model: LinearModel
    iterations: int
    final_loss: float
    converged: bool
    active_set: tuple[int, ...]
    standardized_model: LinearModel | None = None
    standardization: Standardization | None = None
    loss_trace: tuple[float, ...] = ()


class _Problem:
    """Prepared arrays shared by fit and fit_path (fitting scale)."""

    __slots__ = ("XT", "XT2", "y", "v", "pen_cols", "std", "names", "b0_null")

    def __init__(self, XT, y, v, pen_cols, std, names):
        self.XT = XT
        self.XT2 = XT * XT
        self.y = y
        self.v = v
        self.pen_cols = pen_cols
        self.std = std
        self.names = names
        self.b0_null = math.log(float((v * y).sum()) / float((v * (1.0 - y)).sum()))


def _prepare(data: Dataset, config: FitConfig) -> _Problem:
    if config.standardize:
        std_data, std = standardize(data)
        X = std_data.markers
        zero = set(std.zero_variance)
        pen_cols = np.array(
            [j for j in range(data.p) if j not in zero], dtype=np.int64
        )
    else:
        X = data.markers
        std = None
        pen_cols = np.arange(data.p, dtype=np.int64)
    XT = np.ascontiguousarray(X.T)
    y = ((data.labels + 1) // 2).astype(np.float64)
    v = np.where(y == 1.0, 1.0, float(config.w))
    return _Problem(XT, y, v, pen_cols, std, data.marker_names)


def _smooth_loss(f: np.ndarray, y: np.ndarray, v: np.ndarray) -> float:
    # v-weighted logistic negative log-likelihood; log1p-stable for any f
    return float((v * (np.logaddexp(0.0, f) - y * f)).sum())


def _penalty_value(beta: np.ndarray, l1: float, l2: float) -> float:
    value = 0.0
    if l1 > 0:
        value += l1 * float(np.abs(beta).sum())
    if l2 > 0:
        value += 0.5 * l2 * float(np.dot(beta, beta))
    return value


class _FitState:
    __slots__ = ("intercept", "beta", "iterations", "converged", "loss", "trace")

    def __init__(self, intercept, beta, iterations, converged, loss, trace):
        self.intercept = intercept
        self.beta = beta
        self.iterations = iterations
        self.converged = converged
        self.loss = loss
        self.trace = trace


def _fit_prepared(prob: _Problem, config: FitConfig, warm=None, l1=None, l2=None) -> _FitState:
    XT, y, v = prob.XT, prob.y, prob.v
    p = XT.shape[0]
    if l1 is None:
        l1 = config.l1
    if l2 is None:
        l2 = config.l2
    tol = config.tol
    budget = config.max_iters

    if warm is None:
        b0 = prob.b0_null
        beta = np.zeros(p)
    else:
        b0 = float(warm[0])
        beta = np.array(warm[1], dtype=np.float64, copy=True)
        if beta.shape != (p,):
            raise DimensionMismatch("warm start has wrong coefficient count")

    f = b0 + beta @ XT
    loss = _smooth_loss(f, y, v) + _penalty_value(beta, l1, l2)
    trace = [loss]
    sweeps = 0
    converged = False
    box = np.empty(1)

    while True:
        mu = expit(f)
        omega = v * (mu * (1.0 - mu))
        np.maximum(omega, _CURVATURE_FLOOR * v, out=omega)
        u = v * (mu - y)
        col_curv = prob.XT2 @ omega
        sum_omega = float(omega.sum())
        b0_prev = b0
        beta_prev = beta.copy()
        loss_prev = loss

        box[0] = b0
        delta = _kernels.cd_sweep(
            XT, u, omega, beta, box, prob.pen_cols, col_curv, l1, l2, sum_omega, True
        )
        sweeps += 1
        while delta >= tol and sweeps < budget:
            active = prob.pen_cols[beta[prob.pen_cols] != 0.0]
            if active.size:
                used, _ = _kernels.cd_solve(
                    XT, u, omega, beta, box, active, col_curv, l1, l2,
                    sum_omega, True, tol, budget - sweeps,
                )
                sweeps += int(used)
            if sweeps >= budget:
                break
            delta = _kernels.cd_sweep(
                XT, u, omega, beta, box, prob.pen_cols, col_curv, l1, l2,
                sum_omega, True,
            )
            sweeps += 1
        b0 = float(box[0])

        f = b0 + beta @ XT
        loss = _smooth_loss(f, y, v) + _penalty_value(beta, l1, l2)
        # The mu(1-mu) quadratic is not a global majorizer, so guard against
        # the rare overshoot by stepping back toward the previous iterate.
        halvings = 0
        while loss > loss_prev and halvings < _MAX_HALVINGS:
            b0 = 0.5 * (b0 + b0_prev)
            beta = 0.5 * (beta + beta_prev)
            f = b0 + beta @ XT
            loss = _smooth_loss(f, y, v) + _penalty_value(beta, l1, l2)
            halvings += 1
        if loss > loss_prev:
            b0, beta, loss = b0_prev, beta_prev, loss_prev
            f = b0 + beta @ XT
        if not math.isfinite(loss):
            raise NonFiniteLoss("penalized objective became non-finite")
        trace.append(loss)

        outer_delta = abs(b0 - b0_prev)
        if p:
            outer_delta = max(outer_delta, float(np.max(np.abs(beta - beta_prev))))
        if outer_delta < tol:
            converged = True
            break
        if sweeps >= budget:
            break

    if l1 > 0:
        dust = np.abs(beta) < _COEF_SNAP
        if np.any(dust & (beta != 0.0)):
            beta = np.where(dust, 0.0, beta)
            f = b0 + beta @ XT
            loss = _smooth_loss(f, y, v) + _penalty_value(beta, l1, l2)

    return _FitState(b0, beta, sweeps, converged, loss, tuple(trace))


def _report(prob: _Problem, state: _FitState) -> FitReport:
    active = tuple(int(j) for j in np.flatnonzero(state.beta != 0.0))
    if prob.std is not None:
        std_model = LinearModel(state.intercept, state.beta, True, prob.names)
        model = destandardize_model(std_model, prob.std)
        return FitReport(
            model, state.iterations, state.loss, state.converged, active,
            std_model, prob.std, state.trace,
        )
    model = LinearModel(state.intercept, state.beta, False, prob.names)
    return FitReport(
        model, state.iterations, state.loss, state.converged, active,
        None, None, state.trace,
    )


def fit(data: Dataset, config: FitConfig, warm_start: LinearModel | None = None) -> FitReport:
    """Minimize the weighted logistic objective plus the configured penalty.

    With config.standardize the problem is solved on standardized columns
    and the reported model is mapped back to the original scale (the
    standardized one is kept alongside).  A warm start must live on the
    fitting scale.  Separable data under penalty='none' ends with
    converged=False at the sweep budget rather than an error.
    """
    prob = _prepare(data, config)
    warm = None
    if warm_start is not None:
        warm = (warm_start.intercept, warm_start.coefficients)
    state = _fit_prepared(prob, config, warm)
    return _report(prob, state)


def fit_path(
    data: Dataset,
    config: FitConfig,
    lambdas=None,
    n_lambdas: int = 100,
    lambda_min_ratio: float = 1e-3,
) -> list[FitReport]:
    """Fit a descending l1 path with warm starts.

    ``lambdas`` must be strictly descending and positive; when omitted, a
    geometric grid from lambda_max (null model optimal) down to
    lambda_min_ratio * lambda_max is used.  The config's penalty must have
    an l1 component; lam2 is held fixed along the path.
    """
    if config.penalty not in ("lasso", "elastic_net"):
        raise ValueError("fit_path requires penalty 'lasso' or 'elastic_net'")
    prob = _prepare(data, config)
    if lambdas is None:
        lmax = _lambda_max_prepared(prob)
        lambdas = np.geomspace(lmax, lmax * lambda_min_ratio, n_lambdas)
    else:
        lambdas = np.asarray(lambdas, dtype=np.float64)
        if lambdas.ndim != 1 or lambdas.size == 0:
            raise ValueError("lambdas must be a non-empty 1-d sequence")
        if np.any(lambdas <= 0) or np.any(np.diff(lambdas) >= 0):
            raise ValueError("lambdas must be strictly descending and positive")
    reports = []
    warm = None
    l2 = config.l2
    for lam in lambdas:
        state = _fit_prepared(prob, config, warm, l1=float(lam), l2=l2)
        warm = (state.intercept, state.beta)
        reports.append(_report(prob, state))
    return reports


def _lambda_max_prepared(prob: _Problem) -> float:
    # Gradient of the smooth loss at the intercept-only optimum; the null
    # model satisfies the l1 stationarity condition for any lam1 >= this.
    mu0 = float(np.sum(prob.v * prob.y)) / float(np.sum(prob.v))
    g = prob.XT @ (prob.v * (prob.y - mu0))
    if prob.pen_cols.size == 0:
        return 0.0
    return float(np.max(np.abs(g[prob.pen_cols])))


def lambda_max(data: Dataset, config: FitConfig) -> float:
    """Smallest l1 strength at which the all-zero coefficient vector is optimal."""
    return _lambda_max_prepared(_prepare(data, config))


def default_lambda_path(
    data: Dataset, config: FitConfig, n_lambdas: int = 100, lambda_min_ratio: float = 1e-3
) -> np.ndarray:
    """Geometric l1 grid spanning [lambda_min_ratio * lambda_max, lambda_max]."""
    lmax = lambda_max(data, config)
    return np.geomspace(lmax, lmax * lambda_min_ratio, n_lambdas)


def predict(model: LinearModel, markers) -> np.ndarray:
    """Linear scores intercept + markers @ coefficients.

    The marker matrix must live on the same scale as the model
    (destandardize the model first if needed).
    """
    X = np.asarray(markers, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.coefficients.size:
        raise DimensionMismatch(
            f"expected {model.coefficients.size} marker columns, got "
            f"{X.shape[1] if X.ndim == 2 else 'non-matrix input'}"
        )
    return model.intercept + X @ model.coefficients


def destandardize_model(model: LinearModel, std: Standardization) -> LinearModel:
    """Map a standardized-scale model back to the original marker scale."""
    if model.coefficients.size != std.means.size:
        raise DimensionMismatch("model and standardization disagree on column count")
    coef = model.coefficients / std.scales
    intercept = model.intercept - float(np.dot(model.coefficients, std.means / std.scales))
    return LinearModel(intercept, coef, False, model.marker_names)


def weighted_logistic_loss(model: LinearModel, data: Dataset, config: FitConfig) -> float:
    """Exact penalized objective value of the model on the given data."""
    f = predict(model, data.markers)
    y = ((data.labels + 1) // 2).astype(np.float64)
    v = np.where(y == 1.0, 1.0, float(config.w))
    return _smooth_loss(f, y, v) + _penalty_value(model.coefficients, config.l1, config.l2)


def loss_gradient(model: LinearModel, data: Dataset, config: FitConfig):
    """Gradient of the unpenalized weighted loss.

    Returns (d_intercept, d_coefficients); subgradient handling for the l1
    term is the coordinate updates' business, not this function's.
    """
    f = predict(model, data.markers)
    y = ((data.labels + 1) // 2).astype(np.float64)
    v = np.where(y == 1.0, 1.0, float(config.w))
    g = v * (expit(f) - y)
    return float(np.sum(g)), data.markers.T @ g


def model_to_dict(
    model: LinearModel,
    std: Standardization | None = None,
    config: FitConfig | None = None,
) -> dict:
    """Serializable model bundle with a stable field order."""
    names = model.marker_names or tuple(
        f"c{j}" for j in range(model.coefficients.size)
    )
    doc = {
        "intercept": model.intercept,
        "coefficients": [
            {"name": name, "value": float(value)}
            for name, value in zip(names, model.coefficients)
        ],
    }
    if std is not None:
        doc["standardization"] = {
            "enabled": std.enabled,
            "means": std.means.tolist(),
            "scales": std.scales.tolist(),
            "zero_variance": list(std.zero_variance),
        }
    else:
        doc["standardization"] = {"enabled": False}
    if config is not None:
        doc["config"] = {
            "w": config.w,
            "penalty": config.penalty,
            "lam1": config.lam1,
            "lam2": config.lam2,
            "max_iters": config.max_iters,
            "tol": config.tol,
            "standardize": config.standardize,
        }
    return doc


def model_from_dict(doc: dict) -> LinearModel:
    """Inverse of model_to_dict; returns the original-scale model."""
    coefs = doc["coefficients"]
    names = tuple(entry["name"] for entry in coefs)
    values = np.array([entry["value"] for entry in coefs], dtype=np.float64)
    return LinearModel(float(doc["intercept"]), values, False, names)
