"""Synthetic marker designs and the replicated benchmark harness.

The design draws two informative marker blocks plus pure-noise columns.
Both blocks are class-conditional normals calibrated to the same overall
AUC of 0.75, but block A concentrates its discrimination at low false
positive rates (higher diseased-score spread), so it dominates block B on
partial AUC over (0, 0.2) while matching it on full AUC.  Noise columns
are standard normal regardless of class.

The harness generates independent train/test pairs per replicate, tunes
the weighted lasso and the deviance-tuned baseline on the training set,
and scores both externally.  Replicate seeds are derived from the design
seed, so replicates are embarrassingly parallel and the report is a pure
function of (design, search).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .data import Dataset
from .select import (
    SearchSpec,
    baseline_lasso,
    derive_seed,
    evaluate_external,
    select_weight_and_lambda,
)
from .solver import FitConfig


@dataclass(frozen=True)
class BlockParams:
    """Class-conditional normal parameters for one informative block."""

    mu_diseased: float
    sigma_diseased: float
    mu_non_diseased: float = 0.0
    sigma_non_diseased: float = 1.0

    def __post_init__(self):
        if self.sigma_diseased <= 0 or self.sigma_non_diseased <= 0:
            raise ValueError("block standard deviations must be positive")


def _mu_for_auc(auc: float, sigma_diseased: float, sigma_non_diseased: float = 1.0) -> float:
    # binormal AUC = Phi(delta_mu / hypot(sd_d, sd_n)), solved for delta_mu
    return float(norm.ppf(auc) * np.hypot(sigma_diseased, sigma_non_diseased))


# Block A: wide diseased spread -> steep early ROC (strong at low FPR).
# Block B: symmetric shift -> the classic evenly-rising ROC.  Both have
# AUC 0.75 by construction; see block_auc / block_pauc for the audit
# (pAUC over (0, 0.2): A 0.127 vs B 0.069).
SCORE_A = BlockParams(_mu_for_auc(0.75, 4.0), 4.0)
SCORE_B = BlockParams(_mu_for_auc(0.75, 1.0), 1.0)

METHOD_PUSH = "push"
METHOD_LASSO = "lasso"


def block_auc(params: BlockParams) -> float:
    """Closed-form AUC of one binormal block."""
    delta = params.mu_diseased - params.mu_non_diseased
    return float(
        norm.cdf(delta / np.hypot(params.sigma_diseased, params.sigma_non_diseased))
    )


def block_roc(u, params: BlockParams):
    """Binormal ROC value(s) at false positive rate(s) u."""
    z = norm.ppf(u)
    return norm.cdf(
        (params.mu_diseased - params.mu_non_diseased + params.sigma_non_diseased * z)
        / params.sigma_diseased
    )


def block_pauc(params: BlockParams, t: float) -> float:
    """Partial AUC of one binormal block over (0, t), by quadrature."""
    value, _ = quad(block_roc, 0.0, t, args=(params,), limit=200)
    return float(value)


@dataclass(frozen=True)
class SimDesign:
    """Shape and distribution of the synthetic marker panel."""

    n_diseased: int = 50
    n_non_diseased: int = 50
    n_score_a: int = 3
    n_score_b: int = 3
    n_noise: int = 500
    score_a_params: BlockParams = SCORE_A
    score_b_params: BlockParams = SCORE_B
    replicates: int = 100
    seed: int = 0

    def __post_init__(self):
        counts = (
            self.n_diseased,
            self.n_non_diseased,
            self.n_score_a,
            self.n_score_b,
            self.n_noise,
        )
        if any(c < 0 for c in counts) or self.n_diseased < 1 or self.n_non_diseased < 1:
            raise ValueError("invalid design counts")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")

    @property
    def p(self) -> int:
        return self.n_score_a + self.n_score_b + self.n_noise

    @property
    def marker_names(self) -> tuple[str, ...]:
        return tuple(f"X{j + 1}" for j in range(self.p))

    @property
    def informative_a(self) -> tuple[int, ...]:
        return tuple(range(self.n_score_a))

    @property
    def informative_b(self) -> tuple[int, ...]:
        return tuple(range(self.n_score_a, self.n_score_a + self.n_score_b))

    @property
    def noise_columns(self) -> tuple[int, ...]:
        return tuple(range(self.n_score_a + self.n_score_b, self.p))

    def to_dict(self) -> dict:
        def block(params: BlockParams) -> dict:
            return {
                "mu_diseased": params.mu_diseased,
                "sigma_diseased": params.sigma_diseased,
                "mu_non_diseased": params.mu_non_diseased,
                "sigma_non_diseased": params.sigma_non_diseased,
            }

        return {
            "n_diseased": self.n_diseased,
            "n_non_diseased": self.n_non_diseased,
            "n_score_a": self.n_score_a,
            "n_score_b": self.n_score_b,
            "n_noise": self.n_noise,
            "score_a_params": block(self.score_a_params),
            "score_b_params": block(self.score_b_params),
            "replicates": self.replicates,
            "seed": self.seed,
        }


def design_from_dict(doc: dict) -> SimDesign:
    kwargs = dict(doc)
    for key in ("score_a_params", "score_b_params"):
        if key in kwargs and isinstance(kwargs[key], dict):
            kwargs[key] = BlockParams(**kwargs[key])
    return SimDesign(**kwargs)


def _draw(design: SimDesign, rng: np.random.Generator) -> Dataset:
    J, K = design.n_diseased, design.n_non_diseased
    n = J + K
    X = np.empty((n, design.p))
    col = 0
    for count, params in (
        (design.n_score_a, design.score_a_params),
        (design.n_score_b, design.score_b_params),
    ):
        if count:
            X[:J, col : col + count] = rng.normal(
                params.mu_diseased, params.sigma_diseased, (J, count)
            )
            X[J:, col : col + count] = rng.normal(
                params.mu_non_diseased, params.sigma_non_diseased, (K, count)
            )
            col += count
    if design.n_noise:
        X[:, col:] = rng.normal(0.0, 1.0, (n, design.n_noise))
    labels = np.concatenate([np.ones(J, dtype=np.int64), -np.ones(K, dtype=np.int64)])
    return Dataset(labels, X, design.marker_names)


def generate(design: SimDesign, seed: int) -> tuple[Dataset, Dataset]:
    """Independent (train, test) draw of the design, deterministic in seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    return _draw(design, rng), _draw(design, rng)


def permute_labels(data: Dataset, seed: int) -> Dataset:
    """Random label permutation; breaks any marker-outcome association."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    return Dataset(rng.permutation(data.labels), data.markers, data.marker_names)


@dataclass(frozen=True)
class ReplicateResult:
    replicate: int
    method: str
    chosen_w: float
    chosen_lambda: float
    external_pauc: float
    selected: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "replicate": self.replicate,
            "method": self.method,
            "chosen_w": self.chosen_w,
            "chosen_lambda": self.chosen_lambda,
            "external_pauc": self.external_pauc,
            "selected": list(self.selected),
        }


@dataclass(frozen=True)
class BenchReport:
    """Per-replicate outcomes plus recomputable aggregates."""

    design: SimDesign
    search: SearchSpec
    results: tuple[ReplicateResult, ...]

    def method_rows(self, method: str) -> list[ReplicateResult]:
        return [r for r in self.results if r.method == method]

    def selection_rates(self, method: str) -> np.ndarray:
        rows = self.method_rows(method)
        counts = np.zeros(self.design.p)
        for row in rows:
            counts[list(row.selected)] += 1.0
        return counts / max(len(rows), 1)

    def aggregates(self) -> dict:
        out = {}
        for method in (METHOD_PUSH, METHOD_LASSO):
            rows = self.method_rows(method)
            if not rows:
                continue
            paucs = np.array([r.external_pauc for r in rows])
            ws = np.array([r.chosen_w for r in rows])
            rates = self.selection_rates(method)
            noise = list(self.design.noise_columns)
            noise_rate = float(rates[noise].mean()) if noise else 0.0
            out[method] = {
                "replicates": len(rows),
                "mean_external_pauc": float(paucs.mean()),
                "median_external_pauc": float(np.median(paucs)),
                "iqr_external_pauc": [
                    float(np.quantile(paucs, 0.25)),
                    float(np.quantile(paucs, 0.75)),
                ],
                "mean_chosen_w": float(ws.mean()),
                "median_chosen_w": float(np.median(ws)),
                "selection_rate": rates.tolist(),
                "mean_noise_selection_rate": noise_rate,
                "mean_noise_selection_count": noise_rate * len(rows),
            }
        return out

    def to_dict(self) -> dict:
        return {
            "design": self.design.to_dict(),
            "search": {
                "weight_grid": list(self.search.weight_grid),
                "lambda_grid": None
                if self.search.lambda_grid is None
                else list(self.search.lambda_grid),
                "n_lambdas": self.search.n_lambdas,
                "lambda_min_ratio": self.search.lambda_min_ratio,
                "outer_k": self.search.outer_k,
                "inner_k": self.search.inner_k,
                "t": self.search.pauc.t,
                "tie_policy": self.search.pauc.tie_policy,
                "seed": self.search.seed,
            },
            "replicates": [r.to_dict() for r in self.results],
            "aggregates": self.aggregates(),
        }


def _one_replicate(
    design: SimDesign,
    search: SearchSpec,
    index: int,
    config: FitConfig | None,
) -> list[ReplicateResult]:
    train, test = generate(design, derive_seed(design.seed, "replicate", index))
    spec = replace(search, seed=derive_seed(search.seed, "replicate", index))
    rows = []
    push = select_weight_and_lambda(train, spec, config=config)
    lasso = baseline_lasso(train, spec, config=config)
    for method, report in ((METHOD_PUSH, push), (METHOD_LASSO, lasso)):
        result = evaluate_external(report.final_model, test, search.pauc)
        rows.append(
            ReplicateResult(
                replicate=index,
                method=method,
                chosen_w=report.chosen_w,
                chosen_lambda=report.chosen_lambda,
                external_pauc=result.value,
                selected=report.final_fit.active_set,
            )
        )
    return rows


def run_benchmark(
    design: SimDesign,
    search: SearchSpec,
    config: FitConfig | None = None,
    threads: int = 1,
) -> BenchReport:
    """Replicated tuning-and-external-evaluation comparison of both methods.

    Parallelism is over replicates; results are reduced in replicate order,
    so the report does not depend on the thread count.
    """
    indices = list(range(design.replicates))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            nested = list(
                pool.map(lambda i: _one_replicate(design, search, i, config), indices)
            )
    else:
        nested = [_one_replicate(design, search, i, config) for i in indices]
    results = tuple(row for rows in nested for row in rows)
    return BenchReport(design, search, results)
