import numpy as np
import pytest

from pauc_push import (
    Dataset,
    FitConfig,
    PaucSpec,
    SearchSpec,
    baseline_lasso,
    evaluate_external,
    external_scores,
    select_weight_and_lambda,
)
from pauc_push.errors import ColumnMismatch, InfeasibleFolds
from pauc_push.select import _outer_fold_work, _pick_lambda, derive_seed
from pauc_push.data import stratified_folds
from pauc_push.solver import LinearModel, model_to_dict

from conftest import random_dataset

FAST_FIT = FitConfig(penalty="lasso", tol=1e-6)


def small_spec(**kwargs):
    defaults = dict(
        weight_grid=(1.0, 4.0),
        n_lambdas=12,
        lambda_min_ratio=0.05,
        outer_k=3,
        inner_k=3,
        pauc=PaucSpec(0.3),
        seed=5,
    )
    defaults.update(kwargs)
    return SearchSpec(**defaults)


def signal_dataset(rng, n_pos=24, n_neg=27, p=6):
    X = rng.normal(size=(n_pos + n_neg, p))
    X[:n_pos, 0] += 1.6
    X[:n_pos, 1] += 1.2
    labels = np.concatenate([np.ones(n_pos, int), -np.ones(n_neg, int)])
    return Dataset(labels, X, tuple(f"g{j}" for j in range(p)))


class TestDeriveSeed:
    def test_deterministic_and_tag_sensitive(self):
        assert derive_seed(7, "outer") == derive_seed(7, "outer")
        assert derive_seed(7, "outer") != derive_seed(7, "inner")
        assert derive_seed(7, "inner", 0) != derive_seed(7, "inner", 1)
        assert derive_seed(7, "x") != derive_seed(8, "x")


class TestSearchSpecValidation:
    def test_weight_grid_must_ascend(self):
        with pytest.raises(ValueError):
            SearchSpec(weight_grid=(4.0, 2.0))

    def test_lambda_grid_must_descend(self):
        with pytest.raises(ValueError):
            SearchSpec(lambda_grid=(0.1, 0.5))

    def test_rejects_small_folds(self):
        with pytest.raises(ValueError):
            SearchSpec(outer_k=1)


class TestPickLambda:
    def test_ties_resolve_to_most_regularized(self):
        grid = np.array([1.0, 0.5, 0.25])
        assert _pick_lambda(np.array([0.3, 0.3, 0.1]), grid, maximize=True) == 1.0
        assert _pick_lambda(np.array([0.4, 0.2, 0.2]), grid, maximize=False) == 0.5


class TestSelectWeightAndLambda:
    def test_deterministic_given_seed(self, rng):
        data = signal_dataset(rng)
        spec = small_spec()
        a = select_weight_and_lambda(data, spec, config=FAST_FIT)
        b = select_weight_and_lambda(data, spec, config=FAST_FIT)
        assert a.to_dict() == b.to_dict()

    def test_threads_do_not_change_results(self, rng):
        data = signal_dataset(rng)
        spec = small_spec()
        serial = select_weight_and_lambda(data, spec, config=FAST_FIT)
        threaded = select_weight_and_lambda(data, spec, config=FAST_FIT, threads=3)
        assert serial.to_dict() == threaded.to_dict()

    def test_single_weight_grid_degenerates(self, rng):
        data = signal_dataset(rng)
        report = select_weight_and_lambda(
            data, small_spec(weight_grid=(1.0,)), config=FAST_FIT
        )
        assert report.chosen_w == 1.0
        assert report.outer_scores.shape == (1, 3)

    def test_score_table_fully_populated(self, rng):
        data = signal_dataset(rng)
        spec = small_spec()
        report = select_weight_and_lambda(data, spec, config=FAST_FIT)
        assert report.outer_scores.shape == (2, 3)
        assert np.all(report.outer_scores >= 0.0)
        assert np.all(report.outer_scores <= spec.pauc.t + 1e-12)
        assert np.all(report.per_fold_lambdas > 0.0)

    def test_chosen_lambda_came_from_evaluated_grid(self, rng):
        data = signal_dataset(rng)
        grid = (2.0, 1.0, 0.5, 0.25, 0.125)
        report = select_weight_and_lambda(
            data, small_spec(lambda_grid=grid), config=FAST_FIT
        )
        assert report.chosen_lambda in grid

    def test_chosen_w_maximizes_mean_outer_score(self, rng):
        data = signal_dataset(rng)
        report = select_weight_and_lambda(data, small_spec(), config=FAST_FIT)
        means = report.outer_scores.mean(axis=1)
        wi = report.weight_grid.index(report.chosen_w)
        assert means[wi] == means.max()

    def test_infeasible_folds_detected(self, rng):
        data = random_dataset(rng, n_pos=6, n_neg=6, p=3)
        with pytest.raises(InfeasibleFolds):
            select_weight_and_lambda(data, small_spec(outer_k=5, inner_k=5))

    def test_rejects_deviance_objective(self, rng):
        data = signal_dataset(rng)
        with pytest.raises(ValueError):
            select_weight_and_lambda(data, small_spec(objective="deviance"))

    def test_no_leakage_from_heldout_rows(self, rng):
        # corrupting the held-out rows must not move the inner CV choice,
        # the refit model, or the lambda grid for that fold
        data = signal_dataset(rng, n_pos=21, n_neg=24)
        spec = small_spec()
        outer = stratified_folds(data, spec.outer_k, derive_seed(spec.seed, "outer"))
        fold = 1
        inner = stratified_folds(
            data.subset(outer.training_indices(fold)),
            spec.inner_k,
            derive_seed(spec.seed, "inner", fold),
        )
        lam_a, _, report_a = _outer_fold_work(data, outer, inner, fold, 4.0, spec, FAST_FIT)

        corrupted = np.array(data.markers)
        held = outer.heldout_indices(fold)
        corrupted[held] = 1e3 * np.sign(corrupted[held]) + 7.0
        data_b = Dataset(data.labels, corrupted, data.marker_names)
        lam_b, _, report_b = _outer_fold_work(data_b, outer, inner, fold, 4.0, spec, FAST_FIT)

        assert lam_a == lam_b
        assert model_to_dict(report_a.model) == model_to_dict(report_b.model)


class TestBaselineLasso:
    def test_dominant_marker_selected(self, rng):
        n_pos = n_neg = 24
        X = rng.normal(size=(n_pos + n_neg, 5))
        X[:n_pos, 2] += 3.0
        data = Dataset(
            np.concatenate([np.ones(n_pos, int), -np.ones(n_neg, int)]),
            X,
            ("a", "b", "hit", "c", "d"),
        )
        report = baseline_lasso(data, small_spec(), config=FAST_FIT)
        assert "hit" in report.selected_markers
        assert report.chosen_w == 1.0
        assert report.objective == "deviance"

    def test_deterministic(self, rng):
        data = signal_dataset(rng)
        spec = small_spec()
        a = baseline_lasso(data, spec, config=FAST_FIT)
        b = baseline_lasso(data, spec, config=FAST_FIT, threads=2)
        assert a.to_dict() == b.to_dict()

    def test_fold_score_is_heldout_logistic_loss(self, rng):
        from pauc_push import logistic_losses, predict
        from pauc_push.solver import fit, FitConfig
        from dataclasses import replace as dc_replace

        data = signal_dataset(rng)
        spec = small_spec()
        report = baseline_lasso(data, spec, config=FAST_FIT)
        folds = stratified_folds(data, spec.outer_k, derive_seed(spec.seed, "baseline"))
        for fold in range(spec.outer_k):
            tr = data.subset(folds.training_indices(fold))
            va = data.subset(folds.heldout_indices(fold))
            refit = fit(tr, dc_replace(FAST_FIT, w=1.0, lam1=report.chosen_lambda))
            want = logistic_losses(predict(refit.model, va.markers), va.labels, 1.0)[0]
            # cold refit vs warm-started path fit agree to solver tolerance
            assert report.outer_scores[0, fold] == pytest.approx(want, rel=1e-5)


class TestEvaluateExternal:
    def test_perfect_model_reaches_t(self, rng):
        # t * K integral so the estimator can attain its ceiling of t
        test = signal_dataset(rng, n_pos=20, n_neg=25)
        scores_col = np.where(test.labels == 1, 1.0, -1.0) + 0.01 * rng.normal(
            size=test.n
        )
        markers = np.column_stack([scores_col, test.markers[:, 1:]])
        test = Dataset(test.labels, markers, test.marker_names)
        model = LinearModel(0.0, np.eye(test.p)[0], False, test.marker_names)
        result = evaluate_external(model, test, PaucSpec(0.2))
        assert result.value == pytest.approx(0.2)

    def test_random_scores_near_half_at_t_one(self, rng):
        values = []
        model = None
        for _ in range(40):
            test = random_dataset(rng, n_pos=30, n_neg=30, p=3, shift=0.0)
            model = LinearModel(0.0, rng.normal(size=3), False, test.marker_names)
            values.append(evaluate_external(model, test, PaucSpec(1.0)).value)
        assert abs(np.mean(values) - 0.5) < 0.05

    def test_intercept_shift_invariant(self, rng):
        test = signal_dataset(rng)
        coef = rng.normal(size=test.p)
        a = evaluate_external(LinearModel(0.0, coef, False, test.marker_names), test, PaucSpec(0.2))
        b = evaluate_external(LinearModel(57.0, coef, False, test.marker_names), test, PaucSpec(0.2))
        assert a.value == b.value

    def test_columns_aligned_by_name(self, rng):
        test = signal_dataset(rng)
        perm = rng.permutation(test.p)
        shuffled = Dataset(
            test.labels,
            test.markers[:, perm],
            tuple(test.marker_names[j] for j in perm),
        )
        model = LinearModel(0.1, rng.normal(size=test.p), False, test.marker_names)
        a = evaluate_external(model, test, PaucSpec(0.2))
        b = evaluate_external(model, shuffled, PaucSpec(0.2))
        assert a.value == b.value

    def test_missing_column_raises(self, rng):
        test = signal_dataset(rng)
        model = LinearModel(0.0, np.zeros(2), False, ("g0", "nope"))
        with pytest.raises(ColumnMismatch):
            external_scores(model, test)

    def test_unnamed_model_requires_matching_width(self, rng):
        test = signal_dataset(rng)
        with pytest.raises(ColumnMismatch):
            external_scores(LinearModel(0.0, np.zeros(2)), test)
