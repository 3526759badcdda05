import math

import numpy as np
import pytest

from pauc_push import (
    Dataset,
    FitConfig,
    LinearModel,
    destandardize_model,
    fit,
    fit_path,
    lambda_max,
    logistic_losses,
    loss_gradient,
    model_from_dict,
    model_to_dict,
    predict,
    standardize,
    weighted_logistic_loss,
)
from pauc_push.errors import DimensionMismatch

import oracles
from conftest import random_dataset

UNPENALIZED_RAW = FitConfig(penalty="none", standardize=False)


class TestLossAndGradient:
    def test_zero_model_balanced_loss(self):
        data = Dataset([1, -1], np.zeros((2, 1)), ("m",))
        model = LinearModel(0.0, np.zeros(1))
        value = weighted_logistic_loss(model, data, FitConfig(standardize=False))
        assert value == pytest.approx(2.0 * math.log(2.0), abs=1e-12)

    def test_weight_one_matches_plain_logistic_loss(self, rng):
        data = random_dataset(rng, p=3)
        model = LinearModel(0.3, rng.normal(size=3))
        scores = predict(model, data.markers)
        want, _ = logistic_losses(scores, data.labels, 1.0)
        got = weighted_logistic_loss(model, data, UNPENALIZED_RAW)
        assert got == pytest.approx(want, rel=1e-12)

    def test_intercept_only_stationary_point(self, rng):
        data = random_dataset(rng, n_pos=20, n_neg=30, p=2)
        w = 5.0
        b0 = math.log(data.n_diseased / (w * data.n_non_diseased))
        model = LinearModel(b0, np.zeros(2))
        cfg = FitConfig(w=w, penalty="none", standardize=False)
        d0, _ = loss_gradient(model, data, cfg)
        assert abs(d0) < 1e-10

    def test_gradient_matches_central_differences(self, rng):
        for _ in range(20):
            p = int(rng.integers(1, 6))
            data = random_dataset(rng, n_pos=12, n_neg=15, p=p)
            w = float(rng.uniform(1, 8))
            cfg = FitConfig(w=w, penalty="none", standardize=False)
            theta = rng.normal(scale=0.7, size=p + 1)

            def full_loss(th):
                return weighted_logistic_loss(
                    LinearModel(th[0], th[1:]), data, cfg
                )

            fd = oracles.central_difference_gradient(full_loss, theta)
            d0, dc = loss_gradient(LinearModel(theta[0], theta[1:]), data, cfg)
            analytic = np.concatenate([[d0], dc])
            scale = max(float(np.max(np.abs(fd))), 1.0)
            assert np.max(np.abs(analytic - fd)) / scale < 1e-6

    def test_saturated_gradient_vanishes(self):
        data = Dataset([1, -1], np.array([[1.0], [-1.0]]), ("m",))
        model = LinearModel(0.0, np.array([200.0]))
        d0, dc = loss_gradient(model, data, UNPENALIZED_RAW)
        assert abs(d0) < 1e-12 and np.max(np.abs(dc)) < 1e-12

    def test_dimension_mismatch(self, rng):
        data = random_dataset(rng, p=3)
        with pytest.raises(DimensionMismatch):
            weighted_logistic_loss(LinearModel(0.0, np.zeros(2)), data, UNPENALIZED_RAW)


class TestFit:
    def test_matches_newton_oracle_unweighted(self, rng):
        for _ in range(6):
            data = random_dataset(rng, n_pos=30, n_neg=40, p=3)
            report = fit(data, UNPENALIZED_RAW)
            y01 = (data.labels + 1) // 2
            b0, coef = oracles.newton_logistic(
                data.markers, y01.astype(float), np.ones(data.n)
            )
            assert report.converged
            assert abs(report.model.intercept - b0) < 1e-6
            np.testing.assert_allclose(report.model.coefficients, coef, atol=1e-6)

    def test_matches_newton_oracle_weighted(self, rng):
        data = random_dataset(rng, n_pos=25, n_neg=30, p=4)
        w = 6.0
        report = fit(data, FitConfig(w=w, penalty="none", standardize=False))
        y01 = ((data.labels + 1) // 2).astype(float)
        v = np.where(y01 == 1.0, 1.0, w)
        b0, coef = oracles.newton_logistic(data.markers, y01, v)
        assert abs(report.model.intercept - b0) < 1e-6
        np.testing.assert_allclose(report.model.coefficients, coef, atol=1e-6)

    def test_standardized_fit_equals_raw_fit_unpenalized(self, rng):
        data = random_dataset(rng, p=4)
        raw = fit(data, FitConfig(w=2.0, penalty="none", standardize=False))
        std = fit(data, FitConfig(w=2.0, penalty="none", standardize=True))
        np.testing.assert_allclose(
            std.model.coefficients, raw.model.coefficients, atol=1e-6
        )
        assert std.model.intercept == pytest.approx(raw.model.intercept, abs=1e-6)

    def test_lambda_max_gives_null_model(self, rng):
        for w in (1.0, 4.0):
            data = random_dataset(rng, p=5)
            cfg = FitConfig(w=w, penalty="lasso", lam1=0.0)
            lmax = lambda_max(data, cfg)
            for lam in (lmax, 1.5 * lmax):
                report = fit(data, FitConfig(w=w, penalty="lasso", lam1=lam))
                assert np.max(np.abs(report.model.coefficients)) <= 1e-10
                want = math.log(data.n_diseased / (w * data.n_non_diseased))
                assert report.model.intercept == pytest.approx(want, abs=1e-8)
                assert report.active_set == ()

    def test_kkt_conditions_at_lasso_solution(self, rng):
        for _ in range(5):
            p = int(rng.integers(3, 12))
            data = random_dataset(rng, n_pos=20, n_neg=25, p=p)
            cfg = FitConfig(w=float(rng.uniform(1, 6)), penalty="lasso", lam1=0.0)
            lam = 0.3 * lambda_max(data, cfg)
            cfg = FitConfig(w=cfg.w, penalty="lasso", lam1=lam)
            report = fit(data, cfg)
            assert report.converged
            std_data, _ = standardize(data)
            _, grad = loss_gradient(report.standardized_model, std_data, cfg)
            beta = report.standardized_model.coefficients
            for j in range(p):
                if beta[j] == 0.0:
                    assert abs(grad[j]) <= lam + 1e-4
                else:
                    assert abs(grad[j] + lam * math.copysign(1.0, beta[j])) <= 1e-4

    def test_duplication_equals_weighting(self, rng):
        m = 3
        data = random_dataset(rng, n_pos=15, n_neg=12, p=3)
        neg_idx = np.flatnonzero(data.labels == -1)
        pos_idx = np.flatnonzero(data.labels == 1)
        stacked = data.subset(np.concatenate([pos_idx] + [neg_idx] * m))
        weighted = fit(data, FitConfig(w=float(m), penalty="none", standardize=False))
        duplicated = fit(stacked, UNPENALIZED_RAW)
        np.testing.assert_allclose(
            weighted.model.coefficients, duplicated.model.coefficients, atol=1e-6
        )
        assert weighted.model.intercept == pytest.approx(
            duplicated.model.intercept, abs=1e-6
        )

    def test_loss_trace_monotone(self, rng):
        data = random_dataset(rng, p=6)
        report = fit(data, FitConfig(w=3.0, penalty="lasso", lam1=1.0))
        trace = report.loss_trace
        assert len(trace) >= 2
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_warm_starts_reach_same_objective(self, rng):
        data = random_dataset(rng, p=5)
        cfg = FitConfig(w=2.0, penalty="lasso", lam1=0.8, tol=1e-9)
        losses = []
        for _ in range(2):
            start = LinearModel(float(rng.normal()), rng.normal(scale=0.5, size=5), True)
            losses.append(fit(data, cfg, warm_start=start).final_loss)
        assert abs(losses[0] - losses[1]) < 1e-8

    def test_separable_unpenalized_flags_no_convergence(self):
        X = np.array([[2.0], [1.5], [-1.0], [-2.0]])
        data = Dataset([1, 1, -1, -1], X, ("m",))
        report = fit(data, FitConfig(penalty="none", standardize=False, max_iters=400))
        assert not report.converged
        assert np.all(np.isfinite(report.model.coefficients))
        assert report.iterations <= 400

    def test_bound_propagates_to_fitted_model(self, rng):
        data = random_dataset(rng, p=4)
        w = 4.0
        report = fit(data, FitConfig(w=w, penalty="lasso", lam1=0.5))
        scores = predict(report.model, data.markers)
        l_log, l01 = logistic_losses(scores, data.labels, w)
        assert l_log / math.log(2.0) >= l01

    def test_ridge_stationarity(self, rng):
        data = random_dataset(rng, p=4)
        lam2 = 3.0
        cfg = FitConfig(w=2.0, penalty="ridge", lam2=lam2)
        report = fit(data, cfg)
        std_data, _ = standardize(data)
        d0, grad = loss_gradient(report.standardized_model, std_data, cfg)
        residual = grad + lam2 * report.standardized_model.coefficients
        assert abs(d0) < 1e-6
        assert np.max(np.abs(residual)) < 1e-5


class TestFitPath:
    def test_top_of_path_is_null(self, rng):
        data = random_dataset(rng, p=6)
        cfg = FitConfig(w=2.0, penalty="lasso")
        reports = fit_path(data, cfg, n_lambdas=12)
        assert reports[0].active_set == ()

    def test_single_lambda_path_equals_direct_fit(self, rng):
        data = random_dataset(rng, p=6)
        cfg = FitConfig(w=2.0, penalty="lasso")
        lam = 0.4 * lambda_max(data, cfg)
        path_report = fit_path(data, cfg, lambdas=[lam])[0]
        direct = fit(data, FitConfig(w=2.0, penalty="lasso", lam1=lam))
        np.testing.assert_allclose(
            path_report.model.coefficients, direct.model.coefficients, atol=1e-8
        )

    def test_objective_non_increasing_along_path(self, rng):
        data = random_dataset(rng, p=8)
        reports = fit_path(data, FitConfig(w=3.0, penalty="lasso"), n_lambdas=25)
        losses = [r.final_loss for r in reports]
        assert all(b <= a + 1e-10 for a, b in zip(losses, losses[1:]))

    def test_rejects_unordered_grid(self, rng):
        data = random_dataset(rng, p=3)
        with pytest.raises(ValueError):
            fit_path(data, FitConfig(penalty="lasso"), lambdas=[0.1, 0.5])

    def test_requires_l1_penalty(self, rng):
        data = random_dataset(rng, p=3)
        with pytest.raises(ValueError):
            fit_path(data, FitConfig(penalty="ridge", lam2=1.0))


class TestPredictAndScales:
    def test_zero_model(self, rng):
        data = random_dataset(rng, p=3)
        assert np.all(predict(LinearModel(0.0, np.zeros(3)), data.markers) == 0.0)

    def test_unit_coefficient_selects_column(self, rng):
        data = random_dataset(rng, p=3)
        model = LinearModel(0.5, np.array([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(
            predict(model, data.markers), 0.5 + data.markers[:, 1]
        )

    def test_destandardized_round_trip(self, rng):
        data = random_dataset(rng, p=5)
        std_data, transform = standardize(data)
        model_std = LinearModel(0.7, rng.normal(size=5), True)
        model_raw = destandardize_model(model_std, transform)
        a = predict(model_std, std_data.markers)
        b = predict(model_raw, data.markers)
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_zero_variance_column_pinned(self, rng):
        X = rng.normal(size=(30, 3))
        X[:, 1] = 7.0
        labels = np.concatenate([np.ones(15, int), -np.ones(15, int)])
        data = Dataset(labels, X, ("a", "const", "b"))
        report = fit(data, FitConfig(w=2.0, penalty="lasso", lam1=0.1))
        assert report.model.coefficients[1] == 0.0
        assert 1 not in report.active_set

    def test_model_json_round_trip(self, rng):
        data = random_dataset(rng, p=3)
        report = fit(data, FitConfig(w=2.0, penalty="lasso", lam1=0.2))
        doc = model_to_dict(report.model, report.standardization, FitConfig())
        back = model_from_dict(doc)
        np.testing.assert_allclose(back.coefficients, report.model.coefficients)
        assert back.intercept == report.model.intercept
        assert back.marker_names == report.model.marker_names


class TestKernelParity:
    def test_backends_agree(self, rng):
        try:
            from pauc_push._kernels import _cd_fast
        except ImportError:
            pytest.skip("compiled kernel not built")
        from pauc_push._kernels import _cd_py

        n, p = 50, 15
        XT = np.ascontiguousarray(rng.normal(size=(p, n)))
        omega = rng.uniform(0.05, 0.4, n)
        u0 = rng.normal(size=n)
        cols = np.arange(p, dtype=np.int64)
        col_curv = (XT * XT) @ omega
        outputs = []
        for impl in (_cd_py, _cd_fast):
            u = u0.copy()
            beta = np.zeros(p)
            intercept = np.array([0.2])
            sweeps, delta = impl.cd_solve(
                XT, u, omega, beta, intercept, cols, col_curv,
                0.7, 0.2, float(omega.sum()), True, 1e-11, 5000,
            )
            outputs.append((sweeps, intercept[0], beta.copy()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == pytest.approx(outputs[1][1], abs=1e-10)
        np.testing.assert_allclose(outputs[0][2], outputs[1][2], atol=1e-10)
        np.testing.assert_array_equal(outputs[0][2] != 0, outputs[1][2] != 0)


class TestFitConfigValidation:
    def test_rejects_weight_below_one(self):
        with pytest.raises(ValueError):
            FitConfig(w=0.5)

    def test_rejects_mismatched_penalty(self):
        with pytest.raises(ValueError):
            FitConfig(penalty="lasso", lam2=1.0)
        with pytest.raises(ValueError):
            FitConfig(penalty="none", lam1=0.3)

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            FitConfig(tol=0.0)
