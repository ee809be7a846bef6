import numpy as np
import pytest

from tvgam import (
    FitConfig,
    LossSpec,
    ProxProblem,
    build_dataset,
    fit,
    fit_oracle_l1,
    objective,
    prox_fused_boundary,
    prox_subgradient_residual,
)
from tvgam.solver import _triangle_design
from helpers import fused_objective, grid_prox, lp_fit_objective


def random_prox_problem(rng, n=None):
    n = n or int(rng.integers(1, 51))
    z = rng.uniform(-2.0, 2.0, n)
    w = rng.uniform(0.5, 3.0, n)
    lam = float(rng.uniform(0.05, 1.0))
    return ProxProblem(z, w, lam)


class TestProx:
    def test_zero_lam_returns_targets(self):
        z = np.array([1.0, -2.0, 3.0])
        p = ProxProblem(z, np.ones(3), 1e-300)
        assert np.allclose(prox_fused_boundary(p), z)

    def test_huge_lam_returns_zero(self):
        p = ProxProblem(np.array([3.0, 3.0]), np.ones(2), 1e6)
        assert np.allclose(prox_fused_boundary(p), 0.0)

    def test_two_point_example(self):
        p = ProxProblem(np.array([2.0, 0.0]), np.ones(2), 0.5)
        v = prox_fused_boundary(p)
        assert np.allclose(v, [1.0, 0.0])
        assert prox_subgradient_residual(p, v) <= 1e-10

    def test_empty_input(self):
        v = prox_fused_boundary(ProxProblem(np.array([]), np.array([]), 1.0))
        assert v.size == 0

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            ProxProblem(np.array([1.0]), np.array([0.0]), 1.0)

    def test_subgradient_certificate_random(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = random_prox_problem(rng)
            v = prox_fused_boundary(p)
            assert prox_subgradient_residual(p, v) <= 1e-8

    def test_subgradient_certificate_tied_targets(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            z = rng.integers(-2, 3, n).astype(float)
            p = ProxProblem(z, rng.uniform(0.5, 4.0, n), float(rng.uniform(0.05, 2.0)))
            v = prox_fused_boundary(p)
            assert prox_subgradient_residual(p, v) <= 1e-8

    def test_matches_grid_search(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            p = random_prox_problem(rng, n=int(rng.integers(1, 5)))
            v = prox_fused_boundary(p)
            vg, og = grid_prox(p.z, p.weights, p.lam)
            delta = og - p.value(v)
            assert delta >= -1e-9  # grid can never beat the exact minimizer
            gap_bound = np.sqrt(2.0 * max(delta, 0.0) / p.weights.min())
            assert np.abs(vg - v).max() <= gap_bound + 1e-9

    def test_value_matches_reference(self):
        rng = np.random.default_rng(6)
        p = random_prox_problem(rng, n=7)
        v = rng.normal(size=7)
        assert p.value(v) == pytest.approx(fused_objective(p.z, p.weights, p.lam, v))


class TestFit:
    def test_single_point_closed_form(self):
        data = build_dataset(np.array([[0.0]]), np.array([2.0]))
        model, report = fit(data, LossSpec("squared"), FitConfig(lam=1.0))
        assert model.predict_matrix(data.features)[0] == pytest.approx(1.0)
        assert report.final_objective == pytest.approx(3.0)
        assert report.converged

    def test_unpenalized_interpolation(self):
        rng = np.random.default_rng(0)
        x = rng.permutation(5).astype(float).reshape(-1, 1)
        y = rng.normal(size=5)
        data = build_dataset(x, y)
        model, _ = fit(data, LossSpec("squared"), FitConfig(lam=0.0))
        assert np.allclose(model.predict_matrix(x), y, atol=1e-8)

    def test_zero_targets_give_zero_model(self):
        data = build_dataset(np.arange(6.0).reshape(-1, 2), np.zeros(3))
        model, report = fit(data, LossSpec("squared"), FitConfig(lam=0.5))
        assert model.budget_used == 0.0
        assert report.final_objective == 0.0

    def test_trace_non_increasing_squared(self):
        rng = np.random.default_rng(1)
        data = build_dataset(rng.uniform(-1, 1, (30, 3)), rng.normal(size=30))
        _, report = fit(data, LossSpec("squared"), FitConfig(lam=0.2))
        trace = np.asarray(report.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)

    def test_rejects_nonconvex_loss(self):
        data = build_dataset(np.zeros((2, 1)), np.ones(2))
        with pytest.raises(ValueError):
            fit(data, LossSpec("hinge", clip=1.0), FitConfig(lam=0.1))

    def test_rejects_negative_lam(self):
        with pytest.raises(ValueError):
            FitConfig(lam=-1.0)

    def test_knots_only_at_observed_values(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(-1, 1, (20, 2))
        data = build_dataset(X, rng.normal(size=20))
        model, _ = fit(data, LossSpec("squared"), FitConfig(lam=0.1))
        for j, f in enumerate(model.weight_functions):
            if not f.is_zero:
                assert np.all(np.isin(f.knots, X[:, j]))

    def test_logistic_fit_converges(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(-1, 1, (40, 2))
        y = np.sign(X[:, 0] + 0.1 * rng.normal(size=40))
        data = build_dataset(X, y)
        model, report = fit(data, LossSpec("logistic"), FitConfig(lam=0.5))
        assert report.converged
        assert report.final_objective <= 40.0 * np.log(2.0) + 1e-9

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(-1, 1, (25, 2))
        y = rng.normal(size=25)
        data = build_dataset(X, y)
        loss = LossSpec("squared")
        config = FitConfig(lam=0.3)
        model_a, rep_a = fit(data, loss, config)
        Xt = np.stack([X[:, 0] ** 3 + 2 * X[:, 0], np.exp(X[:, 1])], axis=1)
        model_b, rep_b = fit(build_dataset(Xt, y), loss, config)
        assert rep_b.final_objective == pytest.approx(rep_a.final_objective, rel=1e-8)
        assert np.allclose(
            model_b.predict_matrix(Xt), model_a.predict_matrix(X), atol=1e-6
        )


class TestOracle:
    def test_single_point_objective(self):
        data = build_dataset(np.array([[0.0]]), np.array([2.0]))
        model, obj = fit_oracle_l1(data, LossSpec("squared"), 1.0)
        assert obj == pytest.approx(3.0, abs=1e-8)
        assert model.predict_matrix(data.features)[0] == pytest.approx(1.0, abs=1e-6)

    def test_huge_lam_gives_zero_model(self):
        data = build_dataset(np.arange(4.0).reshape(-1, 1), np.ones(4))
        model, obj = fit_oracle_l1(data, LossSpec("squared"), 1e6)
        assert model.budget_used == 0.0
        assert obj == pytest.approx(4.0)

    def test_matches_fit_on_random_instances(self):
        rng = np.random.default_rng(5)
        for kind in ("squared", "logistic"):
            for _ in range(3):
                m, p = int(rng.integers(2, 10)), int(rng.integers(1, 3))
                X = rng.uniform(-1, 1, (m, p))
                y = np.sign(rng.normal(size=m)) if kind == "logistic" else rng.normal(size=m)
                data = build_dataset(X, y)
                lam = float(rng.choice([0.01, 0.1, 1.0]))
                loss = LossSpec(kind)
                _, obj_fit = fit(data, loss, FitConfig(lam=lam))
                _, obj_oracle = fit_oracle_l1(data, loss, lam)
                obj_fit = obj_fit.final_objective if hasattr(obj_fit, "final_objective") else obj_fit
                assert abs(obj_fit - obj_oracle) <= 1e-6 * (1.0 + abs(obj_oracle))

    def test_nonsmooth_losses_match_linear_program(self):
        rng = np.random.default_rng(6)
        for kind in ("absolute", "hinge"):
            for _ in range(2):
                m, p = int(rng.integers(3, 8)), int(rng.integers(1, 3))
                X = rng.uniform(-1, 1, (m, p))
                y = np.sign(rng.normal(size=m)) if kind == "hinge" else rng.normal(size=m)
                data = build_dataset(X, y)
                lam = float(rng.uniform(0.05, 0.5))
                _, obj = fit_oracle_l1(data, LossSpec(kind), lam)
                A, _ = _triangle_design(data)
                lp = lp_fit_objective(A, y, lam, kind)
                assert obj >= lp - 1e-9
                assert obj - lp <= 1e-4 * (1.0 + abs(lp))

    def test_absolute_loss_scale_equivariance(self):
        rng = np.random.default_rng(7)
        X = rng.uniform(-1, 1, (4, 1))
        y = rng.normal(size=4)
        # both the loss and the TV penalty are 1-homogeneous in the predictor,
        # so scaling the targets by c scales the optimal objective by c
        lam, c = 0.2, 3.0
        _, obj = fit_oracle_l1(build_dataset(X, y), LossSpec("absolute"), lam)
        _, obj_scaled = fit_oracle_l1(build_dataset(X, c * y), LossSpec("absolute"), lam)
        assert obj_scaled == pytest.approx(c * obj, rel=1e-4)

    def test_refuses_oversized_instances(self):
        data = build_dataset(np.zeros((3, 1)), np.zeros(3))
        with pytest.raises(ValueError, match="basis"):
            fit_oracle_l1(data, LossSpec("squared"), 0.1, max_basis=2)

    def test_refuses_clipped_hinge(self):
        data = build_dataset(np.zeros((2, 1)), np.ones(2))
        with pytest.raises(ValueError):
            fit_oracle_l1(data, LossSpec("hinge", clip=1.0), 0.1)


class TestObjective:
    def test_zero_model_squared(self):
        from tvgam import GamModel, StepFunction

        data = build_dataset(np.zeros((2, 1)), np.array([1.0, -1.0]))
        model = GamModel((StepFunction.zero(),), intercept=0.0)
        assert objective(model, data, LossSpec("squared"), 1.0) == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        from tvgam import GamModel, StepFunction

        data = build_dataset(np.zeros((2, 2)), np.zeros(2))
        model = GamModel((StepFunction.zero(),), intercept=0.0)
        with pytest.raises(ValueError):
            objective(model, data, LossSpec("squared"), 1.0)
