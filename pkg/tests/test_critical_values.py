import math

import numpy as np
import pytest

import oracles
from bubbledates import (
    CvBundle,
    FitError,
    ParameterError,
    RangeError,
    ResponseSurface,
    TABLE1_SURFACES,
    chi2_cv,
    chi2_quantile_1df,
    eval_surface,
    fit_surface,
    simulate_cv,
)
from bubbledates.critical_values import grid_lambda, norm_ppf


class TestChiSquareClosedForms:
    def test_quantile_against_bisection_oracle(self):
        for level in (0.01, 0.025, 0.05, 0.10, 0.5, 0.9, 0.95):
            assert chi2_quantile_1df(level) == pytest.approx(
                oracles.chi2_quantile_bisect(level), abs=1e-6
            )

    def test_printed_value(self):
        assert chi2_cv(0.05, 1.0, "quadratic", +1) == pytest.approx(0.003932, abs=1e-6)

    def test_absolute_shape(self):
        expected = -math.sqrt(0.25 * oracles.chi2_quantile_bisect(0.05))
        got = chi2_cv(0.05, 0.25, "absolute", -1)
        assert got == pytest.approx(expected, abs=1e-6)
        assert got == pytest.approx(-0.03135, abs=2e-5)

    def test_zero_fraction(self):
        assert chi2_cv(0.05, 0.0, "quadratic", +1) == 0.0

    def test_invalid_arguments(self):
        with pytest.raises(ParameterError):
            chi2_cv(0.05, 1.5, "quadratic", +1)
        with pytest.raises(ParameterError):
            chi2_cv(0.05, 0.5, "cubic", +1)
        with pytest.raises(ParameterError):
            chi2_cv(0.05, 0.5, "quadratic", 2)

    def test_norm_ppf_symmetry_and_tails(self):
        assert norm_ppf(0.5) == pytest.approx(0.0, abs=1e-12)
        for p in (1e-6, 0.01, 0.3, 0.975):
            x = norm_ppf(p)
            assert 0.5 * math.erfc(-x / math.sqrt(2)) == pytest.approx(p, rel=1e-9)
            assert norm_ppf(1 - p) == pytest.approx(-x, rel=1e-9)


class TestResponseSurfaces:
    def test_tabulated_evaluations(self):
        # direct arithmetic on the shipped coefficients
        assert eval_surface(TABLE1_SURFACES["EMa21e"], 0.5) == pytest.approx(
            0.50775, abs=1e-5
        )
        assert eval_surface(TABLE1_SURFACES["LR21e"], 0.5) == pytest.approx(
            -0.0013584, abs=1e-6
        )

    def test_two_branch_indicator(self):
        s = TABLE1_SURFACES["EMb12r"]
        base_only = s.a0 + s.a_m1 / 0.8 + s.a1 * 0.8 + s.a2 * 0.64 + s.a3 * 0.512
        branch = s.b0 + s.b_m1 / 0.8 + s.b1 * 0.8 + s.b2 * 0.64 + s.b3 * 0.512
        assert s(0.8) == pytest.approx(base_only + branch, rel=1e-12)
        assert s(0.5) == pytest.approx(
            s.a0 + s.a_m1 / 0.5 + s.a1 * 0.5 + s.a2 * 0.25 + s.a3 * 0.125, rel=1e-12
        )

    def test_finite_on_fitted_range(self):
        for s in TABLE1_SURFACES.values():
            for lam in np.arange(0.10, 0.9001, 0.01):
                assert math.isfinite(s(float(lam)))

    def test_range_error_outside_domain(self):
        with pytest.raises(RangeError):
            eval_surface(TABLE1_SURFACES["EMa21e"], 0.95)
        with pytest.raises(RangeError):
            eval_surface(TABLE1_SURFACES["EMa21e"], 0.05)

    def test_grid_lambda_snap_and_clamp(self):
        assert grid_lambda(0.514) == 0.51
        assert grid_lambda(0.03) == 0.10
        assert grid_lambda(0.97) == 0.90


class TestFitSurface:
    def test_recovers_own_model_class(self):
        target = TABLE1_SURFACES["EMb21e"]
        lam = np.arange(0.10, 0.9001, 0.02)
        pts = [(x, target(float(x))) for x in lam]
        fitted, report = fit_surface(pts)
        for name in ("a0", "a_m1", "a1", "a2", "a3"):
            assert getattr(fitted, name) == pytest.approx(getattr(target, name), abs=1e-8)
        assert report["max_abs_resid"] < 1e-10

    def test_two_branch_recovery(self):
        target = TABLE1_SURFACES["EMb12r"]
        lam = np.arange(0.10, 0.9001, 0.01)
        pts = [(x, target(float(x))) for x in lam]
        fitted, _ = fit_surface(pts, two_branch=True)
        for x in (0.3, 0.65, 0.75, 0.88):
            assert fitted(x) == pytest.approx(target(x), abs=1e-7)

    def test_quintic_not_in_model_class(self):
        pts = [(x, x) for x in np.arange(0.1, 0.91, 0.01)]
        with pytest.raises(FitError):
            fit_surface(pts, degree=5)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_surface([(0.1, 1.0), (0.2, 2.0)])

    def test_rank_deficient_design(self):
        pts = [(0.5, 1.0)] * 12
        with pytest.raises(FitError):
            fit_surface(pts)


class TestSimulateCv:
    def test_lr21e_is_nonpositive(self):
        cv = simulate_cv("LR21e", 0.5, reps=1000, steps=200, seed=1)
        assert cv <= 0

    def test_monotone_in_quantile(self):
        lo = simulate_cv("EMa21e", 0.5, reps=2000, steps=200, quantile=0.5, seed=4)
        hi = simulate_cv("EMa21e", 0.5, reps=2000, steps=200, quantile=0.95, seed=4)
        assert lo < hi

    def test_seed_determinism(self):
        a = simulate_cv("EMb21e", 0.4, reps=2000, steps=200, seed=9)
        b = simulate_cv("EMb21e", 0.4, reps=2000, steps=200, seed=9)
        assert a == b

    def test_self_consistency_across_seeds(self):
        a = simulate_cv("EMa21e", 0.5, reps=50_000, steps=1000, seed=101)
        b = simulate_cv("EMa21e", 0.5, reps=50_000, steps=1000, seed=202)
        assert abs(a - b) < 0.02

    def test_discretization_convergence(self):
        a = simulate_cv("EMb12r", 0.5, reps=20_000, steps=1000, seed=7)
        b = simulate_cv("EMb12r", 0.5, reps=20_000, steps=2000, seed=7)
        assert abs(a - b) < 0.02

    def test_invalid_pairings(self):
        with pytest.raises(ParameterError):
            simulate_cv("EMa21e", 0.05, reps=1000, steps=200)  # lambda < eps
        with pytest.raises(ParameterError):
            simulate_cv("EMb12r", 0.95, reps=1000, steps=200)  # lambda > 1 - eps
        with pytest.raises(ParameterError):
            simulate_cv("nope", 0.5, reps=1000, steps=200)
        with pytest.raises(ParameterError):
            simulate_cv("LR21e", 0.5, reps=10, steps=200)


class TestCvBundle:
    def test_emergence_pair(self):
        bundle = CvBundle(delta=0.10)
        cv12, cv21 = bundle.emergence("LE", 60, 100, 200)
        assert cv12 == pytest.approx(0.3 * chi2_quantile_1df(0.05), rel=1e-12)
        assert cv21 == pytest.approx(TABLE1_SURFACES["EMa21e"](0.6), rel=1e-12)

    def test_collapse_signs(self):
        bundle = CvBundle(delta=0.10)
        lr12, lr21 = bundle.collapse("LRa", 0.3)
        assert lr12 < 0 < lr21 and lr12 == -lr21
        em12, em21 = bundle.collapse("EMb", 0.3)
        assert em12 == pytest.approx(-math.sqrt(0.3 * chi2_quantile_1df(0.05)))
        assert em21 == -em12

    def test_recovery_pair(self):
        bundle = CvBundle(delta=0.10)
        cv12, cv21 = bundle.recovery("LE", 140, 100, 100, 0.3)
        assert cv12 == pytest.approx(TABLE1_SURFACES["EMb12r"](0.4), rel=1e-12)
        assert cv21 == pytest.approx(-0.3 * chi2_quantile_1df(0.05), rel=1e-12)
        lr12, _ = bundle.recovery("LRa", 140, 100, 100, 0.3)
        assert lr12 == -cv21

    def test_surfaces_pinned_to_their_level(self):
        with pytest.raises(ParameterError):
            CvBundle(delta=0.20).emergence("LE", 60, 100, 200)
        # closed forms still adapt to any delta
        cv12, cv21 = CvBundle(delta=0.20).collapse("LRa", 0.3)
        assert cv12 == pytest.approx(-0.3 * chi2_quantile_1df(0.10), rel=1e-12)

    def test_custom_surface_map(self):
        flat = {"EMa21e": ResponseSurface(1.0, 0.0, 0.0, 0.0, 0.0)}
        bundle = CvBundle(delta=0.10, surfaces=flat, source="custom")
        assert bundle.emergence("EMa", 60, 100, 200)[1] == 1.0
        with pytest.raises(ParameterError):
            bundle.emergence("EMb", 60, 100, 200)
