"""MLE correctness: closed forms, synthetic recovery, profile structure."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmnet.distributions import GIGaParams, giga_logpdf, giga_sample, ln_sample, LNParams
from bmnet.errors import DegenerateSampleError
from bmnet.fitting import (fit_giga, fit_iga, fit_lognormal,
                           gamma_shape_scale_mle)


class TestLognormalFit:
    def test_closed_form(self):
        r = fit_lognormal([math.exp(-1.0), 1.0, math.exp(1.0)])
        assert r.params.mu == pytest.approx(0.0, abs=1e-14)
        assert r.params.s ** 2 == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert r.family == "LN"
        assert r.gamma_hat is None and r.alpha_gamma is None

    def test_degenerate_sample(self):
        with pytest.raises(DegenerateSampleError):
            fit_lognormal([2.5, 2.5, 2.5])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fit_lognormal([1.0, -2.0, 3.0])

    def test_synthetic_recovery(self):
        true = LNParams(mu=-0.05, s=math.sqrt(0.1))
        x = ln_sample(true, 10 ** 5, seed=31)
        r = fit_lognormal(x)
        n = x.size
        assert abs(r.params.mu - true.mu) < 3 * true.s / math.sqrt(n)
        assert abs(r.params.s - true.s) < 3 * true.s / math.sqrt(2 * n)


class TestGammaMLE:
    def test_synthetic_recovery(self):
        y = np.random.default_rng(123).gamma(2.0, 3.0, 10 ** 5)
        shape, scale = gamma_shape_scale_mle(y)
        assert shape == pytest.approx(2.0, abs=0.03)
        assert scale == pytest.approx(3.0, abs=0.05)

    def test_exponential_special_case(self):
        y = np.random.default_rng(7).exponential(2.0, 5 * 10 ** 4)
        shape, _ = gamma_shape_scale_mle(y)
        assert shape == pytest.approx(1.0, abs=0.02)

    def test_all_equal_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            gamma_shape_scale_mle(np.full(100, 3.7))

    def test_score_equation_satisfied(self):
        y = np.random.default_rng(5).gamma(4.0, 0.5, 2000)
        shape, scale = gamma_shape_scale_mle(y)
        from scipy.special import digamma
        lhs = math.log(shape) - digamma(shape)
        rhs = math.log(y.mean()) - np.log(y).mean()
        assert lhs == pytest.approx(rhs, rel=1e-10)
        assert scale == pytest.approx(y.mean() / shape, rel=1e-12)


class TestIGaFit:
    def test_synthetic_recovery(self):
        x = giga_sample(GIGaParams(3, 2, 1), 10 ** 5, seed=5)
        r = fit_iga(x)
        assert r.params.alpha == pytest.approx(3.0, abs=0.06)
        assert r.params.beta == pytest.approx(2.0, abs=0.05)
        assert r.params.gamma == 1.0

    def test_loglik_is_model_loglik(self):
        x = giga_sample(GIGaParams(3, 2, 1), 500, seed=9)
        r = fit_iga(x)
        assert r.loglik == float(np.sum(giga_logpdf(r.params, x)))

    def test_nested_model_dominance(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 10 ** 5, seed=11)
        assert fit_iga(x).loglik < fit_giga(x).loglik


class TestGIGaFit:
    def test_synthetic_recovery(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 10 ** 5, seed=11)
        r = fit_giga(x)
        assert abs(r.params.gamma - 0.5) / 0.5 < 0.10
        assert abs(r.alpha_gamma - 3.0) / 3.0 < 0.05
        assert r.converged and not r.at_boundary

    def test_recovers_inverse_gamma_member(self):
        x = giga_sample(GIGaParams(3, 2, 1), 10 ** 5, seed=5)
        r = fit_giga(x)
        assert 0.9 <= r.params.gamma <= 1.1

    def test_locked_gamma_reproduces_iga(self):
        x = giga_sample(GIGaParams(3, 2, 1), 2000, seed=17)
        locked = fit_giga(x, gamma_range=(1.0, 1.0))
        iga = fit_iga(x)
        assert locked.params.gamma == 1.0
        assert locked.params.alpha == pytest.approx(iga.params.alpha, rel=1e-12)
        assert locked.params.beta == pytest.approx(iga.params.beta, rel=1e-12)
        assert locked.loglik == pytest.approx(iga.loglik, rel=1e-12)

    def test_needs_ten_samples(self):
        with pytest.raises(ValueError):
            fit_giga(np.linspace(1, 2, 9))

    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_profile_inner_solution_is_optimal(self, gamma):
        # the transform-based (alpha, beta) must beat a dense 2-D grid
        # around it at the same gamma
        x = giga_sample(GIGaParams(4, 3, 0.7), 500, seed=23)
        r = fit_giga(x, gamma_range=(gamma, gamma))
        inner_ll = r.loglik
        best_grid = -np.inf
        for a in np.linspace(0.5 * r.params.alpha, 2.0 * r.params.alpha, 41):
            for b in np.linspace(0.5 * r.params.beta, 2.0 * r.params.beta, 41):
                ll = float(np.sum(giga_logpdf(GIGaParams(a, b, gamma), x)))
                best_grid = max(best_grid, ll)
        assert inner_ll >= best_grid - 1e-9 * abs(inner_ll)

    @given(st.integers(min_value=0, max_value=50))
    @settings(max_examples=12, deadline=None)
    def test_monotone_dominance_over_iga(self, seed):
        rng = np.random.default_rng(seed)
        x = np.exp(rng.normal(0.0, 0.6, 400)) + 0.05 * rng.gamma(2.0, 1.0, 400)
        giga = fit_giga(x)
        iga = fit_iga(x)
        assert giga.loglik >= iga.loglik - 1e-6 * x.size

    def test_estimator_consistency(self):
        # median recovery error shrinks roughly as 1/sqrt(n)
        medians = {}
        for n in (10 ** 3, 10 ** 4, 10 ** 5):
            errs = [abs(fit_giga(giga_sample(GIGaParams(6, 20, 0.5), n,
                                             seed=200 + s)).params.gamma - 0.5)
                    for s in range(9)]
            medians[n] = float(np.median(errs))
        assert medians[10 ** 3] > 1.8 * medians[10 ** 4]
        assert medians[10 ** 4] > 1.8 * medians[10 ** 5]
        assert medians[10 ** 3] > 4.0 * medians[10 ** 5]

    def test_scale_equivariance(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 2 * 10 ** 4, seed=42)
        base = fit_giga(x)
        scaled = fit_giga(10.0 * x)
        assert scaled.params.gamma == pytest.approx(base.params.gamma, abs=1e-9)
        assert scaled.params.alpha == pytest.approx(base.params.alpha, rel=1e-9)
        assert scaled.params.beta == pytest.approx(10.0 * base.params.beta,
                                                   rel=1e-9)
        ln_base = fit_lognormal(x)
        ln_scaled = fit_lognormal(10.0 * x)
        assert ln_scaled.params.mu - ln_base.params.mu == pytest.approx(
            math.log(10.0), rel=1e-12)
        assert ln_scaled.params.s == pytest.approx(ln_base.params.s, rel=1e-12)

    def test_near_lognormal_data_flags_boundary(self):
        # near-lognormal data pushes gamma to the lower search boundary
        x = ln_sample(LNParams(mu=0.0, s=0.3), 5000, seed=3)
        r = fit_giga(x)
        assert r.at_boundary
        assert r.params.gamma == pytest.approx(0.05, abs=3e-4)


def test_report_serialization_keys():
    x = giga_sample(GIGaParams(3, 2, 1), 200, seed=1)
    for report in (fit_lognormal(x), fit_iga(x), fit_giga(x)):
        d = report.to_json_dict()
        assert set(d) == {"family", "params", "loglik", "n", "converged",
                          "gamma", "alpha_gamma"}
