"""KS statistic properties and parametric-bootstrap behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmnet.distributions import (GIGaParams, LNParams, giga_sample, ln_cdf,
                                 ln_sample)
from bmnet.engine import MeanFieldDynamics, ModelParams, SimConfig, simulate
from bmnet.gof import compare_families, ks_pvalue_bootstrap, ks_statistic


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


class TestKsStatistic:
    def test_single_sample_at_median(self):
        assert ks_statistic([0.5], uniform_cdf) == pytest.approx(0.5)

    def test_optimal_quantile_placement(self):
        for n in (1, 5, 50):
            x = (np.arange(1, n + 1) - 0.5) / n
            assert ks_statistic(x, uniform_cdf) == pytest.approx(1.0 / (2 * n))

    def test_hand_evaluated_two_points(self):
        assert ks_statistic([0.25, 0.75], uniform_cdf) == pytest.approx(0.25)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            ks_statistic([], uniform_cdf)

    @given(st.integers(min_value=1, max_value=500),
           st.integers(min_value=0, max_value=100))
    @settings(max_examples=30, deadline=None)
    def test_bounds(self, n, seed):
        x = np.random.default_rng(seed).uniform(0.01, 10.0, n)
        d = ks_statistic(x, lambda v: ln_cdf(LNParams(0.0, 1.0), v))
        assert 0.0 < d <= 1.0

    @given(st.integers(min_value=5, max_value=300),
           st.integers(min_value=0, max_value=100))
    @settings(max_examples=30, deadline=None)
    def test_invariance_under_monotone_transform(self, n, seed):
        # probability-integral-transform invariance: mapping samples and
        # CDF through w -> log w leaves D unchanged
        p = LNParams(mu=0.2, s=0.8)
        x = ln_sample(p, n, seed=seed)
        d_raw = ks_statistic(x, lambda v: ln_cdf(p, v))
        d_log = ks_statistic(np.log(x), lambda v: ln_cdf(p, np.exp(v)))
        assert d_raw == pytest.approx(d_log, abs=1e-12)


class TestBootstrap:
    def test_rejects_zero_replicates(self):
        x = ln_sample(LNParams(0.0, 1.0), 100, seed=0)
        with pytest.raises(ValueError):
            ks_pvalue_bootstrap(x, "LN", 0, seed=1)

    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            ks_pvalue_bootstrap([1.0, 2.0], "weibull", 9, seed=1)

    def test_deterministic(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 2000, seed=3)
        a = ks_pvalue_bootstrap(x, "GIGa", 29, seed=77)
        b = ks_pvalue_bootstrap(x, "GIGa", 29, seed=77)
        assert a == b

    def test_pvalue_is_fraction_of_b(self):
        x = ln_sample(LNParams(0.0, 0.5), 500, seed=4)
        r = ks_pvalue_bootstrap(x, "LN", 33, seed=5)
        assert r.bootstrap_count == 33
        assert r.p_value == r.exceed_count / 33
        assert 0 <= r.exceed_count <= 33

    def test_well_specified_family_gets_healthy_pvalue(self):
        x = ln_sample(LNParams(-0.05, math.sqrt(0.1)), 2000, seed=12)
        r = ks_pvalue_bootstrap(x, "LN", 99, seed=6)
        assert r.p_value > 0.05

    def test_wrong_family_gets_zero_pvalue(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 5000, seed=8)
        r = ks_pvalue_bootstrap(x, "LN", 99, seed=9)
        assert r.p_value == 0.0  # reported 0 means p < 1/B

    def test_report_serialization_keys(self):
        x = ln_sample(LNParams(0.0, 1.0), 300, seed=2)
        d = ks_pvalue_bootstrap(x, "LN", 9, seed=3).to_json_dict()
        assert {"family", "params", "loglik", "ks_stat", "p_value", "B",
                "discarded_replicates"} <= set(d)


class TestCompareFamilies:
    def test_giga_truth_ranked_first_by_both_criteria(self):
        x = giga_sample(GIGaParams(6, 20, 0.5), 20000, seed=3)
        ranked, failures = compare_families(x, B=49, seed=10)
        assert not failures
        assert ranked[0].family == "GIGa"
        assert ranked[0].fit.loglik == max(r.fit.loglik for r in ranked)

    def test_early_uncoupled_ensemble_prefers_lognormal(self):
        # J=0 at t=1: the cross-section is (transient) lognormal.  The
        # GIGa family can mimic a lognormal near its small-gamma corner,
        # so the LN/GIGa order is seed-sensitive; the fixed seed pins a
        # representative draw.  IGa is always rejected here.
        cfg = SimConfig(params=ModelParams.from_sigma2(0.05, 0.0),
                        dynamics=MeanFieldDynamics(), scheme="milstein",
                        N=3000, dt=0.01, t_end=1.0, snapshot_times=(1.0,),
                        seed=1)
        w = simulate(cfg)[0].w
        ranked, _ = compare_families(w, B=99, seed=1)
        assert ranked[0].family == "LN"
        assert ranked[0].p_value > 0.05
        by_family = {r.family: r for r in ranked}
        assert by_family["IGa"].p_value == 0.0

    def test_family_failures_recorded_and_rest_ranked(self):
        # five samples: too few for the three-parameter fit, fine for the rest
        ranked, failures = compare_families(
            np.array([1.0, 2.0, 3.0, 1.5, 2.5]), B=19, seed=1)
        assert set(failures) == {"GIGa"}
        assert [r.family for r in ranked] == ["LN", "IGa"] or \
               [r.family for r in ranked] == ["IGa", "LN"]

    def test_deterministic_ranking(self):
        x = giga_sample(GIGaParams(3, 2, 1), 1500, seed=6)
        a, _ = compare_families(x, B=29, seed=4)
        b, _ = compare_families(x, B=29, seed=4)
        assert [(r.family, r.p_value, r.ks_stat) for r in a] == \
               [(r.family, r.p_value, r.ks_stat) for r in b]
