"""Outage probability and coverage curves."""

import math

import numpy as np
import pytest

from mmwpl.link_analysis import OutageSpec, coverage_curve, outage_probability
from mmwpl.pathloss import (
    CloseInModel,
    HybridModel,
    hybrid_from_preset,
    mean_pl_hybrid,
    sample_pl,
)

M28 = hybrid_from_preset("28GHz-NYC")
M28F = hybrid_from_preset("28GHz-NYC", nlos="floating")
M73 = hybrid_from_preset("73GHz-NYC")
M73F = hybrid_from_preset("73GHz-NYC", nlos="floating")

ZERO_SIGMA = HybridModel(
    CloseInModel(28e9, 2.1, 0.0), CloseInModel(28e9, 3.4, 0.0), M28.p_los
)


class TestOutage:
    def test_threshold_at_mean_is_half(self):
        mean = mean_pl_hybrid(M28, 100.0)
        assert outage_probability(M28, 100.0, OutageSpec(mean)) == 0.5

    def test_infinite_budget_never_drops(self):
        assert outage_probability(M28, 100.0, OutageSpec(math.inf)) == 0.0

    def test_zero_sigma_degenerates_to_comparison(self):
        mean = mean_pl_hybrid(ZERO_SIGMA, 100.0)
        assert outage_probability(ZERO_SIGMA, 100.0, OutageSpec(mean + 1.0)) == 0.0
        assert outage_probability(ZERO_SIGMA, 100.0, OutageSpec(mean - 1.0)) == 1.0
        # budget exactly at the mean: the loss does not exceed it
        assert outage_probability(ZERO_SIGMA, 100.0, OutageSpec(mean)) == 0.0

    def test_pinned_analytic_value(self):
        assert np.isclose(outage_probability(M28, 100.0, OutageSpec(130.0)), 0.226546, atol=1e-5)

    def test_matches_monte_carlo(self):
        analytic = outage_probability(M28, 100.0, OutageSpec(130.0))
        rng = np.random.default_rng(1)
        draws = sample_pl(M28, 100.0, rng, size=100_000)
        mc = float(np.mean(draws > 130.0))
        assert abs(analytic - mc) < 0.005, f"analytic={analytic} mc={mc}"

    def test_within_three_standard_errors(self):
        spec = OutageSpec(120.0)
        analytic = outage_probability(M28, 80.0, spec)
        rng = np.random.default_rng(3)
        n = 100_000
        draws = sample_pl(M28, 80.0, rng, size=n)
        mc = float(np.mean(draws > 120.0))
        se = math.sqrt(max(analytic * (1 - analytic), 1e-12) / n)
        assert abs(analytic - mc) <= 3 * se, f"analytic={analytic} mc={mc} se={se}"

    def test_monotone_in_threshold(self):
        thresholds = np.arange(80.0, 180.0, 1.0)
        values = [outage_probability(M28, 100.0, OutageSpec(t)) for t in thresholds]
        assert np.all(np.diff(values) <= 0)

    def test_nan_budget_rejected(self):
        with pytest.raises(ValueError):
            OutageSpec(math.nan)


class TestCoverage:
    def test_complement_identity(self):
        for d in (10.0, 50.0, 100.0, 200.0):
            outage = outage_probability(M28, d, OutageSpec(130.0))
            curve = coverage_curve(M28, OutageSpec(130.0), r_min=d, r_max=d, step=1.0)
            assert curve == [(d, 1.0 - outage)]

    def test_single_point_grid(self):
        curve = coverage_curve(M28, OutageSpec(130.0), r_min=42.0, r_max=42.0, step=5.0)
        assert len(curve) == 1
        assert curve[0][0] == 42.0

    def test_default_grid_length(self):
        assert len(coverage_curve(M28, OutageSpec(130.0))) == 191

    def test_non_increasing_on_presets(self):
        d_grid = dict(r_min=10.0, r_max=200.0, step=0.5)
        for model in (M28, M28F, M73, M73F):
            for threshold in (100.0, 110.0, 120.0, 130.0, 140.0, 150.0):
                cov = [c for _, c in coverage_curve(model, OutageSpec(threshold), **d_grid)]
                assert np.all(np.diff(cov) <= 1e-12), (
                    f"coverage increased for threshold {threshold}"
                )

    def test_zero_sigma_step_curve(self):
        # deterministic loss crosses the budget once; coverage is a step
        spec = OutageSpec(mean_pl_hybrid(ZERO_SIGMA, 100.0))
        cov = [c for _, c in coverage_curve(ZERO_SIGMA, spec)]
        assert set(cov) == {0.0, 1.0}
        assert cov == sorted(cov, reverse=True)
