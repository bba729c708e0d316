import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from pqtlsobs.errors import StatsError
from pqtlsobs.stats import bootstrap_uplift, mcnemar_test, wilson_interval

settings.register_profile("stats", deadline=None, max_examples=200)
settings.load_profile("stats")


# -- Wilson interval -----------------------------------------------------------


def test_wilson_hybrid_adoption_bucket():
    low, high = wilson_interval(62, 100)
    assert round(low, 3) == 0.522
    assert round(high, 3) == 0.709


def test_wilson_rare_outcome_bucket():
    low, high = wilson_interval(11, 100)
    assert round(low, 3) == 0.063
    assert round(high, 3) == 0.186


def test_wilson_zero_successes_pins_lower_bound():
    low, high = wilson_interval(0, 100)
    assert low == 0.0
    assert high > 0.0


def test_wilson_all_successes_pins_upper_bound():
    low, high = wilson_interval(100, 100)
    assert high == 1.0
    assert low < 1.0


def test_wilson_rejects_empty_and_out_of_range():
    with pytest.raises(StatsError):
        wilson_interval(1, 0)
    with pytest.raises(StatsError):
        wilson_interval(5, 4)
    with pytest.raises(StatsError):
        wilson_interval(-1, 4)


@given(st.integers(min_value=0, max_value=500), st.integers(min_value=1, max_value=500))
def test_wilson_contains_point_estimate(k, n):
    k = min(k, n)
    low, high = wilson_interval(k, n)
    assert 0.0 <= low <= k / n <= high <= 1.0


@given(st.integers(min_value=0, max_value=200), st.integers(min_value=1, max_value=200))
def test_wilson_matches_reference_implementation(k, n):
    k = min(k, n)
    low, high = wilson_interval(k, n)
    ref_low, ref_high = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert math.isclose(low, ref_low, abs_tol=1e-12)
    assert math.isclose(high, ref_high, abs_tol=1e-12)


@given(st.integers(min_value=1, max_value=300))
def test_wilson_narrows_with_more_trials(n):
    low1, high1 = wilson_interval(n, 2 * n)
    low2, high2 = wilson_interval(2 * n, 4 * n)
    assert (high2 - low2) < (high1 - low1)


# -- McNemar exact test --------------------------------------------------------


def test_mcnemar_one_sided_sweep():
    result = mcnemar_test(70, 0)
    assert result["statistic"] == 0
    assert result["p_value"] == 1.6940658945086007e-21
    assert result["variant"] == "exact_binomial"
    assert not result["degenerate"]


def test_mcnemar_balanced_discordance_is_uninformative():
    assert mcnemar_test(5, 5)["p_value"] == 1.0


def test_mcnemar_single_discordant_pair():
    # one flip out of one discordant pair carries no signal
    assert mcnemar_test(1, 0)["p_value"] == 1.0


def test_mcnemar_degenerate_when_no_discordance():
    result = mcnemar_test(0, 0)
    assert result["degenerate"]
    assert result["p_value"] == 1.0


def test_mcnemar_rejects_negative_counts():
    with pytest.raises(StatsError):
        mcnemar_test(-1, 3)


@given(st.integers(min_value=0, max_value=80), st.integers(min_value=0, max_value=80))
def test_mcnemar_symmetric_in_discordant_cells(b, c):
    assert mcnemar_test(b, c) == mcnemar_test(c, b)


@given(st.integers(min_value=0, max_value=200), st.integers(min_value=0, max_value=200))
def test_mcnemar_p_value_is_a_probability(b, c):
    p = mcnemar_test(b, c)["p_value"]
    assert 0.0 < p <= 1.0


# -- bootstrap uplift ----------------------------------------------------------


def _campaign_pairs():
    # 250 targets: 70 gained by mode b, 180 identical hits, none lost
    return [(0, 1)] * 70 + [(1, 1)] * 130 + [(0, 0)] * 50


def test_bootstrap_uplift_point_and_interval():
    result = bootstrap_uplift(_campaign_pairs(), seed=7)
    assert result["point"] == pytest.approx(0.28)
    assert result["ci_low"] == 0.224
    assert result["ci_high"] == 0.336
    assert result["seed"] == 7


def test_bootstrap_uplift_accepts_mapping_pairs():
    pairs = [{"mode_a_hit": 0, "mode_b_hit": 1}] * 70 + [{"mode_a_hit": 1, "mode_b_hit": 1}] * 180
    result = bootstrap_uplift(pairs, seed=7)
    assert result["point"] == pytest.approx(70 / 250)


def test_bootstrap_uplift_is_seed_deterministic():
    a = bootstrap_uplift(_campaign_pairs(), seed=11)
    b = bootstrap_uplift(_campaign_pairs(), seed=11)
    c = bootstrap_uplift(_campaign_pairs(), seed=12)
    assert a == b
    assert (a["ci_low"], a["ci_high"]) != (c["ci_low"], c["ci_high"])


def test_bootstrap_uplift_degenerate_identical_pairs():
    result = bootstrap_uplift([(1, 1)] * 40)
    assert result["point"] == 0.0
    assert result["ci_low"] == 0.0
    assert result["ci_high"] == 0.0


def test_bootstrap_uplift_guards():
    with pytest.raises(StatsError):
        bootstrap_uplift([])
    with pytest.raises(StatsError):
        bootstrap_uplift([(0, 1)], iterations=100)


@given(st.integers(min_value=0, max_value=2**32))
def test_bootstrap_interval_brackets_point(seed):
    result = bootstrap_uplift(_campaign_pairs(), iterations=1000, seed=seed)
    assert result["ci_low"] <= result["point"] <= result["ci_high"]
