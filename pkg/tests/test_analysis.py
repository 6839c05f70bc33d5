import math

import numpy as np
import pytest
from scipy import stats

from randprio.analysis import (RatioNotion, adversarial_search, avg_ratio, berry_esseen_gap,
                               berry_esseen_grid, empirical_tail, instance_ratio, normalized_sums,
                               ratio_trials, summarize_ratio, trial_instance)
from randprio.bounds import dkw_epsilon, tail_bound_iid
from randprio.core import Instance, Mode, validate_instance
from randprio.distributions import Beta, Discrete, Uniform
from randprio.generators import NonIidGrid
from randprio.matching import optimal_welfare
from randprio.rp import rp_exact


def test_trial_instances_are_valid_and_distinct():
    a = trial_instance(Uniform(), 6, seed=1, trial=0)
    b = trial_instance(Uniform(), 6, seed=1, trial=1)
    assert validate_instance(a) == [] and a != b
    assert trial_instance(Uniform(), 6, seed=1, trial=0) == a


def test_ratio_trials_use_exact_rp_for_small_n():
    rt = ratio_trials(Beta(2, 5), 5, 20, rp_samples=10, seed=3)
    for t in range(3):
        inst = trial_instance(Beta(2, 5), 5, 3, t)
        assert rt.sw_opt[t] == optimal_welfare(inst).value
        assert rt.sw_rp[t] == pytest.approx(rp_exact(inst).expected_welfare, abs=1e-12)
    assert (rt.ratios >= 1 - 1e-12).all()


@pytest.mark.parametrize("notion", list(RatioNotion))
def test_n2_ratio_is_exactly_one(notion):
    est = avg_ratio(Uniform(), 2, 100, rp_samples=10, notion=notion, seed=0)
    assert est.mean == 1.0 and est.stderr == 0.0


def test_ratio_notions_against_direct_formulas():
    rt = ratio_trials(Uniform(), 12, 150, rp_samples=200, seed=5)
    mean, se = summarize_ratio(rt, RatioNotion.EXPECTATION_OF_RATIO)
    r = rt.sw_opt / rt.sw_rp
    assert mean == pytest.approx(r.mean(), rel=1e-12)
    assert se == pytest.approx(r.std(ddof=1) / math.sqrt(r.size), rel=1e-9)
    mean, se = summarize_ratio(rt, RatioNotion.RATIO_OF_EXPECTATIONS)
    assert mean == pytest.approx(rt.sw_opt.mean() / rt.sw_rp.mean(), rel=1e-12)
    # delta-method stderr agrees with a bootstrap
    rng = np.random.default_rng(0)
    idx = rng.integers(0, r.size, (4000, r.size))
    boot = rt.sw_opt[idx].mean(axis=1) / rt.sw_rp[idx].mean(axis=1)
    assert se == pytest.approx(boot.std(), rel=0.15)


def test_avg_ratio_is_deterministic_across_workers():
    a = avg_ratio(Uniform(), 10, 100, 300, seed=8, workers=1)
    b = avg_ratio(Uniform(), 10, 100, 300, seed=8, workers=3)
    assert a == b
    assert a.ci95[0] < a.mean < a.ci95[1]


def test_avg_ratio_needs_enough_trials():
    with pytest.raises(ValueError):
        avg_ratio(Uniform(), 5, 99, 10)


def test_avg_ratio_on_grid_model():
    est = avg_ratio(lambda n: NonIidGrid.checkerboard(n, Uniform(), Beta(2, 5)), 6, 100, 10, seed=1)
    assert est.model["n"] == 6
    assert 1.0 <= est.mean < 3.0


# tails

@pytest.mark.parametrize("n", [5, 12])
def test_tail_extremes(n):
    assert empirical_tail(Uniform(), n, 0.0, 100, 50, seed=1).empirical_prob == 0.0
    assert empirical_tail(Uniform(), n, n + 1.0, 100, 50, seed=1).empirical_prob == 1.0


def test_tail_report_fields():
    rep = empirical_tail(Uniform(), 20, 5.0, 100, 50, seed=2)
    assert rep.theoretical_bound == tail_bound_iid(20, Uniform().std())
    assert rep.to_dict()["vacuous"] == rep.vacuous
    small = empirical_tail(Uniform(), 4, 2.0, 100, 50, seed=2)
    assert small.vacuous


# Berry-Esseen

def exact_bernoulli_sum_cdf(x, n_sum):
    """CDF of (Bin(n_sum, 1/2) - n_sum/2) / (sqrt(n_sum)/2), by enumeration."""
    ks = np.arange(n_sum + 1)
    z = (ks - n_sum / 2) / (math.sqrt(n_sum) / 2)
    pmf = np.array([math.comb(n_sum, k) for k in ks]) / 2 ** n_sum
    return np.array([pmf[z <= xi].sum() for xi in x])


def test_sup_gap_matches_binomial_enumeration():
    grid = berry_esseen_grid(401)
    exact_gap = np.max(np.abs(exact_bernoulli_sum_cdf(grid, 4) - stats.norm.cdf(grid)))
    rep = berry_esseen_gap(Discrete((0, 1), (0.5, 0.5)), 4, 20_000, 401, seed=6)
    assert abs(rep.empirical_sup_gap - exact_gap) <= dkw_epsilon(20_000, 0.999)
    assert rep.passes()


def test_normalized_sums_are_standardized():
    z = normalized_sums(Beta(2, 5), 30, 50_000, seed=1)
    assert abs(z.mean()) < 4 / math.sqrt(z.size)
    assert abs(z.var() - 1) < 0.03


def test_berry_esseen_argument_checks():
    with pytest.raises(ValueError):
        berry_esseen_gap(Uniform(), 10, 9_999, 200, 0)
    with pytest.raises(ValueError):
        berry_esseen_gap(Uniform(), 10, 10_000, 99, 0)


# adversarial search

def test_box_witness_ratio():
    assert instance_ratio(np.array([[1, 0.9], [1, 0]])) == pytest.approx(1.9 / 1.45, abs=1e-12)


def test_adversarial_n2_unit_range_is_one():
    res = adversarial_search(2, 50, 2, seed=0)
    assert res.ratio == 1.0


def test_adversarial_box_finds_gap():
    res = adversarial_search(2, 400, 3, seed=0, mode=Mode.BOX)
    assert res.ratio >= 1.3
    assert instance_ratio(res.instance.values) == res.ratio
    best = [b for _, _, b in res.trace]
    assert best == sorted(best)
    assert len(res.trace) == 1200


def test_adversarial_unit_range_keeps_presets():
    res = adversarial_search(4, 100, 2, seed=3)
    assert validate_instance(res.instance) == []
    assert res.ratio >= 1.0
    assert adversarial_search(4, 100, 2, seed=3) == res


def test_adversarial_size_cap():
    with pytest.raises(ValueError):
        adversarial_search(8, 1, 1, 0)
