import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elca.hypergraph import size_histogram
from elca.model import ElcaParams, LcaParams, implied_lca, random_init, sample
from elca.sizedist import (ConditionViolatedError, moments, poisson_binomial_pmf,
                           poisson_mixture_limit_elca, poisson_mixture_limit_lca,
                           poisson_truncation, size_pmf_elca, size_pmf_lca, total_variation)
from oracles import enumerate_poisson_binomial, pmf_moments


def test_fair_coins():
    np.testing.assert_allclose(poisson_binomial_pmf([0.5, 0.5]).probs, [0.25, 0.5, 0.25])


def test_point_mass():
    np.testing.assert_array_equal(poisson_binomial_pmf([1, 1, 0]).probs, [0, 0, 1, 0])


def test_frozen_small_case():
    expected = [0.0315, 0.332, 0.455, 0.168, 0.0135]
    np.testing.assert_allclose(poisson_binomial_pmf([0.1, 0.5, 0.9, 0.3]).probs, expected,
                               rtol=0, atol=1e-12)


def test_empty_probs():
    np.testing.assert_array_equal(poisson_binomial_pmf([]).probs, [1.0])


def test_out_of_range_prob():
    with pytest.raises(ValueError, match="probability 1"):
        poisson_binomial_pmf([0.2, 1.5])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_matches_enumeration(probs):
    pmf = poisson_binomial_pmf(probs)
    np.testing.assert_allclose(pmf.probs, enumerate_poisson_binomial(probs), rtol=0, atol=1e-12)
    p = np.array(probs)
    assert abs(pmf.mean() - p.sum()) < 1e-10
    assert abs(pmf.var() - (p * (1 - p)).sum()) < 1e-10
    assert abs(pmf.probs.sum() - 1) < 1e-10


def test_lca_single_cluster_is_poisson_binomial():
    p = LcaParams(pi=[1.0], p=[[0.2], [0.7], [0.4]])
    np.testing.assert_allclose(size_pmf_lca(p).probs, poisson_binomial_pmf([0.2, 0.7, 0.4]).probs)


def test_elca_k_one_equals_lca():
    p = random_init(6, 3, 1, seed=2)
    np.testing.assert_allclose(size_pmf_elca(p).probs, size_pmf_lca(implied_lca(p)).probs,
                               rtol=0, atol=1e-15)


def test_elca_pmf_against_simulation():
    p = random_init(8, 2, 3, seed=4)
    s = sample(p, 100_000, seed=6)
    emp = size_histogram(s.matrix).as_array(8) / 100_000
    assert total_variation(size_pmf_elca(p), emp) < 0.01


def test_total_variation_pads():
    assert total_variation([1.0], [0.5, 0.5]) == pytest.approx(0.5)
    assert total_variation([0.2, 0.8], [0.2, 0.8]) == 0.0


def test_pmf_csv():
    text = poisson_binomial_pmf([0.5]).to_csv()
    assert text == "size,probability\n0,0.5\n1,0.5\n"


def _pair(seed, n=None, g=None, k=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 10))
    g = g or int(rng.integers(1, 4))
    k = k or int(rng.integers(1, 4))
    elca = random_init(n, g, k, seed)
    return implied_lca(elca), elca


def test_moments_k_one_has_no_gap():
    lca, elca = _pair(1, k=1)
    r = moments(lca, elca)
    assert r.var_gap == 0.0
    assert abs(r.mean_lca - r.mean_elca) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_moments_match_exact_pmfs(seed):
    lca, elca = _pair(seed, k=3)
    r = moments(lca, elca)
    m_a, v_a = pmf_moments(size_pmf_lca(lca).probs)
    m_b, v_b = pmf_moments(size_pmf_elca(elca).probs)
    assert abs(r.mean_lca - m_a) < 1e-9 and abs(r.var_lca - v_a) < 1e-9
    assert abs(r.mean_elca - m_b) < 1e-9 and abs(r.var_elca - v_b) < 1e-9
    assert abs(r.mean_lca - r.mean_elca) < 1e-10
    assert r.var_gap >= -1e-12


def test_moments_condition_violated():
    lca, elca = _pair(3, n=4, g=2, k=2)
    bad = LcaParams(pi=lca.pi, p=np.clip(lca.p + 0.01, 0, 1))
    with pytest.raises(ConditionViolatedError):
        moments(bad, elca)


def test_moments_dimension_mismatch():
    lca, _ = _pair(3, n=4, g=2, k=2)
    with pytest.raises(ValueError, match="dimension"):
        moments(lca, random_init(5, 2, 2, 0))


def test_single_poisson_zero_mass():
    pmf = poisson_mixture_limit_lca([1.0], [1.0])
    assert pmf[0] == pytest.approx(math.exp(-1), abs=1e-15)
    assert pmf.tail_bound < 1e-12
    assert abs(pmf.probs.sum() + pmf.tail_bound - 1) < 1e-12


def test_equal_components_collapse():
    a = poisson_mixture_limit_lca([0.3, 0.7], [2.5, 2.5], truncate=30)
    b = poisson_mixture_limit_lca([1.0], [2.5], truncate=30)
    np.testing.assert_allclose(a.probs, b.probs, rtol=0, atol=1e-15)


def test_elca_limit_matches_flattened():
    pi, tau = [0.4, 0.6], [0.7, 0.3]
    lam = np.array([[1.0, 3.0], [2.0, 6.0]])
    a = poisson_mixture_limit_elca(pi, tau, lam, truncate=40)
    b = poisson_mixture_limit_lca(np.outer(pi, tau).ravel(), lam.ravel(), truncate=40)
    np.testing.assert_allclose(a.probs, b.probs, rtol=0, atol=1e-15)


def test_limit_rejects_bad_rates():
    with pytest.raises(ValueError):
        poisson_mixture_limit_lca([1.0], [0.0])
    with pytest.raises(ValueError):
        poisson_mixture_limit_elca([1.0], [1.0], [[1.0, 2.0]])


@pytest.mark.parametrize("rate", [0.1, 1.0, 5.0, 40.0])
def test_truncation_tail(rate):
    from scipy.stats import poisson
    t = poisson_truncation(rate)
    assert poisson.sf(t, rate) < 1e-12
    assert t > rate


def test_convergence_to_poisson():
    tvs = []
    for n in (20, 80, 320):
        p = LcaParams(pi=[1.0], p=np.full((n, 1), 3.0 / n))
        tvs.append(total_variation(size_pmf_lca(p), poisson_mixture_limit_lca([1.0], [3.0])))
    assert tvs[0] > tvs[1] > tvs[2]
    assert tvs[2] < 0.02
