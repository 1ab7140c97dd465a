import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elca.em import loglik
from elca.model import (ElcaParams, InvalidParamsError, LcaParams, canonicalize, dumps,
                        implied_lca, load_params, random_init, sample, save_params, validate)


def test_validate_ok():
    p = ElcaParams(pi=[0.5, 0.5], tau=[1.0], a=[1.0], phi=[[0.2, 0.3], [0.9, 0.1]])
    assert validate(p) == []


def test_validate_pinned_scale():
    p = ElcaParams(pi=[1.0], tau=[0.5, 0.5], a=[0.4, 0.9], phi=[[0.5]])
    problems = validate(p)
    assert any("a_K != 1" in s for s in problems)


def test_validate_phi_index():
    p = ElcaParams(pi=[1.0], tau=[1.0], a=[1.0], phi=[[1.2], [0.5]])
    problems = validate(p)
    assert problems == ["phi[0, 0] = 1.2 outside [0, 1]"]


def test_validate_reports_every_problem():
    p = ElcaParams(pi=[0.7, 0.7], tau=[-0.1, 1.1], a=[0.0, 0.5], phi=[[0.5, 2.0]])
    problems = validate(p)
    assert len(problems) >= 5


def test_random_init_deterministic():
    a = random_init(6, 3, 2, seed=11)
    b = random_init(6, 3, 2, seed=11)
    assert a.allclose(b)
    assert validate(a) == []
    assert a.a[-1] == 1.0
    assert ((a.phi >= 0.05) & (a.phi <= 0.95)).all()
    assert ((a.a[:-1] >= 0.1) & (a.a[:-1] <= 0.9)).all()


def test_random_init_seed_sensitive():
    assert not random_init(6, 3, 2, seed=1).allclose(random_init(6, 3, 2, seed=2))


def test_canonicalize_swaps_clusters():
    p = ElcaParams(pi=[0.2, 0.8], tau=[1.0], a=[1.0], phi=[[0.1, 0.9], [0.3, 0.7]])
    c = canonicalize(p)
    np.testing.assert_array_equal(c.pi, [0.8, 0.2])
    np.testing.assert_array_equal(c.phi, [[0.9, 0.1], [0.7, 0.3]])


def test_canonicalize_orders_scales():
    p = ElcaParams(pi=[1.0], tau=[0.1, 0.6, 0.3], a=[0.7, 0.2, 1.0], phi=[[0.5]])
    c = canonicalize(p)
    np.testing.assert_array_equal(c.a, [0.2, 0.7, 1.0])
    np.testing.assert_array_equal(c.tau, [0.6, 0.1, 0.3])


def test_canonicalize_keeps_pinned_scale_last_on_ties():
    p = ElcaParams(pi=[1.0], tau=[0.3, 0.7], a=[1.0, 1.0], phi=[[0.5]])
    c = canonicalize(p)
    np.testing.assert_array_equal(c.tau, [0.3, 0.7])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 3))
def test_canonicalize_idempotent_and_likelihood_preserving(seed, g, k):
    p = random_init(5, g, k, seed)
    x = (np.random.default_rng(seed).random((5, 7)) < 0.5).astype(int)
    c = canonicalize(p)
    assert canonicalize(c).allclose(c)
    assert validate(c) == []
    assert abs(loglik(x, p) - loglik(x, c)) <= 1e-12 * max(1.0, abs(loglik(x, p)))


def test_implied_lca_special_cases():
    phi = np.array([[0.3, 0.6], [0.1, 0.9]])
    p = ElcaParams(pi=[0.5, 0.5], tau=[1.0], a=[1.0], phi=phi)
    np.testing.assert_array_equal(implied_lca(p).p, phi)
    q = ElcaParams(pi=[1.0], tau=[0.5, 0.5], a=[0.5, 1.0], phi=np.full((3, 1), 0.5))
    np.testing.assert_allclose(implied_lca(q).p, 0.375, rtol=0, atol=1e-15)


def test_implied_lca_matches_loop():
    p = random_init(5, 3, 3, seed=4)
    lca = implied_lca(p)
    for i, g in itertools.product(range(5), range(3)):
        s = 0.0
        for k in range(3):
            s += p.a[k] * p.tau[k]
        assert abs(lca.p[i, g] - p.phi[i, g] * s) < 1e-15


def test_implied_lca_same_cell_marginals():
    p = random_init(4, 2, 3, seed=9)
    lca = implied_lca(p)
    for i in range(4):
        elca_marg = sum(p.pi[g] * p.tau[k] * p.a[k] * p.phi[i, g]
                        for g in range(2) for k in range(3))
        lca_marg = sum(lca.pi[g] * lca.p[i, g] for g in range(2))
        assert abs(elca_marg - lca_marg) < 1e-14


def test_sample_degenerate():
    ones = ElcaParams(pi=[1.0], tau=[1.0], a=[1.0], phi=np.ones((4, 1)))
    assert sample(ones, 20, seed=0).matrix.cells.all()
    zeros = ones.replace(phi=np.zeros((4, 1)))
    assert not sample(zeros, 20, seed=0).matrix.cells.any()


def test_sample_frequency():
    p = ElcaParams(pi=[1.0], tau=[1.0], a=[1.0], phi=np.full((4, 1), 0.3))
    freq = sample(p, 50_000, seed=5).matrix.cells.mean(axis=1)
    np.testing.assert_allclose(freq, 0.3, atol=0.01)


def test_sample_respects_labels():
    p = ElcaParams(pi=[0.5, 0.5], tau=[0.4, 0.6], a=[0.3, 1.0],
                   phi=[[0.9, 0.2], [0.5, 0.6], [0.1, 0.8]])
    s = sample(p, 40_000, seed=8)
    x = s.matrix.cells
    for g, k in itertools.product(range(2), range(2)):
        sel = (s.z1 == g) & (s.z2 == k)
        n = sel.sum()
        expect = p.a[k] * p.phi[:, g]
        sigma = np.sqrt(expect * (1 - expect) / n)
        assert (np.abs(x[:, sel].mean(axis=1) - expect) <= 3 * sigma + 1e-12).all()


def test_sample_deterministic():
    p = random_init(5, 2, 2, seed=3)
    a = sample(p, 30, seed=12)
    b = sample(p, 30, seed=12)
    assert a.matrix == b.matrix
    np.testing.assert_array_equal(a.z1, b.z1)


def test_sample_rejects_zero_edges():
    with pytest.raises(ValueError):
        sample(random_init(3, 1, 1, 0), 0, seed=1)


def test_params_round_trip_bit_exact(tmp_path):
    p = random_init(4, 3, 2, seed=21).replace(vertex_labels=["a", "b", "c", "d"])
    path = tmp_path / "p.json"
    save_params(p, path)
    q = load_params(path)
    for f in ("pi", "tau", "a", "phi"):
        assert getattr(p, f).tobytes() == getattr(q, f).tobytes()
    assert q.vertex_labels == ("a", "b", "c", "d")
    assert dumps(q.to_dict()) == path.read_text()


def test_invalid_document_rejected():
    with pytest.raises(InvalidParamsError):
        ElcaParams.from_dict({"pi": [1.0], "tau": [1.0], "a": [0.5], "phi": [[0.1]]})


def test_lca_document_from_elca_fit():
    p = random_init(3, 2, 2, seed=2)
    lca = LcaParams.from_dict(p.to_dict())
    np.testing.assert_allclose(lca.p, implied_lca(p).p)
