import hashlib
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptive_inertia.netgen import (Network, NetworkError, gen_erdos_renyi, gen_ring_regular,
                                     gen_scale_free, gen_spider_web, gen_watts_strogatz, generate,
                                     laplacian, ring_eigenvalue_formula)

KINDS = ["RG", "ER", "SW", "SF", "SP"]


def assert_valid(net: Network):
    A = net.adjacency
    assert A.shape == (net.n, net.n)
    assert np.array_equal(A, A.T)
    assert not A.diagonal().any()
    assert set(np.unique(A)) <= {0, 1}
    assert net.is_connected()
    assert np.array_equal(net.degrees, A.sum(axis=1))


# ring lattice

def test_ring_100_degree_4_connected():
    net = gen_ring_regular(100, 4)
    assert_valid(net)
    assert set(net.degrees) == {4}


def test_ring_3_2_is_triangle():
    net = gen_ring_regular(3, 2)
    assert net.edges == [(0, 1), (0, 2), (1, 2)]


def test_ring_6_4_lambda_max_matches_dense_circulant():
    from scipy.linalg import circulant
    col = np.array([4, -1, -1, 0, -1, -1], dtype=float)
    oracle = np.linalg.eigvalsh(circulant(col)).max()
    got = np.linalg.eigvalsh(laplacian(gen_ring_regular(6, 4)).values).max()
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got == pytest.approx(6.0, abs=1e-12)


@pytest.mark.parametrize("n,d", [(10, 3), (10, 10), (10, 12), (2, 2), (10, 0)])
def test_ring_rejects_bad_degree(n, d):
    with pytest.raises(NetworkError):
        gen_ring_regular(n, d)


def test_ring_lattice_spectrum_circulant_form():
    w = np.linalg.eigvalsh(laplacian(gen_ring_regular(100, 4)).values)
    th = 2 * np.pi * np.arange(100) / 100
    expected = np.sort(4 - 2 * np.cos(th) - 2 * np.cos(2 * th))
    assert np.allclose(w, expected, atol=1e-10)
    # supremum 6.25 at cos(theta) = -1/4, nowhere near the quoted 16
    assert 6.24 < w.max() <= 6.25


# Erdos-Renyi

def test_er_mean_degree_band():
    net = gen_erdos_renyi(100, 0.1, seed=1)
    assert_valid(net)
    assert 7 <= net.degrees.mean() <= 13


def test_er_near_complete():
    for seed in range(5):
        net = gen_erdos_renyi(5, 0.999, seed=seed)
        assert_valid(net)
        assert net.n_edges >= 9


def test_er_edge_set_frozen():
    net = gen_erdos_renyi(50, 0.1, seed=7)
    digest = hashlib.sha256(json.dumps(net.edges).encode()).hexdigest()
    assert net.n_edges == 127
    assert digest == "9bb0000273431d29526ac76d13388d412dafdd70d535ef49182cab581071db62"


def test_er_retry_exhaustion():
    with pytest.raises(NetworkError, match="attempts"):
        gen_erdos_renyi(200, 0.001, seed=0)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
def test_er_rejects_p(p):
    with pytest.raises(NetworkError):
        gen_erdos_renyi(10, p)


# Watts-Strogatz

def test_ws_zero_rewiring_is_ring():
    assert np.array_equal(gen_watts_strogatz(100, 4, 0.0, seed=3).adjacency,
                          gen_ring_regular(100, 4).adjacency)


def test_ws_rewired_count_band():
    net = gen_watts_strogatz(100, 4, 0.05, seed=3)
    assert_valid(net)
    # binomial(200, 0.05): mean 10
    assert 2 <= net.params["rewired"] <= 20
    lattice = gen_ring_regular(100, 4).adjacency
    moved = int(np.triu(net.adjacency & (1 - lattice)).sum())
    assert moved == net.params["rewired"]


def test_ws_full_rewiring():
    net = gen_watts_strogatz(100, 4, 1.0, seed=5)
    assert_valid(net)
    assert len(set(net.degrees)) > 1
    assert net.n_edges == 200


# scale-free

def test_sf_hub_emergence_over_seeds():
    for seed in range(20):
        net = gen_scale_free(100, 2, seed=seed)
        assert_valid(net)
        assert net.degrees.max() > 2 * net.degrees.mean()


def test_sf_m1_is_tree():
    for seed in range(5):
        net = gen_scale_free(5, 1, seed=seed)
        assert_valid(net)
        assert net.n_edges == 4


def test_sf_edge_count_formula():
    n, m = 100, 2
    assert gen_scale_free(n, m, seed=4).n_edges == (m + 1) * m // 2 + (n - m - 1) * m


def _ccdf_exponent(degrees):
    # log-log regression of P(K >= k) against k; pdf exponent = 1 - slope
    ks = np.arange(degrees.min(), degrees.max() + 1)
    ccdf = np.array([(degrees >= k).mean() for k in ks])
    slope = np.polyfit(np.log(ks), np.log(ccdf), 1)[0]
    return 1.0 - slope


def test_sf_tail_exponent_band():
    gamma = _ccdf_exponent(gen_scale_free(100, 2, seed=9).degrees)
    assert 2.0 <= gamma <= 3.5


def test_sf_rejects_m():
    with pytest.raises(NetworkError):
        gen_scale_free(5, 5)
    with pytest.raises(NetworkError):
        gen_scale_free(5, 0)


# star

def test_star_degrees():
    net = gen_spider_web(100)
    assert_valid(net)
    assert net.degrees[0] == 99
    assert set(net.degrees[1:]) == {1}


def test_star_n2_single_edge():
    assert gen_spider_web(2).edges == [(0, 1)]


def test_star_spectrum():
    w = np.linalg.eigvalsh(laplacian(gen_spider_web(100)).values)
    assert w[0] == pytest.approx(0, abs=1e-8)
    assert np.allclose(w[1:99], 1.0, atol=1e-8)
    assert w[99] == pytest.approx(100, abs=1e-8)


# laplacian

def test_laplacian_rejects_nonpositive_coupling():
    for K in (0.0, -1.0):
        with pytest.raises(NetworkError):
            laplacian(gen_spider_web(4), K)


def test_cycle8_closed_form():
    w = np.linalg.eigvalsh(laplacian(gen_ring_regular(8, 2)).values)
    expected = np.sort([2 * (1 - math.cos(2 * math.pi * j / 8)) for j in range(8)])
    assert np.allclose(w, expected, atol=1e-12)


@given(kind=st.sampled_from(KINDS), seed=st.integers(0, 2**32 - 1),
       K=st.floats(0.1, 10.0))
def test_laplacian_invariants(kind, seed, K):
    net = generate(kind, 30, seed=seed)
    assert_valid(net)
    L = laplacian(net, K).values
    assert np.array_equal(L, L.T)
    assert np.abs(L @ np.ones(30)).max() < 1e-12
    w1 = np.linalg.eigvalsh(laplacian(net, 1.0).values)
    wK = np.linalg.eigvalsh(L)
    assert wK.min() >= -1e-9
    assert np.allclose(wK, K * w1, rtol=1e-10, atol=1e-10)


@given(kind=st.sampled_from(KINDS), seed=st.integers(0, 2**63 - 1))
def test_generators_deterministic(kind, seed):
    a, b = generate(kind, 40, seed=seed), generate(kind, 40, seed=seed)
    assert a.to_json() == b.to_json()


def test_json_round_trip_and_canonical_edges():
    net = generate("SF", 30, seed=2)
    data = json.loads(net.to_json())
    assert set(data) >= {"kind", "n", "params", "seed", "edges"}
    assert data["edges"] == sorted(data["edges"])
    assert all(i < j for i, j in data["edges"])
    back = Network.from_json(net.to_json())
    assert back.to_json() == net.to_json()


# reference formula

def test_ring_formula_max_16():
    vals = [ring_eigenvalue_formula(100, 4, k) for k in range(1, 101)]
    assert max(vals) == pytest.approx(16.0)
    assert vals.index(max(vals)) + 1 == 51


def test_ring_formula_k1_zero():
    assert ring_eigenvalue_formula(37, 6, 1) == 0.0


def test_ring_formula_disagrees_with_cycle():
    assert ring_eigenvalue_formula(8, 2, 5) == pytest.approx(8.0)
    true = np.linalg.eigvalsh(laplacian(gen_ring_regular(8, 2)).values).max()
    assert true == pytest.approx(4.0)


def test_ring_formula_rejects_index():
    with pytest.raises(NetworkError):
        ring_eigenvalue_formula(8, 2, 0)


def test_unknown_kind():
    with pytest.raises(NetworkError):
        generate("XX", 10)
