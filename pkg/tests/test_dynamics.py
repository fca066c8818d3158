import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_inertia.dynamics import (ConstantInertia, DisturbanceSpec, DivergenceError,
                                       SimParams, disturbance_signal, simulate,
                                       simulate_nonlinear)
from adaptive_inertia.modal import ModeParams, impulse_response_exact
from adaptive_inertia.netgen import Network, gen_spider_web, generate, laplacian
from adaptive_inertia.spectral import decompose

from conftest import path2_laplacian


def _spec(n=20, kind="ER", seed=1):
    L = laplacian(generate(kind, n, seed=seed))
    return L, decompose(L)


# disturbance signals

def test_monotonic_decay_at_zero():
    L, spec = _spec()
    d = DisturbanceSpec("monotonic_decay", 1.0)
    sig = disturbance_signal(d, 0.0, spec)
    assert np.linalg.norm(sig) == pytest.approx(1.0)
    assert np.allclose(sig, spec.principal_vector)


def test_oscillatory_peak():
    L, spec = _spec()
    sig = disturbance_signal(DisturbanceSpec("oscillatory_decay", 1.0), 0.25, spec)
    assert np.linalg.norm(sig) == pytest.approx(math.exp(-0.25), rel=1e-14)


@pytest.mark.parametrize("kind", ["impulse", "monotonic_decay", "oscillatory_decay"])
def test_zero_amplitude_signal(kind):
    _, spec = _spec()
    for t in (0.0, 0.3, 7.0):
        assert not disturbance_signal(DisturbanceSpec(kind, 0.0), t, spec).any()


def test_impulse_has_no_forcing():
    _, spec = _spec()
    assert not disturbance_signal(DisturbanceSpec("impulse", 3.0), 0.0, spec).any()


def test_directions():
    _, spec = _spec()
    assert np.allclose(DisturbanceSpec(direction="uniform").direction_vector(spec), 1 / math.sqrt(20))
    e = DisturbanceSpec(direction="node", node=4).direction_vector(spec)
    assert e[4] == 1 and e.sum() == 1
    v = tuple(range(20))
    assert np.array_equal(DisturbanceSpec(direction="explicit", vector=v).direction_vector(spec), v)
    with pytest.raises(ValueError):
        DisturbanceSpec(direction="explicit", vector=(1.0, 2.0)).direction_vector(spec)
    with pytest.raises(ValueError):
        DisturbanceSpec(direction="node")
    with pytest.raises(ValueError):
        DisturbanceSpec(amplitude=math.inf)


def test_negative_time_rejected():
    _, spec = _spec()
    with pytest.raises(ValueError):
        disturbance_signal(DisturbanceSpec(), -1.0, spec)


# simulate

def test_sim_params_validation():
    with pytest.raises(ValueError):
        SimParams(dt=1e-3, control_period=0.0025)
    with pytest.raises(ValueError):
        SimParams(dt=1e-3, control_period=1e-4)
    with pytest.raises(ValueError):
        SimParams(t_end=0)
    p = SimParams()
    assert p.n_steps == 10000 and p.hold_steps == 10


@pytest.mark.parametrize("kind", ["impulse", "monotonic_decay", "oscillatory_decay"])
def test_zero_disturbance_zero_trajectory(kind):
    L, spec = _spec()
    tr = simulate(L, DisturbanceSpec(kind, 0.0), SimParams(t_end=1.0), ConstantInertia(0.1), spec)
    assert not tr.theta_dev.any() and not tr.eta.any() and not tr.h_cumulative.any()


def test_two_node_matches_analytic():
    L = path2_laplacian()
    spec = decompose(L)
    M, D = 0.5, 0.8
    tr = simulate(L, DisturbanceSpec("impulse", 1.0), SimParams(D=D, dt=1e-4, t_end=5.0,
                                                                control_period=1e-4),
                  ConstantInertia(M), spec)
    exact = impulse_response_exact(ModeParams(M, D, 2.0), tr.times)
    assert np.abs(tr.eta[:, 1] - exact).max() < 1e-6
    assert np.abs(tr.eta[:, 0]).max() < 1e-12


def test_star_principal_impulse_selective(star100):
    _, L, spec = star100
    tr = simulate(L, DisturbanceSpec("impulse", 1.0), SimParams(t_end=2.0),
                  ConstantInertia(0.01), spec)
    assert np.abs(tr.eta[:, :-1]).max() < 1e-8
    assert np.abs(tr.eta[:, -1]).max() > 1e-3


def test_momentum_kick_divides_by_initial_inertia():
    L = path2_laplacian()
    spec = decompose(L)
    args = (SimParams(t_end=0.5), ConstantInertia(0.25), spec)
    v = simulate(L, DisturbanceSpec("impulse", 1.0), *args)
    m = simulate(L, DisturbanceSpec("impulse", 1.0, kick="momentum"), *args)
    assert np.allclose(m.eta, v.eta / 0.25, rtol=1e-12, atol=1e-15)


def test_trajectory_invariants():
    L, spec = _spec()
    tr = simulate(L, DisturbanceSpec("oscillatory_decay", 1.0), SimParams(t_end=2.0),
                  ConstantInertia(0.05), spec)
    n = tr.times.size
    for arr in (tr.theta_dev, tr.theta_dev_dot, tr.eta, tr.eta_dot, tr.inertia_trace,
                tr.h_cumulative):
        assert arr.shape[0] == n
    assert np.allclose(np.diff(tr.times), 1e-3)
    assert np.all(np.diff(tr.h_cumulative) >= 0)


def test_energy_non_increasing():
    L, spec = _spec(15, "SW", 2)
    M = 0.2
    rng = np.random.default_rng(0)
    state = (rng.normal(size=15) * 0.1, rng.normal(size=15) * 0.1)
    tr = simulate(L, DisturbanceSpec("impulse", 0.0), SimParams(t_end=5.0),
                  ConstantInertia(M), spec, initial_state=state)
    Lv = L.values
    E = 0.5 * M * np.sum(tr.theta_dev_dot**2, axis=1) + 0.5 * np.einsum(
        "ti,ij,tj->t", tr.theta_dev, Lv, tr.theta_dev)
    assert np.diff(E).max() <= 1e-9


def test_step_halving_order():
    L, spec = _spec(10, "SF", 3)
    rng = np.random.default_rng(1)
    state = (rng.normal(size=10), np.zeros(10))

    def final(dt):
        p = SimParams(D=0.8, dt=dt, t_end=2.0, control_period=dt)
        tr = simulate(L, DisturbanceSpec("monotonic_decay", 1.0), p, ConstantInertia(0.5), spec,
                      initial_state=state)
        return np.concatenate([tr.theta_dev[-1], tr.theta_dev_dot[-1]])

    ref = final(2.5e-4)
    e1 = np.linalg.norm(final(0.02) - ref)
    e2 = np.linalg.norm(final(0.01) - ref)
    assert math.log2(e1 / e2) >= 3.5


def test_deterministic():
    L, spec = _spec()
    run = lambda: simulate(L, DisturbanceSpec("monotonic_decay", 1.0), SimParams(t_end=1.0),
                           ConstantInertia(0.05), spec)
    a, b = run(), run()
    assert a.theta_dev.tobytes() == b.theta_dev.tobytes()
    assert a.h_cumulative.tobytes() == b.h_cumulative.tobytes()


def _rk4_mode(M, D, lam, x, v, forcing, dt, steps):
    """Scalar RK4 of M x'' + D x' + lam x = f(t); the independent single-mode integrator."""
    xs = [x]
    for i in range(steps):
        t = i * dt
        f = lambda s, a, b: (b, (forcing(s) - D * b - lam * a) / M)
        k1 = f(t, x, v)
        k2 = f(t + dt / 2, x + dt / 2 * k1[0], v + dt / 2 * k1[1])
        k3 = f(t + dt / 2, x + dt / 2 * k2[0], v + dt / 2 * k2[1])
        k4 = f(t + dt, x + dt * k3[0], v + dt * k3[1])
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v = v + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        xs.append(x)
    return np.array(xs)


@settings(max_examples=10)
@given(n=st.integers(3, 10), seed=st.integers(0, 1000), M=st.floats(0.05, 2.0),
       kind=st.sampled_from(["ER", "SF", "SP"]))
def test_modal_decoupling(n, seed, M, kind):
    net = generate(kind, n, seed=seed) if kind != "ER" else generate("ER", n, seed=seed, p=0.5)
    L = laplacian(net)
    spec = decompose(L)
    dist = DisturbanceSpec("monotonic_decay", 1.0, "uniform")
    p = SimParams(D=0.8, dt=1e-3, t_end=1.0)
    tr = simulate(L, dist, p, ConstantInertia(M), spec)
    g = spec.eigenvectors.T @ dist.direction_vector(spec)
    for k in range(n):
        ref = _rk4_mode(M, 0.8, spec.eigenvalues[k], 0.0, 0.0, lambda s: g[k] * math.exp(-s),
                        1e-3, p.n_steps)
        assert np.abs(tr.eta[:, k] - ref).max() < 1e-8


def test_divergence_detected():
    L = path2_laplacian()
    with pytest.raises(DivergenceError) as info:
        simulate(L, DisturbanceSpec("impulse", 1e12), SimParams(t_end=1.0), ConstantInertia(1.0))
    assert info.value.step >= 1


class _Recorder:
    def __init__(self):
        self.times = []

    def reset(self, spectrum):
        return 0.3

    def sample(self, t, theta, theta_dot):
        self.times.append(t)
        return 0.3 + 0.01 * len(self.times)


def test_zero_order_hold():
    L = path2_laplacian()
    rec = _Recorder()
    tr = simulate(L, DisturbanceSpec("impulse", 1.0), SimParams(dt=1e-3, t_end=0.1,
                                                                control_period=0.02), rec)
    assert np.allclose(rec.times, np.arange(0, 0.1 + 1e-9, 0.02))
    trace = tr.inertia_trace
    assert np.all(trace[:20] == trace[0]) and trace[20] != trace[19]


def test_trajectory_csv():
    L, spec = _spec()
    tr = simulate(L, DisturbanceSpec("impulse", 1.0), SimParams(t_end=0.05),
                  ConstantInertia(0.05), spec)
    text = tr.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "M", "H_cum", "eta_20", "eta_19", "eta_18", "eta_17", "eta_16"]
    assert len(rows) == tr.times.size + 1
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    assert buf.getvalue() == text
    full = list(csv.reader(io.StringIO(tr.to_csv(modes=2, full_state=True))))
    assert len(full[0]) == 3 + 2 + 40


# nonlinear

def test_nonlinear_matches_linear_near_sync():
    net = generate("ER", 20, seed=2, p=0.3)
    L = laplacian(net)
    spec = decompose(L)
    rng = np.random.default_rng(5)
    phases = rng.uniform(-1e-3, 1e-3, 20)
    phases -= phases.mean()
    p = SimParams(D=0.8, t_end=5.0)
    nl = simulate_nonlinear(net, np.zeros(20), p, ConstantInertia(0.1), phases, spectrum=spec)
    lin = simulate(L, DisturbanceSpec("impulse", 0.0), p, ConstantInertia(0.1), spec,
                   initial_state=(phases, np.zeros(20)))
    assert np.abs(nl.theta_dev - lin.theta_dev).max() < 1e-4


def test_nonlinear_zero_coupling_constant():
    net = gen_spider_web(5)
    phases = np.array([0.1, -0.3, 0.5, 1.0, 2.0])
    tr = simulate_nonlinear(net, np.full(5, 0.0), SimParams(K=1e-300, t_end=1.0),
                            ConstantInertia(0.5), phases)
    assert np.abs(tr.theta_dev - phases).max() < 1e-12


def test_nonlinear_two_node_locking():
    A = np.array([[0, 1], [1, 0]], dtype=np.int8)
    net = Network("path", 2, A, {}, None)
    K, dw = 5.0, 1.0
    tr = simulate_nonlinear(net, np.array([-dw / 2, dw / 2]), SimParams(K=K, t_end=30.0),
                            ConstantInertia(0.1), np.zeros(2))
    diff = tr.theta_dev[-1, 1] - tr.theta_dev[-1, 0]
    assert math.sin(diff) == pytest.approx(dw / (2 * K), abs=1e-8)
    assert abs(tr.theta_dev_dot[-1, 1] - tr.theta_dev_dot[-1, 0]) < 1e-8


def test_nonlinear_rejects_freq_shape():
    with pytest.raises(ValueError):
        simulate_nonlinear(gen_spider_web(4), np.zeros(3), SimParams(t_end=0.1),
                           ConstantInertia(1.0), np.zeros(4))
