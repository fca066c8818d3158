"""Time-domain integration of the linearised and nonlinear swing dynamics.

The linearised network obeys

    M(t) dtheta'' + D dtheta' + L dtheta = domega(t)

integrated with classical fixed-step RK4. ``M(t)`` comes from an inertia
policy sampled every ``control_period`` and held in between, so it enters as
a coefficient (division in the velocity equation) and is constant within
each RK4 step.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .netgen import LaplacianMatrix, Network
from .spectral import Spectrum, decompose

DIVERGENCE_LIMIT = 1e6


class SimulationError(RuntimeError):
    pass


class DivergenceError(SimulationError):
    def __init__(self, step: int, t: float):
        super().__init__(f"state diverged at step {step} (t={t:.6g} s)")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class SimParams:
    D: float = 0.8
    K: float = 1.0
    dt: float = 1e-3
    t_end: float = 10.0
    control_period: float = 0.01

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.D > 0:
            raise ValueError(f"damping D must be positive, got {self.D}")
        ratio = self.control_period / self.dt
        if self.control_period < self.dt or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError(
                f"control_period ({self.control_period}) must be an integer multiple "
                f"of dt ({self.dt})"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def hold_steps(self) -> int:
        return int(round(self.control_period / self.dt))


class DisturbanceKind(str, Enum):
    IMPULSE = "impulse"
    MONOTONIC_DECAY = "monotonic_decay"
    OSCILLATORY_DECAY = "oscillatory_decay"


class Direction(str, Enum):
    PRINCIPAL = "principal"
    UNIFORM = "uniform"
    NODE = "node"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class DisturbanceSpec:
    """Frequency disturbance ``amplitude * envelope(t) * direction``.

    Directions other than ``explicit`` are unit vectors: the principal
    Laplacian eigenvector, ``1/sqrt(n)``, or the basis vector of ``node``.
    ``kick`` selects how an impulse enters (see :mod:`.modal`).
    """

    kind: DisturbanceKind = DisturbanceKind.IMPULSE
    amplitude: float = 1.0
    direction: Direction = Direction.PRINCIPAL
    node: int | None = None
    vector: tuple[float, ...] | None = None
    kick: str = "velocity"

    def __post_init__(self):
        object.__setattr__(self, "kind", DisturbanceKind(self.kind))
        object.__setattr__(self, "direction", Direction(self.direction))
        if not math.isfinite(self.amplitude):
            raise ValueError("disturbance amplitude must be finite")
        if self.kick not in ("velocity", "momentum"):
            raise ValueError(f"kick must be 'velocity' or 'momentum', got {self.kick!r}")
        if self.direction is Direction.NODE and self.node is None:
            raise ValueError("direction 'node' needs a node index")
        if self.direction is Direction.EXPLICIT:
            if self.vector is None:
                raise ValueError("direction 'explicit' needs a vector")
            object.__setattr__(self, "vector", tuple(float(x) for x in self.vector))

    def direction_vector(self, spectrum: Spectrum) -> np.ndarray:
        n = spectrum.n
        if self.direction is Direction.PRINCIPAL:
            return np.array(spectrum.principal_vector)
        if self.direction is Direction.UNIFORM:
            return np.full(n, 1.0 / math.sqrt(n))
        if self.direction is Direction.NODE:
            if not 0 <= self.node < n:
                raise ValueError(f"node {self.node} out of range for n={n}")
            e = np.zeros(n)
            e[self.node] = 1.0
            return e
        vec = np.array(self.vector, dtype=float)
        if vec.shape != (n,):
            raise ValueError(f"explicit direction has length {vec.size}, expected {n}")
        return vec

    def envelope(self, t: float) -> float:
        if self.kind is DisturbanceKind.MONOTONIC_DECAY:
            return self.amplitude * math.exp(-t)
        if self.kind is DisturbanceKind.OSCILLATORY_DECAY:
            return self.amplitude * math.exp(-t) * math.sin(2.0 * math.pi * t)
        return 0.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "amplitude": self.amplitude,
               "direction": self.direction.value, "kick": self.kick}
        if self.node is not None:
            out["node"] = self.node
        if self.vector is not None:
            out["vector"] = list(self.vector)
        return out


def disturbance_signal(spec: DisturbanceSpec, t: float, spectrum: Spectrum) -> np.ndarray:
    """Forcing vector at time t; an impulse contributes only through the initial state."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return spec.envelope(t) * spec.direction_vector(spectrum)


class InertiaPolicy(Protocol):
    def reset(self, spectrum: Spectrum) -> float:
        """Fresh run; returns the inertia in force before the disturbance."""

    def sample(self, t: float, theta: np.ndarray, theta_dot: np.ndarray) -> float:
        """Inertia to hold from ``t`` until the next control instant."""


@dataclass
class ConstantInertia:
    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"inertia must be positive, got {self.M}")

    def reset(self, spectrum: Spectrum) -> float:
        return self.M

    def sample(self, t, theta, theta_dot) -> float:
        return self.M


@dataclass
class Trajectory:
    times: np.ndarray
    theta_dev: np.ndarray
    theta_dev_dot: np.ndarray
    eta: np.ndarray
    eta_dot: np.ndarray
    inertia_trace: np.ndarray
    h_cumulative: np.ndarray
    spectrum: Spectrum = field(repr=False)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def inertia_rate(self) -> np.ndarray:
        return np.gradient(self.inertia_trace, self.times)

    def inertia_at(self, t) -> np.ndarray | float:
        return np.interp(t, self.times, self.inertia_trace)

    def top_modes(self, m: int = 5) -> list[int]:
        """Indices of the m largest eigenvalues, largest first."""
        n = self.spectrum.n
        return list(range(n - 1, max(n - 1 - m, 0), -1))

    def to_csv(self, modes: int = 5, full_state: bool = False) -> str:
        idx = self.top_modes(modes)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["t", "M", "H_cum"] + [f"eta_{k + 1}" for k in idx]
        n = self.spectrum.n
        if full_state:
            header += [f"theta_{i}" for i in range(n)] + [f"theta_dot_{i}" for i in range(n)]
        w.writerow(header)
        for s in range(self.times.size):
            row = [self.times[s], self.inertia_trace[s], self.h_cumulative[s]]
            row += [self.eta[s, k] for k in idx]
            if full_state:
                row += list(self.theta_dev[s]) + list(self.theta_dev_dot[s])
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _elastic_energy_rate(eta: np.ndarray) -> np.ndarray:
    return np.sum(eta[:, 1:] ** 2, axis=1)


RHS = Callable[[float, np.ndarray, np.ndarray, float], tuple[np.ndarray, np.ndarray]]


def _integrate(rhs: RHS, theta: np.ndarray, v: np.ndarray, params: SimParams,
               policy: InertiaPolicy, observe: Callable, M_initial: float):
    """RK4 with sample-and-hold inertia; returns times, states and M trace."""
    h = params.dt
    steps = params.n_steps
    hold = params.hold_steps
    times = np.arange(steps + 1) * h
    thetas = np.empty((steps + 1, theta.size))
    vs = np.empty((steps + 1, v.size))
    Ms = np.empty(steps + 1)
    thetas[0], vs[0] = theta, v
    M = M_initial
    for i in range(steps):
        t = times[i]
        if i % hold == 0:
            M = policy.sample(t, *observe(theta, v))
        Ms[i] = M
        k1t, k1v = rhs(t, theta, v, M)
        k2t, k2v = rhs(t + 0.5 * h, theta + 0.5 * h * k1t, v + 0.5 * h * k1v, M)
        k3t, k3v = rhs(t + 0.5 * h, theta + 0.5 * h * k2t, v + 0.5 * h * k2v, M)
        k4t, k4v = rhs(t + h, theta + h * k3t, v + h * k3v, M)
        theta = theta + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        peak = np.abs(theta).max()
        if not peak <= DIVERGENCE_LIMIT or not np.all(np.isfinite(v)):
            raise DivergenceError(i + 1, float(times[i + 1]))
        thetas[i + 1], vs[i + 1] = theta, v
    if steps % hold == 0:
        M = policy.sample(times[-1], *observe(theta, v))
    Ms[-1] = M
    return times, thetas, vs, Ms


def _trajectory(times, thetas, vs, Ms, spectrum: Spectrum) -> Trajectory:
    eta = thetas @ spectrum.eigenvectors
    eta_dot = vs @ spectrum.eigenvectors
    h_cum = cumulative_trapezoid(_elastic_energy_rate(eta), times, initial=0.0)
    # trapezoid partial sums of a non-negative integrand; guard rounding
    h_cum = np.maximum.accumulate(h_cum)
    return Trajectory(times, thetas, vs, eta, eta_dot, Ms, h_cum, spectrum)


def simulate(L: LaplacianMatrix, disturbance: DisturbanceSpec, params: SimParams,
             inertia_policy: InertiaPolicy, spectrum: Spectrum | None = None,
             initial_state: tuple[np.ndarray, np.ndarray] | None = None) -> Trajectory:
    """Integrate the linearised network from rest (or ``initial_state``)."""
    spectrum = spectrum if spectrum is not None else decompose(L)
    Lv = np.array(L.values if isinstance(L, LaplacianMatrix) else L, dtype=float)
    n = Lv.shape[0]
    direction = disturbance.direction_vector(spectrum)
    D = params.D

    M0 = inertia_policy.reset(spectrum)
    if initial_state is None:
        theta, v = np.zeros(n), np.zeros(n)
    else:
        theta = np.array(initial_state[0], dtype=float)
        v = np.array(initial_state[1], dtype=float)
    if disturbance.kind is DisturbanceKind.IMPULSE:
        kick = disturbance.amplitude * direction
        v = v + (kick if disturbance.kick == "velocity" else kick / M0)

    envelope = disturbance.envelope
    forced = disturbance.kind is not DisturbanceKind.IMPULSE and disturbance.amplitude != 0

    def rhs(t, th, vel, M):
        acc = -D * vel - Lv @ th
        if forced:
            acc = acc + envelope(t) * direction
        return vel, acc / M

    times, thetas, vs, Ms = _integrate(rhs, theta, v, params, inertia_policy,
                                       lambda th, vel: (th, vel), M0)
    return _trajectory(times, thetas, vs, Ms, spectrum)


def simulate_nonlinear(net: Network, natural_freqs, params: SimParams,
                       inertia_policy: InertiaPolicy, initial_phases,
                       initial_velocities=None, spectrum: Spectrum | None = None) -> Trajectory:
    """Full sine-coupled model ``M th'' + D th' = w + K sum a_ij sin(th_j - th_i)``.

    Deviations are taken against a synchronous reference obeying
    ``M th0'' + D th0' = mean(w)`` from rest, integrated in the same loop.
    """
    A = net.adjacency.astype(float)
    n = net.n
    omega = np.asarray(natural_freqs, dtype=float)
    if omega.shape != (n,):
        raise ValueError(f"natural_freqs has shape {omega.shape}, expected ({n},)")
    if spectrum is None:
        from .netgen import laplacian
        spectrum = decompose(laplacian(net, params.K) if params.K > 0
                             else LaplacianMatrix(np.zeros((n, n)), 0.0))
    K, D = params.K, params.D
    w_ext = np.append(omega, omega.mean())

    def rhs(t, th, vel, M):
        ph = th[:n]
        s, c = np.sin(ph), np.cos(ph)
        coupling = np.zeros(n + 1)
        coupling[:n] = K * (c * (A @ s) - s * (A @ c))
        return vel, (w_ext - D * vel + coupling) / M

    theta = np.append(np.asarray(initial_phases, dtype=float), 0.0)
    v = np.zeros(n + 1)
    if initial_velocities is not None:
        v[:n] = np.asarray(initial_velocities, dtype=float)

    M0 = inertia_policy.reset(spectrum)
    times, thetas, vs, Ms = _integrate(rhs, theta, v, params, inertia_policy,
                                       lambda th, vel: (th[:n] - th[n], vel[:n] - vel[n]), M0)
    dev = thetas[:, :n] - thetas[:, n:]
    dev_dot = vs[:, :n] - vs[:, n:]
    return _trajectory(times, dev, dev_dot, Ms, spectrum)
