"""Adaptive inertia: baseline plus weighted, filtered, rate-limited modal feedback.

    M(t) = M0 + k * sum_k w_k * |eta_k(t)|_filtered

with ``M0 = D^2 / (4 lambda_max)`` (critical damping of the dominant mode)
and default weights ``w_k = lambda_k / lambda_max``. Each update

1. low-pass filters the measured ``|eta_k|`` (first-order, cutoff ``f_c``),
2. forms the raw law above,
3. limits the change against the previous output to ``rate_limit * dt``,
4. clamps to ``[M_min, M_max]``.

Mode indices are 0-based positions in the ascending spectrum; index 0 is the
rigid-body mode and never enters the feedback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import modal
from .spectral import Spectrum


TIE_TOL = 1e-9


class ControllerError(ValueError):
    pass


def baseline_inertia(D: float, lambda_max: float) -> float:
    if not (D > 0 and lambda_max > 0):
        raise ControllerError(f"need D > 0 and lambda_max > 0, got D={D}, lambda_max={lambda_max}")
    return D * D / (4.0 * lambda_max)


def dominant_mode_set(spectrum: Spectrum, count: int) -> tuple[int, ...]:
    """The ``count`` largest elastic modes, largest first; ties keep index order."""
    n = spectrum.n
    if not 1 <= count <= n - 1:
        raise ControllerError(f"mode count must lie in [1, {n - 1}], got {count}")
    lam = spectrum.eigenvalues
    tol = TIE_TOL * max(abs(spectrum.lambda_max), 1.0)
    # eigenvalues equal up to rounding form one cluster; clusters rank high to low
    cluster, c = [0] * n, 0
    for k in range(2, n):
        if lam[k] - lam[k - 1] > tol:
            c += 1
        cluster[k] = c
    ranked = sorted(range(1, n), key=lambda k: (-cluster[k], k))
    return tuple(ranked[:count])


def eigenvalue_weights(spectrum: Spectrum, modes) -> tuple[float, ...]:
    lam_max = spectrum.lambda_max
    return tuple(float(spectrum.eigenvalues[k] / lam_max) for k in modes)


@dataclass(frozen=True)
class ControllerConfig:
    M0: float
    gain: float
    mode_set: tuple[int, ...]
    weights: tuple[float, ...]
    M_min: float
    M_max: float
    rate_limit: float
    filter_cutoff_hz: float | None = 5.0

    def __post_init__(self):
        if not 0 < self.M_min <= self.M0 <= self.M_max:
            raise ControllerError(
                f"need 0 < M_min <= M0 <= M_max, got {self.M_min}, {self.M0}, {self.M_max}"
            )
        if not self.gain >= 0:
            raise ControllerError(f"gain must be non-negative, got {self.gain}")
        if len(self.weights) != len(self.mode_set):
            raise ControllerError(
                f"{len(self.weights)} weights for {len(self.mode_set)} modes"
            )
        if any(not 0 < w <= 1 for w in self.weights):
            raise ControllerError(f"weights must lie in (0, 1], got {self.weights}")
        if not self.rate_limit > 0:
            raise ControllerError(f"rate limit must be positive, got {self.rate_limit}")
        if self.filter_cutoff_hz is not None and not self.filter_cutoff_hz > 0:
            raise ControllerError(f"filter cutoff must be positive, got {self.filter_cutoff_hz}")

    @classmethod
    def build(cls, spectrum: Spectrum, D: float, gain: float, mode_count: int = 1,
              weights=None, margin: float = 0.85, M_max_frac: float = 2.0,
              rate_limit_frac: float = 0.5, filter_cutoff_hz: float | None = 5.0,
              M0: float | None = None) -> "ControllerConfig":
        """Configuration for a spectrum; ``M0`` defaults to the critical-damping value."""
        M0 = baseline_inertia(D, spectrum.lambda_max) if M0 is None else float(M0)
        modes = dominant_mode_set(spectrum, mode_count)
        w = eigenvalue_weights(spectrum, modes) if weights is None else tuple(map(float, weights))
        return cls(M0=M0, gain=float(gain), mode_set=modes, weights=w,
                   M_min=margin * M0, M_max=M_max_frac * M0,
                   rate_limit=rate_limit_frac * M0, filter_cutoff_hz=filter_cutoff_hz)

    def to_dict(self) -> dict:
        return {"M0": self.M0, "gain": self.gain, "mode_set": list(self.mode_set),
                "weights": list(self.weights), "M_min": self.M_min, "M_max": self.M_max,
                "rate_limit": self.rate_limit, "filter_cutoff_hz": self.filter_cutoff_hz}


@dataclass
class ControllerState:
    filtered_eta_abs: np.ndarray
    last_M: float
    last_sample_time: float | None = None

    @classmethod
    def initial(cls, cfg: ControllerConfig) -> "ControllerState":
        return cls(np.zeros(len(cfg.mode_set)), cfg.M0, None)


def filter_coefficient(dt: float, cutoff_hz: float | None) -> float:
    """Smoothing factor of ``y += a (x - y)`` matched to ``1 / (1 + s / (2 pi f_c))``."""
    if cutoff_hz is None or math.isinf(cutoff_hz):
        return 1.0
    return dt / (dt + 1.0 / (2.0 * math.pi * cutoff_hz))


def adaptive_inertia(cfg: ControllerConfig, state: ControllerState, eta_abs_measured,
                     now: float) -> float:
    """One controller update; mutates ``state`` and returns the new M."""
    x = np.abs(np.asarray(eta_abs_measured, dtype=float))
    if x.shape != state.filtered_eta_abs.shape:
        raise ControllerError(
            f"expected {state.filtered_eta_abs.size} modal measurements, got {x.size}"
        )
    last = state.last_sample_time
    if last is not None and now < last:
        raise ControllerError(f"non-monotone controller time: {now} after {last}")
    dt = 0.0 if last is None else now - last

    a = filter_coefficient(dt, cfg.filter_cutoff_hz)
    state.filtered_eta_abs = state.filtered_eta_abs + a * (x - state.filtered_eta_abs)

    raw = cfg.M0 + cfg.gain * float(np.dot(cfg.weights, state.filtered_eta_abs))
    step = cfg.rate_limit * dt
    M = min(max(raw, state.last_M - step), state.last_M + step)
    M = min(max(M, cfg.M_min), cfg.M_max)

    state.last_M = M
    state.last_sample_time = now
    return M


@dataclass
class AdaptiveInertia:
    """Inertia policy for :func:`dynamics.simulate` driven by modal feedback."""

    config: ControllerConfig
    state: ControllerState = field(init=False, repr=False)
    _basis: np.ndarray = field(init=False, repr=False)

    def reset(self, spectrum: Spectrum) -> float:
        self.state = ControllerState.initial(self.config)
        self._basis = np.array(spectrum.eigenvectors[:, list(self.config.mode_set)])
        return self.config.M0

    def sample(self, t, theta, theta_dot) -> float:
        return adaptive_inertia(self.config, self.state, np.abs(theta @ self._basis), t)


def _weighted(weights, values) -> float:
    return float(np.dot(np.asarray(weights, dtype=float), np.abs(np.asarray(values, dtype=float))))


def gain_bound_stability(cfg: ControllerConfig, eta_abs_max) -> float:
    """Largest gain keeping the unclamped law under ``M_max``.

    The feedback term is non-negative, so the binding side of the admissible
    band is the ceiling: ``k <= (M_max - M0) / sum w_k |eta_k|_max``.
    """
    denom = _weighted(cfg.weights, eta_abs_max)
    if denom <= 0:
        return math.inf
    return (cfg.M_max - cfg.M0) / denom


def gain_bound_rate(eta_dot_abs_max, M0: float, weights, rate_limit_frac: float = 0.5) -> float:
    """``k <= rate_limit_frac * M0 / sum w_k |eta_k'|_max`` (per second)."""
    denom = _weighted(weights, eta_dot_abs_max)
    if denom <= 0:
        return math.inf
    return rate_limit_frac * M0 / denom


def tune_gain(stability_bound: float, rate_bound: float, safety_factor: float = 0.75) -> float:
    if not 0 < safety_factor <= 1:
        raise ControllerError(f"safety factor must lie in (0, 1], got {safety_factor}")
    if not (stability_bound > 0 and rate_bound > 0):
        raise ControllerError("gain bounds must be positive")
    bound = min(stability_bound, rate_bound)
    if math.isinf(bound):
        raise ControllerError("both gain bounds are unbounded; set the gain explicitly")
    return safety_factor * bound


@dataclass(frozen=True)
class GainDesign:
    M0: float
    eta_abs_max: tuple[float, ...]
    eta_dot_abs_max: tuple[float, ...]
    stability_bound: float
    rate_bound: float
    gain: float


def design_gain(cfg: ControllerConfig, spectrum: Spectrum, D: float, gamma,
                safety_factor: float = 0.75, rate_limit_frac: float | None = None,
                kick: str = "velocity") -> GainDesign:
    """Gain bounds from the analytic impulse response of each feedback mode at M0.

    ``gamma`` holds the disturbance projections for all n modes.
    """
    gamma = np.asarray(gamma, dtype=float)
    peaks, rates = [], []
    for k in cfg.mode_set:
        lam = float(spectrum.eigenvalues[k])
        p = modal.ModeParams(cfg.M0, D, lam, float(gamma[k]))
        peaks.append(modal.peak_abs_response(p, kick))
        rates.append(modal.peak_abs_rate(p, kick))
    frac = cfg.rate_limit / cfg.M0 if rate_limit_frac is None else rate_limit_frac
    stab = gain_bound_stability(cfg, peaks)
    rate = gain_bound_rate(rates, cfg.M0, cfg.weights, frac)
    return GainDesign(cfg.M0, tuple(peaks), tuple(rates), stab, rate,
                      tune_gain(stab, rate, safety_factor))


@dataclass(frozen=True)
class ControllerPreset:
    """File-level controller description, resolved against a spectrum."""

    gain: float
    mode_count: int = 1
    weights: tuple[float, ...] | None = None
    M0_mode: str = "formula"
    M0_value: float | None = None
    filter_cutoff_hz: float | None = 5.0
    rate_limit_frac: float = 0.5
    margin: float = 0.85
    M_max_frac: float = 2.0

    def __post_init__(self):
        if self.M0_mode not in ("formula", "explicit"):
            raise ControllerError(f"M0_mode must be 'formula' or 'explicit', got {self.M0_mode!r}")
        if self.M0_mode == "explicit" and self.M0_value is None:
            raise ControllerError("M0_mode 'explicit' needs M0_value")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            if len(self.weights) != self.mode_count:
                raise ControllerError(
                    f"{len(self.weights)} weights given for mode_count={self.mode_count}"
                )

    def resolve(self, spectrum: Spectrum, D: float) -> ControllerConfig:
        M0 = self.M0_value if self.M0_mode == "explicit" else None
        return ControllerConfig.build(
            spectrum, D, self.gain, self.mode_count, self.weights, self.margin,
            self.M_max_frac, self.rate_limit_frac, self.filter_cutoff_hz, M0,
        )

    def to_dict(self) -> dict:
        out = {"M0_mode": self.M0_mode, "gain": self.gain, "mode_count": self.mode_count,
               "filter_cutoff_hz": self.filter_cutoff_hz,
               "rate_limit_frac": self.rate_limit_frac, "margin": self.margin,
               "M_max_frac": self.M_max_frac}
        if self.M0_value is not None:
            out["M0_value"] = self.M0_value
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out
