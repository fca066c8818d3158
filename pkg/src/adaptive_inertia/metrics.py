"""Fragility, relaxation time, stability scans and baseline comparisons."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import modal
from .dynamics import Trajectory
from .spectral import Spectrum

STABILITY_THRESHOLD = -0.25
CONVERGENCE_TOL = 1e-3


class MetricsError(ValueError):
    pass


def fragility(traj: Trajectory, T: float) -> float:
    """H(T): integral of the squared elastic modal coordinates over [0, T]."""
    if T < 0:
        raise MetricsError(f"horizon must be non-negative, got {T}")
    if T > traj.t_end * (1 + 1e-12):
        raise MetricsError(f"horizon T={T} exceeds trajectory end {traj.t_end}")
    return float(np.interp(T, traj.times, traj.h_cumulative))


def fragility_closed_form(M: float, D: float, lambda_max: float, N: int, T: float,
                          variant: str = "derived", gamma: float = 1.0) -> float:
    """Single-mode H(T) approximations along the principal eigenvector.

    ``"paper"``: ``(2D / lam)(N / M^2)(1 - exp(-lam T / (2D)))`` as quoted.
    ``"derived"``: integral of the squared small-inertia response,
    ``gamma^2 M^2 / (2 D lam) * (1 - exp(-2 lam T / D))``.
    """
    if variant == "paper":
        return (2.0 * D / lambda_max) * (N / M**2) * -math.expm1(-lambda_max * T / (2.0 * D))
    if variant == "derived":
        return gamma**2 * M**2 / (2.0 * D * lambda_max) * -math.expm1(-2.0 * lambda_max * T / D)
    raise MetricsError(f"unknown variant {variant!r}")


def balanced_fragility(traj: Trajectory, tol: float = CONVERGENCE_TOL) -> float:
    """H at the end of the run, provided the last 10% of the run added < ``tol``."""
    h_end = float(traj.h_cumulative[-1])
    if h_end == 0.0:
        return 0.0
    h_90 = float(np.interp(0.9 * traj.t_end, traj.times, traj.h_cumulative))
    growth = (h_end - h_90) / h_end
    if growth >= tol:
        raise MetricsError(
            f"H(T) has not converged: last 10% of the run added {growth:.3%}; "
            f"increase t_end beyond {traj.t_end:g} s"
        )
    return h_end


def relaxation_time(traj: Trajectory, H_inf: float, fraction: float = 0.95) -> float:
    """First time H(t) reaches ``fraction * H_inf`` (linear interpolation)."""
    if H_inf < 0:
        raise MetricsError("H_inf must be non-negative")
    target = fraction * H_inf
    h = traj.h_cumulative
    if target <= h[0]:
        return float(traj.times[0])
    idx = int(np.searchsorted(h, target, side="left"))
    if idx >= h.size:
        raise MetricsError(f"H(t) never reaches {fraction:.0%} of H_inf within the horizon")
    t0, t1 = traj.times[idx - 1], traj.times[idx]
    h0, h1 = h[idx - 1], h[idx]
    if h1 == h0:
        return float(t1)
    return float(t0 + (target - h0) / (h1 - h0) * (t1 - t0))


@dataclass(frozen=True)
class StabilityScan:
    max_real_part: float
    worst_M: float
    worst_mode: int
    threshold: float
    passed: bool


def stability_scan(spectrum: Spectrum, D: float, M_values,
                   threshold: float = STABILITY_THRESHOLD) -> StabilityScan:
    """Frozen-coefficient scan of both characteristic roots over M and elastic modes."""
    Ms = np.unique(np.asarray(M_values, dtype=float))
    if Ms.size == 0:
        raise MetricsError("need at least one inertia value")
    worst = (-math.inf, float("nan"), -1)
    for M in Ms:
        for k in range(1, spectrum.n):
            lam = float(spectrum.eigenvalues[k])
            if lam <= 0:
                raise MetricsError(f"elastic mode {k} has non-positive eigenvalue {lam}")
            r = modal.characteristic_roots(modal.ModeParams(float(M), D, lam))
            re = max(r.rho1.real, r.rho2.real)
            if re > worst[0]:
                worst = (re, float(M), k)
    return StabilityScan(worst[0], worst[1], worst[2], threshold, worst[0] < threshold)


@dataclass
class PerformanceReport:
    H_T: float
    H_inf_estimate: float
    tau: float
    max_real_part: float
    stability_pass: bool
    M_range_observed: tuple[float, float]
    T: float
    meta: dict[str, Any] = field(default_factory=dict)
    reduction_rate_H: float | None = None
    reduction_rate_tau: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["M_range_observed"] = list(self.M_range_observed)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PerformanceReport":
        d = dict(d)
        d["M_range_observed"] = tuple(d["M_range_observed"])
        return cls(**d)


def evaluate(traj: Trajectory, D: float, T: float, threshold: float = STABILITY_THRESHOLD,
             meta: dict[str, Any] | None = None) -> PerformanceReport:
    H_inf = balanced_fragility(traj)
    M_lo, M_hi = float(traj.inertia_trace.min()), float(traj.inertia_trace.max())
    scan = stability_scan(traj.spectrum, D, [M_lo, M_hi], threshold)
    return PerformanceReport(
        H_T=fragility(traj, T),
        H_inf_estimate=H_inf,
        tau=relaxation_time(traj, H_inf),
        max_real_part=scan.max_real_part,
        stability_pass=scan.passed,
        M_range_observed=(M_lo, M_hi),
        T=T,
        meta=dict(meta or {}),
    )


def _rate(base: float, new: float) -> float:
    if base == 0.0:
        return 0.0 if new == 0.0 else -math.inf
    return (base - new) / base


@dataclass(frozen=True)
class Comparison:
    reduction_rate_H: float
    reduction_rate_tau: float


COMPARE_KEYS = ("network", "disturbance", "T", "seed")


def compare(constant: PerformanceReport, adaptive: PerformanceReport) -> Comparison:
    """Relative improvement of the adaptive arm; negative values are kept."""
    for key in COMPARE_KEYS:
        a = constant.T if key == "T" else constant.meta.get(key)
        b = adaptive.T if key == "T" else adaptive.meta.get(key)
        if a != b:
            raise MetricsError(f"runs differ in {key!r}: {a!r} vs {b!r}")
    return Comparison(_rate(constant.H_T, adaptive.H_T), _rate(constant.tau, adaptive.tau))
