"""Closed-form single-mode responses of ``M eta'' + D eta' + lam eta = 0``.

An impulse disturbance is realised as an initial condition on a system at
rest, ``eta(0) = 0``. Two kick conventions are supported:

``"velocity"`` (default)
    the impulse sets the frequency deviation directly, ``eta'(0) = gamma``.
    The response is ``gamma / (rho1 - rho2) * (exp(rho1 t) - exp(rho2 t))``,
    whose slow-pole amplitude and energy scale with ``M`` and ``M**2``.
``"momentum"``
    the impulse is integrated across ``t = 0`` through the inertia,
    ``eta'(0) = gamma / M``; every response is the velocity one divided by M.

These functions are the oracle the numerical integrator is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

CRITICAL_TOL = 1e-12
KICKS = ("velocity", "momentum")


class Regime(str, Enum):
    OVERDAMPED = "overdamped"
    CRITICAL = "critical"
    UNDERDAMPED = "underdamped"


@dataclass(frozen=True)
class ModeParams:
    M: float
    D: float
    lambda_k: float
    gamma_k: float = 1.0

    def __post_init__(self):
        if not (self.M > 0 and self.D > 0 and self.lambda_k > 0):
            raise ValueError(
                f"mode needs M, D, lambda_k > 0, got M={self.M}, D={self.D}, "
                f"lambda_k={self.lambda_k}"
            )

    @property
    def discriminant(self) -> float:
        return self.D**2 - 4.0 * self.M * self.lambda_k


@dataclass(frozen=True)
class CharRoots:
    rho1: complex
    rho2: complex
    discriminant: float
    regime: Regime


def characteristic_roots(p: ModeParams) -> CharRoots:
    """Roots of ``M s^2 + D s + lam``; ``rho1`` is the slow (or +imag) root."""
    disc = p.discriminant
    if abs(disc) < CRITICAL_TOL * p.D**2:
        r = -p.D / (2.0 * p.M)
        return CharRoots(complex(r), complex(r), disc, Regime.CRITICAL)
    if disc > 0:
        rho2 = (-p.D - math.sqrt(disc)) / (2.0 * p.M)
        # Vieta keeps the slow root accurate when 4 M lam << D^2
        rho1 = p.lambda_k / (p.M * rho2)
        return CharRoots(complex(rho1), complex(rho2), disc, Regime.OVERDAMPED)
    re = -p.D / (2.0 * p.M)
    im = math.sqrt(-disc) / (2.0 * p.M)
    return CharRoots(complex(re, im), complex(re, -im), disc, Regime.UNDERDAMPED)


def _initial_rate(p: ModeParams, kick: str) -> float:
    if kick == "velocity":
        return p.gamma_k
    if kick == "momentum":
        return p.gamma_k / p.M
    raise ValueError(f"kick must be one of {KICKS}, got {kick!r}")


def _unit_response(p: ModeParams, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Response and its rate for eta(0) = 0, eta'(0) = 1."""
    roots = characteristic_roots(p)
    if roots.regime is Regime.CRITICAL:
        c = p.D / (2.0 * p.M)
        e = np.exp(-c * t)
        return t * e, e * (1.0 - c * t)
    if roots.regime is Regime.OVERDAMPED:
        r1, r2 = roots.rho1.real, roots.rho2.real
        gap = r1 - r2
        e1 = np.exp(r1 * t)
        q = np.expm1(-gap * t) / gap
        return -e1 * q, e1 * (1.0 - r2 * q)
    a = -roots.rho1.real
    b = roots.rho1.imag
    e = np.exp(-a * t)
    s, c = np.sin(b * t), np.cos(b * t)
    return e * s / b, e * (c - (a / b) * s)


def _as_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    return t


def impulse_response_exact(p: ModeParams, t, kick: str = "velocity"):
    """eta_k(t) after an impulse of projected strength ``gamma_k`` at t = 0."""
    v0 = _initial_rate(p, kick)
    g, _ = _unit_response(p, _as_time(t))
    out = v0 * g
    return float(out) if out.ndim == 0 else out


def impulse_rate_exact(p: ModeParams, t, kick: str = "velocity"):
    """eta_k'(t) for the same impulse."""
    v0 = _initial_rate(p, kick)
    _, gd = _unit_response(p, _as_time(t))
    out = v0 * gd
    return float(out) if out.ndim == 0 else out


def impulse_response_small_inertia(p: ModeParams, t, kick: str = "velocity"):
    """Slow-pole residual, the fast ``exp(-D t / M)`` term dropped.

    ``eta(t) ~ eta'(0) * M / sqrt(D^2 - 4 M lam) * exp(-lam t / D)``.
    """
    ratio = 4.0 * p.M * p.lambda_k / p.D**2
    if ratio >= 1.0 or characteristic_roots(p).regime is not Regime.OVERDAMPED:
        raise ValueError(f"small-inertia form needs 4 M lam / D^2 < 1, got {ratio:.4g}")
    v0 = _initial_rate(p, kick)
    t = _as_time(t)
    out = v0 * p.M / math.sqrt(p.discriminant) * np.exp(-p.lambda_k * t / p.D)
    return float(out) if out.ndim == 0 else out


def mode_energy_integral(p: ModeParams, T: float, kick: str = "velocity") -> float:
    """Closed-form ``int_0^T eta_k(t)^2 dt``; ``T = inf`` gives the limit.

    Uses the observability Gramian P of the mode (``A^T P + P A = -e1 e1^T``):
    the integral is ``x0^T P x0 - x(T)^T P x(T)`` with ``x = (eta, eta')``,
    which stays exact through the critical regime.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    v0 = _initial_rate(p, kick)
    w = p.lambda_k / p.M
    c = p.D / p.M
    p11 = 1.0 / (2.0 * c) + c / (2.0 * w)
    p12 = 1.0 / (2.0 * w)
    p22 = 1.0 / (2.0 * w * c)
    total = v0 * v0 * p22
    if math.isinf(T):
        return total
    g, gd = _unit_response(p, np.asarray(T, dtype=float))
    eta, eta_dot = v0 * float(g), v0 * float(gd)
    tail = p11 * eta * eta + 2.0 * p12 * eta * eta_dot + p22 * eta_dot * eta_dot
    return max(total - tail, 0.0)


def peak_time(p: ModeParams) -> float:
    """Time of the first (and largest) extremum of the impulse response."""
    roots = characteristic_roots(p)
    if roots.regime is Regime.CRITICAL:
        return 2.0 * p.M / p.D
    if roots.regime is Regime.OVERDAMPED:
        r1, r2 = roots.rho1.real, roots.rho2.real
        return math.log(r2 / r1) / (r1 - r2)
    a = -roots.rho1.real
    b = roots.rho1.imag
    return math.atan2(b, a) / b


def peak_abs_response(p: ModeParams, kick: str = "velocity") -> float:
    return abs(impulse_response_exact(p, peak_time(p), kick))


def peak_abs_rate(p: ModeParams, kick: str = "velocity") -> float:
    # modal energy M eta'^2/2 + lam eta^2/2 never grows, so the peak rate is at t = 0
    return abs(_initial_rate(p, kick))
