"""Laplacian eigendecomposition and modal projection."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .netgen import LaplacianMatrix


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors as columns.

    Index 0 is the rigid-body mode (eigenvalue 0, constant eigenvector) for a
    connected graph; indices 1..n-1 are the elastic modes.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def principal_vector(self) -> np.ndarray:
        return self.eigenvectors[:, -1]


@dataclass(frozen=True)
class ModalCoordinates:
    eta: np.ndarray
    eta_dot: np.ndarray | None = None


def _fix_signs(V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first component with |v| > tol made positive, column by column
    lead = np.argmax(np.abs(V) > tol, axis=0)
    signs = np.sign(V[lead, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def decompose(L: LaplacianMatrix | np.ndarray, symmetry_tol: float = 1e-12) -> Spectrum:
    values = L.values if isinstance(L, LaplacianMatrix) else np.asarray(L, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise SpectralError(f"expected a square matrix, got shape {values.shape}")
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    if np.abs(values - values.T).max(initial=0.0) > symmetry_tol * scale:
        raise SpectralError("Laplacian is not symmetric")
    try:
        w, V = np.linalg.eigh(values)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolve failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise SpectralError("eigensolve produced non-finite values")
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order].copy(), _fix_signs(V[:, order]))


def _check_len(spec: Spectrum, x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != spec.n:
        raise SpectralError(f"{name} has length {x.shape[0]}, expected {spec.n}")
    return x


def project(spec: Spectrum, delta_theta, delta_theta_dot=None) -> ModalCoordinates:
    """eta = V^T delta_theta. Accepts (n,) vectors or (T, n) stacks."""
    x = _check_len(spec, np.asarray(delta_theta, dtype=float).T, "delta_theta").T
    eta = x @ spec.eigenvectors
    eta_dot = None
    if delta_theta_dot is not None:
        xd = _check_len(spec, np.asarray(delta_theta_dot, dtype=float).T, "delta_theta_dot").T
        eta_dot = xd @ spec.eigenvectors
    return ModalCoordinates(eta, eta_dot)


def reconstruct(spec: Spectrum, eta) -> np.ndarray:
    """delta_theta = V eta."""
    if isinstance(eta, ModalCoordinates):
        eta = eta.eta
    e = _check_len(spec, np.asarray(eta, dtype=float).T, "eta").T
    return e @ spec.eigenvectors.T


def disturbance_projection(spec: Spectrum, delta_omega0) -> np.ndarray:
    """Per-mode excitation gamma_k = v_k . delta_omega0 (all n modes)."""
    x = _check_len(spec, delta_omega0, "delta_omega0")
    return spec.eigenvectors.T @ x


def spectrum_csv(spec: Spectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "lambda_k"])
    for k, lam in enumerate(spec.eigenvalues, start=1):
        w.writerow([k, repr(float(lam))])
    return buf.getvalue()


def eigenvectors_csv(spec: Spectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node"] + [f"v_{k}" for k in range(1, spec.n + 1)])
    for i, row in enumerate(spec.eigenvectors):
        w.writerow([i] + [repr(float(x)) for x in row])
    return buf.getvalue()
