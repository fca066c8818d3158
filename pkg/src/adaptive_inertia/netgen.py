"""Benchmark network topologies and their Laplacian matrices.

Five generators are provided: ring lattice (RG), Erdos-Renyi (ER),
Watts-Strogatz small world (SW), preferential-attachment scale free (SF)
and the star / spider web (SP). Every generator is a pure function of its
parameters and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.sparse.csgraph import connected_components

MAX_ATTEMPTS = 100

KINDS = ("RG", "ER", "SW", "SF", "SP")


class NetworkError(ValueError):
    """Raised for invalid generator parameters or exhausted retries."""


@dataclass(frozen=True)
class Network:
    kind: str
    n: int
    adjacency: np.ndarray = field(repr=False)
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        self.adjacency.setflags(write=False)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(a), int(b)) for a, b in zip(i, j)]

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def is_connected(self) -> bool:
        return _is_connected(self.adjacency)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.n,
            "params": dict(self.params),
            "seed": self.seed,
            "edges": [list(e) for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Network":
        n = int(data["n"])
        return cls(
            kind=data["kind"],
            n=n,
            adjacency=_from_edges(n, data["edges"]),
            params=dict(data.get("params", {})),
            seed=data.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LaplacianMatrix:
    """``values = coupling * (Deg - A)``."""

    values: np.ndarray = field(repr=False)
    coupling: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _from_edges(n, edges) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int8)
    for i, j in edges:
        if i == j:
            raise NetworkError(f"self-loop at node {i}")
        A[i, j] = A[j, i] = 1
    return A


def _is_connected(A: np.ndarray) -> bool:
    if A.shape[0] <= 1:
        return True
    ncomp, _ = connected_components(A, directed=False)
    return ncomp == 1


def _sub_rng(seed, attempt: int) -> np.random.Generator:
    # independent stream per retry, derived only from (seed, attempt)
    return np.random.default_rng([int(seed or 0), attempt])


def _ring_adjacency(n: int, d: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int8)
    idx = np.arange(n)
    for s in range(1, d // 2 + 1):
        A[idx, (idx + s) % n] = 1
        A[(idx + s) % n, idx] = 1
    return A


def _check_ring(n: int, d: int) -> None:
    if n < 3:
        raise NetworkError(f"ring needs n >= 3, got {n}")
    if d % 2 or d <= 0:
        raise NetworkError(f"ring degree d must be a positive even integer, got {d}")
    if d >= n:
        raise NetworkError(f"ring degree d must be < n, got d={d}, n={n}")


def gen_ring_regular(n: int, d: int = 4, seed: int | None = None) -> Network:
    """Circulant ring lattice: node i links to its d/2 nearest neighbours per side."""
    _check_ring(n, d)
    return Network("RG", n, _ring_adjacency(n, d), {"d": d}, seed)


def gen_erdos_renyi(n: int, p: float = 0.1, seed: int | None = None) -> Network:
    """G(n, p), redrawn with a derived sub-seed until connected."""
    if not 0.0 < p < 1.0:
        raise NetworkError(f"edge probability must lie in (0, 1), got {p}")
    if n < 1:
        raise NetworkError(f"n must be positive, got {n}")
    iu = np.triu_indices(n, k=1)
    for attempt in range(MAX_ATTEMPTS):
        rng = _sub_rng(seed, attempt)
        mask = rng.random(len(iu[0])) < p
        A = np.zeros((n, n), dtype=np.int8)
        A[iu[0][mask], iu[1][mask]] = 1
        A = A + A.T
        if _is_connected(A):
            return Network("ER", n, A, {"p": p, "attempt": attempt}, seed)
    raise NetworkError(
        f"no connected ER draw in {MAX_ATTEMPTS} attempts (n={n}, p={p}); p too small for n"
    )


def gen_watts_strogatz(
    n: int, d: int = 4, p_rewire: float = 0.05, seed: int | None = None
) -> Network:
    """Ring lattice with each lattice edge rewired with probability ``p_rewire``.

    Edge (i, i+s) keeps endpoint i and moves its far end to a uniformly drawn
    node that is neither i nor already adjacent to i. Disconnected draws are
    retried like :func:`gen_erdos_renyi`.
    """
    _check_ring(n, d)
    if not 0.0 <= p_rewire <= 1.0:
        raise NetworkError(f"p_rewire must lie in [0, 1], got {p_rewire}")
    for attempt in range(MAX_ATTEMPTS):
        rng = _sub_rng(seed, attempt)
        A = _ring_adjacency(n, d)
        rewired = 0
        for s in range(1, d // 2 + 1):
            for i in range(n):
                j = (i + s) % n
                if not A[i, j] or rng.random() >= p_rewire:
                    continue
                candidates = np.flatnonzero(A[i] == 0)
                candidates = candidates[candidates != i]
                if candidates.size == 0:
                    continue
                k = int(candidates[rng.integers(candidates.size)])
                A[i, j] = A[j, i] = 0
                A[i, k] = A[k, i] = 1
                rewired += 1
        if _is_connected(A):
            params = {"d": d, "p_rewire": p_rewire, "attempt": attempt, "rewired": rewired}
            return Network("SW", n, A, params, seed)
    raise NetworkError(f"no connected WS draw in {MAX_ATTEMPTS} attempts (n={n})")


def gen_scale_free(n: int, m: int = 2, seed: int | None = None) -> Network:
    """Preferential attachment grown from a clique of ``m + 1`` nodes.

    Each new node attaches ``m`` edges to distinct existing nodes chosen with
    probability proportional to degree. The tail exponent is emergent.
    """
    if m < 1:
        raise NetworkError(f"attachment count m must be >= 1, got {m}")
    if m >= n:
        raise NetworkError(f"attachment count m must be < n, got m={m}, n={n}")
    rng = _sub_rng(seed, 0)
    A = np.zeros((n, n), dtype=np.int8)
    core = m + 1
    A[:core, :core] = 1
    np.fill_diagonal(A, 0)
    # one entry per edge endpoint: uniform draw here == degree-proportional draw
    stubs = [i for i in range(core) for _ in range(m)]
    for new in range(core, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(stubs[rng.integers(len(stubs))])
        for t in sorted(targets):
            A[new, t] = A[t, new] = 1
            stubs.extend((new, t))
    return Network("SF", n, A, {"m": m}, seed)


def gen_spider_web(n: int = 100, seed: int | None = None) -> Network:
    """Star graph with hub 0."""
    if n < 2:
        raise NetworkError(f"star needs n >= 2, got {n}")
    A = np.zeros((n, n), dtype=np.int8)
    A[0, 1:] = A[1:, 0] = 1
    return Network("SP", n, A, {}, seed)


def generate(kind: str, n: int, seed: int | None = None, **params) -> Network:
    """Dispatch on the topology tag (RG, ER, SW, SF, SP)."""
    kind = kind.upper()
    if kind == "RG":
        return gen_ring_regular(n, params.get("d", 4), seed)
    if kind == "ER":
        return gen_erdos_renyi(n, params.get("p", 0.1), seed)
    if kind == "SW":
        return gen_watts_strogatz(n, params.get("d", 4), params.get("p_rewire", 0.05), seed)
    if kind == "SF":
        return gen_scale_free(n, params.get("m", 2), seed)
    if kind == "SP":
        return gen_spider_web(n, seed)
    raise NetworkError(f"unknown network kind {kind!r}; expected one of {KINDS}")


def laplacian(net: Network, K: float = 1.0) -> LaplacianMatrix:
    if not K > 0:
        raise NetworkError(f"coupling K must be positive, got {K}")
    A = net.adjacency.astype(float)
    return LaplacianMatrix(K * (np.diag(A.sum(axis=1)) - A), float(K))


def ring_eigenvalue_formula(n: int, d: int, k_index: int) -> float:
    """Closed form ``2d(1 - cos(2*pi*(k-1)/n))`` quoted for the ring lattice.

    Reference value only. It is the spectrum of a cycle scaled by d, which is
    not the spectrum of a degree-d ring lattice when d > 2; simulations always
    use the numerically computed spectrum.
    """
    if not 1 <= k_index <= n:
        raise NetworkError(f"k_index must lie in [1, {n}], got {k_index}")
    return 2.0 * d * (1.0 - np.cos(2.0 * np.pi * (k_index - 1) / n))
