import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from adaptive_inertia.netgen import LaplacianMatrix, Network, gen_ring_regular, gen_spider_web, laplacian
from adaptive_inertia.spectral import decompose

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def path2_laplacian(K=1.0) -> LaplacianMatrix:
    """Two nodes, one edge: the only elastic eigenvalue is 2K."""
    A = np.array([[0, 1], [1, 0]], dtype=np.int8)
    return laplacian(Network("path", 2, A, {}, None), K)


@pytest.fixture(scope="session")
def star100():
    net = gen_spider_web(100)
    L = laplacian(net, 1.0)
    return net, L, decompose(L)


@pytest.fixture(scope="session")
def ring100():
    net = gen_ring_regular(100, 4)
    L = laplacian(net, 1.0)
    return net, L, decompose(L)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
