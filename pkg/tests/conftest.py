import numpy as np
import pytest
from scipy.stats import unitary_group

from idqc.model import assemble_plant

_ACCEPTANCE = []


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_state(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)


def random_plant(rng, dim_S, dim_A, gap=0.5):
    """Non-demolition plant with well separated accessor levels."""
    alphas = np.sort(rng.uniform(-2, 2, size=dim_A))
    alphas = alphas + gap * np.arange(dim_A)
    basis = unitary_group.rvs(dim_A, random_state=rng) if dim_A > 1 else np.eye(1)
    blocks = [random_hermitian(rng, dim_S) for _ in range(dim_A)]
    return assemble_plant(random_hermitian(rng, dim_S), alphas, basis, blocks), basis, blocks


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
