import numpy as np
import pytest
from hypothesis import strategies as st

from stokes_qsl import AmcsParams


def random_params(rng: np.random.Generator, n: int) -> AmcsParams:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z /= np.linalg.norm(z)
    return AmcsParams(n, z[0], z[1])


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


@st.composite
def amcs_params(draw, n_min=1, n_max=30):
    n = draw(st.integers(n_min, n_max))
    theta = draw(st.floats(0.0, np.pi / 2))
    ph_p = draw(st.floats(0.0, 2 * np.pi))
    ph_m = draw(st.floats(0.0, 2 * np.pi))
    return AmcsParams(n, np.cos(theta) * np.exp(1j * ph_p), np.sin(theta) * np.exp(1j * ph_m))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
