import numpy as np
import pytest

from qbeh.systems import QbshSystem

ACCEPTANCE_LINES = []


def random_stable(rng, n, margin=0.5):
    r = rng.standard_normal((n, n)) / np.sqrt(n)
    shift = np.max(np.linalg.eigvals(r).real) + margin
    return r - shift * np.eye(n)


def random_psd(rng, n, rank=None):
    r = rng.standard_normal((n, rank or n))
    return r @ r.T


def random_symmetric(rng, n):
    r = rng.standard_normal((n, n))
    return r + r.T


def small_stable_system(rng, n, nonlin=0.3, bilin=0.3):
    """Dense random system whose Gramian series and fixed point both converge."""
    a = random_stable(rng, n, margin=1.5)
    return QbshSystem(
        a_mat=a,
        f_mat=nonlin * rng.standard_normal((n, n)) / np.sqrt(n),
        g_mat=nonlin * rng.standard_normal((n, n)) / np.sqrt(n),
        m_mat=bilin * rng.standard_normal((n, n)) / np.sqrt(n),
        b_vec=rng.standard_normal((n, 1)) / np.sqrt(n),
        c_vec=np.ones((1, n)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
