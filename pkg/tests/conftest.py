import numpy as np
import pytest

from emdoa.geometry import ArrayGeometry


@pytest.fixture
def ula10():
    return ArrayGeometry.ula(10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return X @ X.conj().T / rank


def random_geometry(rng, n=6):
    return ArrayGeometry(rng.uniform(-1.5, 1.5, size=(n, 3)), wavelength=rng.uniform(0.5, 2.0))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
