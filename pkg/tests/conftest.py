import numpy as np
import pytest

from nmutp.sampling import RngStream

# Filled by tests/test_acceptance.py: criterion number -> (passed, detail).
ACCEPTANCE_LINES = {}


@pytest.fixture
def stream():
    def make(seed=12345, stream_id=0, family=()):
        return RngStream(seed, stream_id, family)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_density(rng, d, rank=None):
    """Independent reference generator (Ginibre-style), not the library sampler."""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        passed, detail = ACCEPTANCE_LINES[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
