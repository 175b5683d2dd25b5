import numpy as np
import pytest

from slodowy_ais.lie_core import make_context
from slodowy_ais.slodowy import make_slice

E = np.array([[0, 1], [0, 0]], dtype=complex)
F = np.array([[0, 0], [1, 0]], dtype=complex)
H = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture(params=[2, 3, 4])
def ctx(request):
    return make_context(request.param)


@pytest.fixture
def ctx2():
    return make_context(2)


@pytest.fixture
def ctx3():
    return make_context(3)


@pytest.fixture
def slc(ctx):
    return make_slice(ctx)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        verdict, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  {text}")
