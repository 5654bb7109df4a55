import numpy as np
import pytest

from mesoxor.network import XorNetlist, xor_energy_matrix
from mesoxor.physics import NandParams


@pytest.fixture(scope="session")
def p15():
    return NandParams.at_supply(15.0)


@pytest.fixture(scope="session")
def net15(p15):
    return XorNetlist.uniform(p15)


@pytest.fixture(scope="session")
def energy15(net15):
    return xor_energy_matrix(net15)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns ``ok``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def emit(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((n, line))
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
