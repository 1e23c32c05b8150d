import numpy as np
import pytest

from kdspin.core import Envelope, canonical_params, frequencies, CANONICAL_TAU
from kdspin.dirac import CoefficientState, evolve

_ACCEPTANCE = []


def record(criterion, ok, detail):
    """Store one pass/fail line for the acceptance summary."""
    _ACCEPTANCE.append((criterion, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(_ACCEPTANCE, key=lambda x: _key(x[0])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {crit}: {detail}")


def _key(c):
    head = c.split()[0]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 99, c)


@pytest.fixture(scope="session")
def params():
    return canonical_params()


@pytest.fixture(scope="session")
def freqs(params):
    return frequencies(params)


@pytest.fixture(scope="session")
def pulse():
    return Envelope.sin2(CANONICAL_TAU)


@pytest.fixture(scope="session")
def run_up(params, pulse):
    """Canonical sin^2 pulse, c_-1^up = 1, one sample per cycle."""
    return evolve(CoefficientState.basis(-1, "up", 10), params, pulse)


@pytest.fixture(scope="session")
def run_down(params, pulse):
    return evolve(CoefficientState.basis(-1, "down", 10), params, pulse)


@pytest.fixture(scope="session")
def run_up_half_step(params, pulse):
    return evolve(CoefficientState.basis(-1, "up", 10), params, pulse, 2, stride=None)


@pytest.fixture(scope="session")
def run_up_n12(pulse):
    p = canonical_params(12)
    return evolve(CoefficientState.basis(-1, "up", 12), p, pulse, stride=None)


@pytest.fixture(scope="session")
def fig3_times():
    return np.linspace(2250.0, 2550.0, 300)


@pytest.fixture(scope="session")
def dirac_plateau_grid(params, fig3_times):
    from kdspin.scan import run_scan
    return run_scan("DiracNumeric", params, Envelope.plateau(2250.0, 5.0),
                    [0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi], fig3_times)
