import numpy as np
import pytest

from chemolab import CoefficientBundle, CoefficientField, Grid, Model, ModelParams

# equilibrium of 2u + 0.2v = 1, 0.2u + 2v = 1
EQ_H4 = 1 / 2.2


def params(chi1=0.1, chi2=0.1, d=1.0, d3=1.0, k=1.0, l=1.0, lam=1.0):
    return ModelParams(d, d, d3, chi1, chi2, k, l, lam)


def h4_bundle():
    return CoefficientBundle.constant(1, 2, 0.2, 1, 0.2, 2)


def extinction_bundle():
    return CoefficientBundle.constant(1, 2, 2, 2, 0.5, 2)


def modulated(c, period=5.0, phase=0.0, mode=1):
    """+-20% in time, +-10% in space around ``c``."""
    return CoefficientField(c, 0.2 * c, period, phase, (0.1 * c,), (mode,))


def model_1d(bundle, p=None, n=65, length=1.0):
    return Model(p or params(), bundle, Grid((length,), (n,)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
