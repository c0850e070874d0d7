import numpy as np
import pytest

from bltinv.blt import BltParams
from bltinv.poly import Regime
from bltinv.sampling import DEFAULT_FAMILY, STRESS_FAMILY, mixed_draws, random_params

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def example():
    # degree-2 worked example: sum(alpha/lambda) == 1
    return BltParams([0.4, 0.2], [0.8, 0.4])


@pytest.fixture
def lt1_pair():
    return BltParams([0.2, 0.1], [0.8, 0.4])


@pytest.fixture
def gt1_pair():
    return BltParams([0.2, 0.45], [0.8, 0.4])


@pytest.fixture(scope="session")
def draws():
    return mixed_draws(np.random.default_rng(2024), 200)


@pytest.fixture(scope="session")
def stress_draws():
    return mixed_draws(np.random.default_rng(99), 200, family=STRESS_FAMILY)


def regime_draws(regime, count, seed, family=DEFAULT_FAMILY, max_d=8):
    rng = np.random.default_rng(seed)
    return [random_params(rng, int(rng.integers(1, max_d + 1)), Regime(regime), family) for _ in range(count)]
