import pytest

from nspolar import estimation
from nspolar.crossbar import CrossbarConfig


@pytest.fixture(scope="session")
def rw25_cfg():
    return CrossbarConfig(Rw=25.0)


@pytest.fixture(scope="session")
def rw25_train(rw25_cfg):
    return estimation.generate_training(rw25_cfg, estimation.DEFAULT_TRIALS, seed=2024, stream=1)


@pytest.fixture(scope="session")
def rw25_holdout(rw25_cfg):
    return estimation.generate_training(rw25_cfg, estimation.DEFAULT_HOLDOUT, seed=2024, stream=9)


ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
