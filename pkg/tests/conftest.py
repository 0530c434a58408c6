import pytest

from pcalevy import RegimeParams, Scenario

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def regime0():
    return RegimeParams(mu=0.2, sigma=0.2, jump_intensity=1.0, jump_rate=10.0)


@pytest.fixture(scope="session")
def regime1():
    return RegimeParams(mu=0.1, sigma=0.1, jump_intensity=1.0, jump_rate=10.0)


@pytest.fixture(scope="session")
def base(regime0, regime1):
    """Reference scenario with the trigger at the reference optimum."""
    return Scenario(regime0, regime1, q=0.1, b=1.0, a_target=0.3, bprime=0.5401)


@pytest.fixture(scope="session")
def convergent(base):
    """Trigger level where the multi-PCA series converges."""
    return base.with_bprime(0.3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
