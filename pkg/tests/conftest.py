import pytest

from posbvp import families, find_positive_solutions


@pytest.fixture(scope="session")
def fig1():
    return families.fig1_problem()


@pytest.fixture(scope="session")
def fig2():
    return families.fig2_problem()


@pytest.fixture(scope="session")
def fig1_report(fig1):
    return find_positive_solutions(fig1, 0.0, 12.0)


@pytest.fixture(scope="session")
def fig2_report(fig2):
    return find_positive_solutions(fig2, 0.0, 16.0)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
