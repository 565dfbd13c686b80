import pytest

from matstruct.characteristics import CharTables
from matstruct.model import example_family


@pytest.fixture(scope="session")
def ref_spec():
    """kappa=2, alpha=4, delta=0.1, gamma=0.2, Hill(1, 1, 2)."""
    return example_family()


@pytest.fixture(scope="session")
def ref_tables(ref_spec):
    return CharTables(ref_spec)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
