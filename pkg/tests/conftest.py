import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ergomodel import DEFAULT, LanguageOracle, measure_for  # noqa: E402


@pytest.fixture(scope="session")
def lang():
    return LanguageOracle(DEFAULT)


@pytest.fixture(scope="session")
def mu(lang):
    return measure_for(lang)


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the test still asserts on its own."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
