import random
from pathlib import Path

import pytest

from polarsession.demos import data_polygraph, data_text

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def mascarpone():
    return data_polygraph("mascarpone.json")


@pytest.fixture(scope="session")
def hopf():
    return data_polygraph("hopf.json")


@pytest.fixture(scope="session")
def global_state():
    return data_polygraph("global_state.json")


@pytest.fixture(scope="session")
def recipe_text():
    return data_text("mascarpone.do")


# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
    line = f"{'✅' if passed else '❌'} {number:2d}. {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
