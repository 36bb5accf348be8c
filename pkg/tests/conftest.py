from importlib import resources

import pytest

from netcomplete.factio import parse_facts

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def data_text(name: str) -> str:
    return resources.files("netcomplete").joinpath("data", name).read_text()


@pytest.fixture(scope="session")
def toy():
    return parse_facts(data_text("toy.lp"))


@pytest.fixture(scope="session")
def balanced():
    return parse_facts(data_text("union_balanced.lp"))


@pytest.fixture(scope="session")
def unbalanced():
    return parse_facts(data_text("union_unbalanced.lp"))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
