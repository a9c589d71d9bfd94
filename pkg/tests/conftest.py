import os

import pytest
from hypothesis import settings

from nsrdf.rdf import read_ntriples

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
QUERIES = os.path.join(FIXTURES, "queries")

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def read_query(name: str) -> str:
    with open(os.path.join(QUERIES, name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def ms10():
    return read_ntriples(os.path.join(FIXTURES, "ms10.nt"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
