import json
import sys
from pathlib import Path

import pytest

from nl2pddl.llm import LLMClient, PromptTemplate
from nl2pddl.pddl import parse_domain, parse_problem

TESTS = Path(__file__).parent
DATA = Path(__file__).parents[1] / "src" / "nl2pddl" / "data"
FIXTURES = DATA / "fixtures"
TEMPLATES = DATA / "templates"
FROZEN = TESTS / "frozen"

sys.path.insert(0, str(TESTS))


def data_text(rel: str) -> str:
    return (DATA / rel).read_text(encoding="utf-8")


def load_domain(rel: str):
    return parse_domain(data_text(rel))


def load_problem(rel: str):
    return parse_problem(data_text(rel))


def template(name: str) -> PromptTemplate:
    return PromptTemplate.load(TEMPLATES / name)


def frozen(name: str):
    return json.loads((FROZEN / name).read_text(encoding="utf-8"))


@pytest.fixture
def llm():
    client = LLMClient(fixtures=FIXTURES)
    yield client
    client.close()


@pytest.fixture
def bw_domain():
    return load_domain("blocksworld/domain.pddl")


@pytest.fixture
def bw_problem():
    return load_problem("blocksworld/problem.pddl")


@pytest.fixture
def logistics():
    return load_domain("logistics/domain.pddl"), load_problem("logistics/problem.pddl")


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
