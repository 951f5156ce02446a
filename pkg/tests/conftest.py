import pytest

from teexplain import fixtures
from teexplain.explain import ExplanationProblem

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(criterion: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}  {detail}")


@pytest.fixture
def disease_problem():
    return ExplanationProblem(fixtures.disease(), fixtures.DISEASE_POINT)


@pytest.fixture
def iris_problem():
    return ExplanationProblem(fixtures.iris(), fixtures.IRIS_POINT)


@pytest.fixture
def boosted_problem():
    return ExplanationProblem(fixtures.boosted(), fixtures.BOOSTED_POINT)
