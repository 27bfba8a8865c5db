from decimal import Decimal

import pytest

from quizpool.config import QuizConfig
from quizpool.money import Money, Ratio


def make_config(case="case1", cp=None, **kw) -> QuizConfig:
    if cp is None:
        cp = "1" if case == "case1" else "0.75"
    kw.setdefault("ipp", Money.of("100"))
    kw.setdefault("fee", Money.of("1"))
    kw.setdefault("ratio", Ratio.of("0.9695"))
    return QuizConfig(cp=Decimal(cp), case=case, **kw)


@pytest.fixture
def case1():
    return make_config("case1")


@pytest.fixture
def case2():
    return make_config("case2")


@pytest.fixture
def case3():
    return make_config("case3")


ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
