import pytest

from culturesel import ModelParams, ProductionRecord

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion is still made by the caller."""

    def record(name: str, passed: bool, detail: str = "") -> bool:
        _CRITERIA.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def rec(order, director, matcher, variant, concept="c", society="s", round=1, game=1):
    return ProductionRecord(society, round, game, order, concept, director, matcher, variant)


@pytest.fixture
def drift0():
    return ModelParams(2, 0.0, 0.0, 0.0)
