import pytest

from coursealloc.model import toy_problem


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def record(name: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
        request.config._acceptance_lines.append(line)
        print(line)
        assert passed, line

    return record


@pytest.fixture
def toy():
    return toy_problem()


ALICE, BOB, CHARLIE = 0, 1, 2
