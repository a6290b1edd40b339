import pytest

from pglayout.graph import generate_synthetic_pangenome

# (criterion number, title, passed, detail) appended by test_acceptance
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture(scope="session")
def desk_graph():
    """The 5000-node synthetic pangenome used by the large-scale checks."""
    return generate_synthetic_pangenome(7, 5000, 12, 0.05)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
