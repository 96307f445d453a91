import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per measured quantity; returns whether it passed."""

    def report(label, measured, threshold):
        ok = bool(measured <= threshold)
        line = f"{'PASS' if ok else 'FAIL'}  {label}: measured {measured:.3e}, threshold {threshold:.1e}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
