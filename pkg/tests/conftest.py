import pytest

# criterion id -> (passed, one-line summary); filled by tests in test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the end-of-run summary."""
    cid = request.node.get_closest_marker("acceptance").args[0]

    def record(passed, summary):
        ACCEPTANCE[cid] = (bool(passed), summary)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, summary = ACCEPTANCE[cid]
        terminalreporter.write_line(f"AC{cid:<2} {'PASS' if passed else 'FAIL'}  {summary}")
