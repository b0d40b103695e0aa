import pytest

# Filled by tests/test_acceptance.py: criterion id -> (passed, title, detail)
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, title, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  AC{key:02d} {title}: {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
