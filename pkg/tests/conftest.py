import pytest

# criterion number -> (passed, description, detail)
ACCEPTANCE_RESULTS = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, description, detail):
        ACCEPTANCE_RESULTS[number] = (bool(passed), description, detail)
        print(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {description} | {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, description, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {description} | {detail}")
