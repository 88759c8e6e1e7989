import pytest

# (criterion, passed, detail) collected by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((criterion, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
    passed = sum(ok for _, ok, _ in ACCEPTANCE)
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} criteria passed")
