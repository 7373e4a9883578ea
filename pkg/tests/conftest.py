import pytest


class _Ledger:
    def __init__(self):
        self.lines = []

    def record(self, label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        self.lines.append(line)
        print(line)
        return ok


_LEDGER = _Ledger()


@pytest.fixture(scope="session")
def acceptance():
    return _LEDGER


def pytest_terminal_summary(terminalreporter):
    if _LEDGER.lines:
        terminalreporter.section("acceptance criteria")
        for line in _LEDGER.lines:
            terminalreporter.write_line(line)
