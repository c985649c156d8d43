import os
import sys

import pytest

# acceptance lines, printed once at the end of the session
ACCEPTANCE = {}


def record(num, title, ok, detail=""):
    prev = ACCEPTANCE.get(num)
    ok = bool(ok) and (prev is None or prev[1])
    detail = detail if prev is None else f"{prev[2]}; {detail}"
    ACCEPTANCE[num] = (title, ok, detail)


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"C{num:02d} {'PASS' if ok else 'FAIL'} {title}: {detail}")
