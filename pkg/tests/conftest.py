import sys
from pathlib import Path

import pytest

# make the shared oracle helpers importable as a plain module
sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(key: str, ok: bool, detail: str) -> bool:
        line = f"{key}: {'PASS' if ok else 'FAIL'} - {detail}"
        prev = _RESULTS.get(key)
        # a criterion checked by several tests fails if any part fails
        if prev is not None:
            ok = ok and prev[0]
            detail = f"{prev[1]}; {detail}"
        _RESULTS[key] = (ok, detail)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: int(k.split()[1])):
        ok, detail = _RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'} - {detail}")
