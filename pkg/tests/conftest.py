import time
from contextlib import contextmanager

import pytest

_LINES = {}


class Checks:
    """Named boolean checks for one acceptance criterion."""

    def __init__(self):
        self.failed = []
        self.notes = []

    def check(self, name, ok, detail=""):
        if not ok:
            self.failed.append(f"{name} ({detail})" if detail else name)
        elif detail:
            self.notes.append(detail)
        return ok


@contextmanager
def _criterion(number, title, max_seconds=None):
    c = Checks()
    t0 = time.perf_counter()
    err = None
    try:
        yield c
    except Exception as exc:  # recorded, then re-raised
        err = exc
        raise
    finally:
        dt = time.perf_counter() - t0
        if max_seconds is not None:
            c.check("runtime", dt < max_seconds, f"{dt:.2f}s vs {max_seconds}s")
        if err is not None:
            c.failed.append(f"{type(err).__name__}: {err}")
        status = "FAIL" if c.failed else "PASS"
        why = "; ".join(c.failed) if c.failed else "; ".join(c.notes)
        line = f"criterion {number:>2} {status}  {title}  [{dt:.2f}s]" + (f"  {why}" if why else "")
        _LINES[(int("".join(ch for ch in str(number) if ch.isdigit())), str(number))] = line
        print(line)
    assert not c.failed, "; ".join(c.failed)


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_LINES):
            terminalreporter.write_line(_LINES[k])
