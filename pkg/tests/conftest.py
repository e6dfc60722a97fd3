from __future__ import annotations

import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# criterion number -> list of (check name, passed, detail)
ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    def _record(criterion: int, name: str, passed: bool, detail: str = ""):
        ACCEPTANCE.setdefault(criterion, []).append((name, bool(passed), detail))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[c]
        ok = all(p for _, p, _ in checks)
        tr.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p, _ in checks)}/{len(checks)} checks)")
        for name, p, detail in checks:
            tr.write_line(f"    [{'ok' if p else 'FAILED'}] {name}: {detail}")
