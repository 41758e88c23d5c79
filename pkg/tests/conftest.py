import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(autouse=True)
def _no_cutoff_env(monkeypatch):
    monkeypatch.delenv("PMM_CUTOFF", raising=False)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion as a PASS/FAIL line, shown in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    class Recorder:
        def __init__(self):
            self.label = request.node.name
            self.notes = []

        def note(self, text):
            self.notes.append(text)

    rec = Recorder()
    yield rec
    call = getattr(request.node, "rep_call", None)
    verdict = "PASS" if call is not None and call.passed else "FAIL"
    detail = f" ({'; '.join(rec.notes)})" if rec.notes else ""
    line = f"{verdict} {rec.label}{detail}"
    print(line)
    lines.append(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
