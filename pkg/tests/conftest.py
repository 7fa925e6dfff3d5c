import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion checked by the test")
    config._criteria = {}


def _entry(config, marker):
    key, title = marker.args
    return config._criteria.setdefault(key, {"title": title, "ok": True, "notes": []})


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion's summary line."""
    marker = request.node.get_closest_marker("criterion")

    def add(text):
        if marker is not None:
            _entry(request.config, marker)["notes"].append(text)

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    entry = _entry(item.config, marker)
    if rep.when == "call" or rep.failed:
        entry["ok"] = entry["ok"] and rep.passed


def _natural(key):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", key)]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(criteria, key=_natural):
        c = criteria[key]
        line = f"{'PASS' if c['ok'] else 'FAIL'}  {key:<4} {c['title']}"
        if c["notes"]:
            line += "  [" + "; ".join(c["notes"]) + "]"
        terminalreporter.write_line(line)
