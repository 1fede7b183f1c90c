"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_OUTCOMES: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label, title = marker.args
    entry = _OUTCOMES.setdefault(label, {"title": title, "passed": True, "ran": False, "detail": ""})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["passed"] = False
    for key, value in report.user_properties if report.when == "call" else ():
        if key == "detail":
            entry["detail"] = f"{entry['detail']}; {value}" if entry["detail"] else value


def _sort_key(label):
    head = label.rstrip("abcdefghijklmnopqrstuvwxyz")
    return (0, int(head), label) if head.isdigit() else (1, 0, label)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_OUTCOMES, key=_sort_key):
        e = _OUTCOMES[label]
        status = "PASS" if e["passed"] and e["ran"] else ("FAIL" if e["ran"] or not e["passed"] else "SKIP")
        line = f"[{status}] criterion {label}: {e['title']}"
        if e["detail"]:
            line += f" | {e['detail']}"
        terminalreporter.write_line(line)
