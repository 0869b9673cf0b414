import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(cid, title): test is part of acceptance criterion `cid`"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    cid, title = marker.args
    entry = _RESULTS.setdefault(cid, {"title": title, "seconds": 0.0, "failed": []})
    entry["seconds"] += report.duration
    if report.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=int):
        entry = _RESULTS[cid]
        line = f"criterion {cid}: {'FAIL' if entry['failed'] else 'PASS'}  {entry['title']}"
        line += f"  ({entry['seconds']:.1f} s)"
        if entry["failed"]:
            line += "  failing: " + ", ".join(entry["failed"])
        terminalreporter.write_line(line)
