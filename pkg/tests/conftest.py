import pytest

# criterion number -> {"title", "details", "failed"}; filled by the acceptance tests
ACCEPTANCE: dict = {}
_NODES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


def _entry(number, title):
    return ACCEPTANCE.setdefault(number, {"title": title, "details": [], "failed": False})


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _entry(*marker.args)
            _NODES[item.nodeid] = marker.args[0]


@pytest.fixture
def record(request):
    entry = _entry(*request.node.get_closest_marker("criterion").args)
    return lambda text: entry["details"].append(str(text))


def pytest_runtest_logreport(report):
    number = _NODES.get(report.nodeid)
    if number is not None and (report.failed or report.skipped):
        ACCEPTANCE[number]["failed"] = True


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        status = "FAIL" if entry["failed"] else "PASS"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"[{status}] {number}. {entry['title']}" + (f" :: {detail}" if detail else ""))
