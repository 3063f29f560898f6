import pytest

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    detail = dict(rep.user_properties).get("detail", "")
    _ACCEPTANCE.append((marker.args[0], rep.outcome, rep.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, outcome, duration, detail in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"{status}  {name}  ({duration:.1f}s)"
        if detail:
            line += f"  {detail}"
        tr.write_line(line)
