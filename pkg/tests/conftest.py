import pytest

_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    name = mark.args[0]
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if failed:
        _outcomes[name] = "FAIL"
    elif rep.when == "call":
        _outcomes.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _outcomes.items():
        terminalreporter.write_line(f"{verdict}  {name}")
