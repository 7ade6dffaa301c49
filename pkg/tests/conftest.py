import pytest

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        detail = getattr(item, "acceptance_detail", "")
        outcome = "xfail" if hasattr(rep, "wasxfail") else rep.outcome
        _ACCEPTANCE.append((number, title, outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, outcome, detail in sorted(_ACCEPTANCE):
        status = {"passed": "PASS", "xfail": "FAIL (known, see decisions ledger)"}.get(outcome, "FAIL")
        line = f"criterion {number:2d} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
