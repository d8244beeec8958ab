import sys

import pytest

from dpancs import NonlinearityFn


@pytest.fixture(params=["unity", "pt", "sqrtn"])
def worked_f(request):
    return {"unity": NonlinearityFn.unity(), "pt": NonlinearityFn.pt(3),
            "sqrtn": NonlinearityFn.sqrt()}[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines.items()):
        terminalreporter.write_line(line)
