import math

import numpy as np
import pytest

from apv import make_polynomial_integrand
from apv.expr import integrand


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = marker.args
    key = (number, title)
    prev = item.config._criteria.get(key, True)
    item.config._criteria[key] = prev and report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(criteria.items()):
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}")


# Smooth test functions with exact derivatives, keyed by name.
FAMILY = {
    "poly0": lambda: make_polynomial_integrand([1.5]),
    "poly1": lambda: make_polynomial_integrand([0.4, -1.0]),
    "poly3": lambda: make_polynomial_integrand([0.3, 1.0, 2.0, -0.5]),
    "poly5": lambda: make_polynomial_integrand([1.0, -2.0, 0.5, 3.0, -1.0, 0.7]),
    "exp": lambda: integrand("exp(x)"),
    "sin": lambda: integrand("sin(x)"),
    "inv": lambda: integrand("1/(x+2)"),
}

REFERENCE = {
    "exp": (np.exp, [np.exp] * 6),
    "sin": (np.sin, [np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)]),
    "inv": (
        lambda x: 1 / (x + 2),
        [lambda x, k=k: (-1) ** k * math.factorial(k) / (x + 2) ** (k + 1) for k in range(6)],
    ),
}


@pytest.fixture(params=sorted(FAMILY))
def family_member(request):
    return request.param, FAMILY[request.param]()
