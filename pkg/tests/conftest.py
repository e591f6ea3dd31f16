import functools

import pytest

CRITERIA = {
    1: "2-bridge golden table, exact gradings",
    2: "running-example fixture",
    3: "torus-knot golden table",
    4: "component structure",
    5: "rank equals Alexander sum",
    6: "eps/g invariance",
    7: "index property suites",
    8: "numerical kernels",
    9: "z self-test",
    10: "signature validation",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        # an expected failure still leaves its criterion red
        ok = rep.passed and not hasattr(rep, "wasxfail")
        if hasattr(rep, "wasxfail") and rep.skipped:
            ok = False
        _outcomes.setdefault(marker.args[0], []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _outcomes.get(n)
        if runs is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(runs) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}")


@functools.lru_cache(maxsize=None)
def traced(p, q, r, s, epsA=0.01, epsB=0.0):
    from pillowfloer.knots.torus import TorusSpec, trace_torus

    return trace_torus(TorusSpec(p, q, r, s, epsA, epsB))


@functools.lru_cache(maxsize=None)
def torus_report(p, q, r, s, epsA=0.01, eps=0.1, g=""):
    from pillowfloer.knots.torus import floer_of_traced
    from pillowfloer.pillowcase import PerturbationFunction

    return floer_of_traced(traced(p, q, r, s, epsA), eps=eps, g=PerturbationFunction.parse(g))


@pytest.fixture(scope="session")
def torus():
    return torus_report


@pytest.fixture(scope="session")
def trace():
    return traced
