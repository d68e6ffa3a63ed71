import numpy as np
import pytest

from dwspectral.signal import GeometrySpec, Grid3, make_brain_phantom


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_phantom():
    return make_brain_phantom(Grid3(48, 48, 8))


@pytest.fixture(scope="session")
def default_phantom():
    return make_brain_phantom()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test checks")


_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    detail = getattr(item, "criterion_detail", "")
    _CRITERIA.setdefault(mark.args[0], []).append((item.name, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        rows = _CRITERIA[key]
        status = "PASS" if all(ok for _, ok, _ in rows) else "FAIL"
        parts = "; ".join(f"{name}: {'ok' if ok else 'failed'}{' (' + d + ')' if d else ''}" for name, ok, d in rows)
        terminalreporter.write_line(f"criterion {key}: {status}  {parts}")
