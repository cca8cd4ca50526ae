import numpy as np
import pytest

from kil import Kernel, Region

_ACCEPTANCE = {}


@pytest.fixture(autouse=True)
def _no_shared_cache(monkeypatch):
    monkeypatch.delenv("KIL_CACHE_DIR", raising=False)


@pytest.fixture
def unit():
    return Region.parse("interval:0,1")


@pytest.fixture
def hat():
    return Kernel.parse("wendland-hat:1.0")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def measured(request):
    """Attach a measured-value string to the acceptance summary line."""

    def record(text):
        request.node.user_properties.append(("measured", text))

    return record


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_A") or "_" not in name[6:]:
        return
    label = name[5:].split("_", 1)[0]
    measured = "; ".join(v for k, v in report.user_properties if k == "measured")
    prev = _ACCEPTANCE.get(label)
    ok = report.outcome == "passed" and (prev is None or prev[0])
    _ACCEPTANCE[label] = (ok, "; ".join(filter(None, [prev[1] if prev else "", measured])))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s[1:])):
        ok, measured = _ACCEPTANCE[label]
        line = f"{label:<4} {'PASS' if ok else 'FAIL'}"
        if measured:
            line += f"  {measured}"
        terminalreporter.write_line(line)
