"""Shared fixtures: kernel backends, a suite-wide audit of every optimal
MIQP solution, and the acceptance summary printed after the run."""

import numpy as np
import pytest

from tscplan import _fallback, miqp, planner

from audit import AUDIT, audited

try:
    from tscplan import _core
except ImportError:  # extension not built
    _core = None

KERNELS = [pytest.param(_fallback, id="python")]
if _core is not None:
    KERNELS.append(pytest.param(_core, id="compiled"))


@pytest.fixture(params=KERNELS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def audit_every_solution(monkeypatch, request):
    label = request.node.nodeid
    bnb = audited(miqp.solve_bnb, label)
    monkeypatch.setattr(miqp, "solve_bnb", bnb)
    monkeypatch.setattr(miqp, "enumerate_oracle", audited(miqp.enumerate_oracle, label))
    monkeypatch.setattr(planner, "solve_bnb", bnb)
    before = len(AUDIT["violations"])
    yield
    new = AUDIT["violations"][before:]
    assert not new, f"optimal solutions violating constraints: {new[:3]}"


def pytest_collection_modifyitems(items):
    # the suite-wide audit criterion must see every other test first
    last = [i for i in items if i.name == "test_c2_constraint_audit"]
    items[:] = [i for i in items if i.name != "test_c2_constraint_audit"] + last


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when != "call" and report.failed):
        props = dict(report.user_properties)
        status = props.get("acceptance_status", "PASS" if report.passed else "FAIL")
        if report.failed:
            status = "FAIL"
        _ACCEPTANCE[name] = (status, props.get("acceptance_detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{status:4}  {name}  {detail}")
    terminalreporter.write_line(f"audited optimal solutions: {AUDIT['solutions']}, violations: {len(AUDIT['violations'])}")
