import time

import numpy as np
import pytest

from globalhand.camera import CameraIntrinsics
from globalhand.core import Handedness
from globalhand.synth import SynthParams, sample_pose


def random_poses(n, seed=0, drop_rate=0.0, **kwargs):
    params = SynthParams(seed=seed, drop_rate=drop_rate, **kwargs)
    rng = np.random.default_rng(seed)
    sides = (Handedness.LEFT, Handedness.RIGHT)
    return [sample_pose(params, sides[i % 2], rng) for i in range(n)]


@pytest.fixture
def cam():
    return CameraIntrinsics()


@pytest.fixture(scope="session")
def poses_200():
    return random_poses(200, seed=11)


_acceptance = []
_SUITE_BUDGET_S = 120.0
_session = {}


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    if elapsed > _SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for report in _acceptance:
        name = report.nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if report.passed else 'FAIL'}  {name}")
    elapsed = _session.get("elapsed", time.perf_counter() - _session["start"])
    verdict = "PASS" if elapsed <= _SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"{verdict}  suite runtime {elapsed:.1f} s (budget {_SUITE_BUDGET_S:.0f} s)")
