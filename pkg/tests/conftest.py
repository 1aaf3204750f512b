import json
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

_ACCEPTANCE = {}
_SETUP_TIME = pytest.StashKey[float]()
_RANK = {"SKIP": 0, "PASS": 1, "FAIL": 2}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def desk_profile_path():
    return DATA / "desk.json"


@pytest.fixture
def small_profile(tmp_path):
    """Three declared levels small enough that a full sweep takes well under a second."""
    path = tmp_path / "small.json"
    path.write_text(json.dumps({
        "name": "small",
        "core_count": 2,
        "levels": [
            {"name": "L1", "capacity": "32KiB", "shared": False},
            {"name": "L2", "capacity": "1MiB", "shared": False},
            {"name": "DRAM", "capacity": "1GiB", "shared": True},
        ],
    }))
    return path


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "setup" and rep.passed:
        item.stash[_SETUP_TIME] = rep.duration
        return
    if rep.when != "call" and rep.passed:
        return
    status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
    name = marker.args[0]
    prev, total = _ACCEPTANCE.get(name, ("SKIP", 0.0))
    # a failing part fails the whole criterion; a skip only shows when nothing ran
    merged = max(prev, status, key=_RANK.get)
    _ACCEPTANCE[name] = (merged, total + rep.duration + item.stash.get(_SETUP_TIME, 0.0))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, duration) in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{status}  {name}  ({duration:.1f} s)")
