"""Shared fixtures plus the acceptance-criteria summary printed after a run."""

from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from scenefire.gabor import GaborBank
from scenefire.scene import FrameLabel

T0 = datetime(2016, 5, 1, 9, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def rng():
    return np.random.default_rng(20160501)


@pytest.fixture
def small_bank():
    """Two wavelengths, eight orientations: fast but representative."""
    return GaborBank(wavelengths=(4.0, 8.0), thetas=tuple(k * math.pi / 8 for k in range(8)))


def make_label(i: int, label: str, scenes: dict[str, tuple[int, float]] | None = None,
               spacing: float = 30.0) -> FrameLabel:
    scenes = scenes or {}
    return FrameLabel(
        frame_id=f"frame_{i:04d}",
        timestamp=T0 + timedelta(seconds=spacing * i),
        label=label,
        responses={name: count for name, (count, _) in scenes.items()},
        max_response={name: peak for name, (_, peak) in scenes.items()},
    )


def label_run(labels: list[str]) -> list[FrameLabel]:
    return [make_label(i, lab) for i, lab in enumerate(labels)]


# --- acceptance criteria reporting -----------------------------------------

_CRITERIA: dict[str, tuple[int, str]] = {}
_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, title): marks a test as part of an acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _CRITERIA[item.nodeid] = (marker.args[0], marker.args[1])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or item.nodeid not in _CRITERIA:
        return
    num, title = _CRITERIA[item.nodeid]
    entry = _RESULTS.setdefault(num, {"title": title, "passed": 0, "failed": 0, "xfailed": 0})
    if hasattr(report, "wasxfail"):
        entry["xfailed"] += 1
    elif report.passed:
        entry["passed"] += 1
    else:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        entry = _RESULTS[num]
        if entry["failed"]:
            status = "FAIL"
        elif entry["xfailed"]:
            status = "PASS (with documented xfail deviation)"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {num}: {status} - {entry['title']}")
