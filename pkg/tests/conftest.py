"""Shared fixtures. The optimised cluster pulses are computed once per session.

Set PHOTONIC_TNS_PULSE_CACHE to a directory to reuse pulses across sessions.
"""
import os
from pathlib import Path

import pytest

from photonic_tns.config import PRESETS, RunConfig
from photonic_tns.pipeline import PulsePair, optimize_cluster_pulses


@pytest.fixture(scope="session")
def heeres():
    return PRESETS["heeres"]


@pytest.fixture(scope="session")
def besse():
    return PRESETS["besse"]


@pytest.fixture(scope="session")
def cluster_pulses(tmp_path_factory) -> PulsePair:
    cache = os.environ.get("PHOTONIC_TNS_PULSE_CACHE")
    if cache:
        try:
            return PulsePair.load(cache)
        except FileNotFoundError:
            pass
    pair, _ = optimize_cluster_pulses(RunConfig())
    pair.save(Path(cache) if cache else tmp_path_factory.mktemp("pulses"))
    return pair


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion."""
    def _record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
