from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matmap.scenario import build_network, bundled_scenario_path, load_scenario  # noqa: E402

S = 1_000_000


@pytest.fixture(scope="session")
def two_units_path() -> Path:
    return bundled_scenario_path("two_units.json")


@pytest.fixture(scope="session")
def two_units_scenario(two_units_path):
    return load_scenario(two_units_path)


@pytest.fixture(scope="session")
def two_units(two_units_scenario):
    return build_network(two_units_scenario)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {text}")
