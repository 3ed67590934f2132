import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture
def photo_path():
    return DATA / "astronaut_256.png"


@pytest.fixture
def ramp_x():
    return np.tile(np.arange(32, dtype=float), (32, 1))


@pytest.fixture
def stripes():
    x = np.arange(64, dtype=float)
    return np.tile(np.sin(2 * np.pi * x / 8), (64, 1))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        name, ok, detail = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
