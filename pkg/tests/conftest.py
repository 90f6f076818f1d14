import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from linksched.channel import SystemParams, generate_channel  # noqa: E402
from linksched.data import SampleSet  # noqa: E402

N0 = SystemParams().noise_over_pmax


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def n0():
    return N0


def channels(k, n, seed=7, split="misc"):
    return [generate_channel(k, seed, i, split) for i in range(n)]


@pytest.fixture(scope="session")
def small_sets():
    """Labeled K=4 train/test sets small enough for quick training runs."""
    tr = SampleSet.from_channels(channels(4, 48, seed=3, split="train"), N0, label=True)
    te = SampleSet.from_channels(channels(4, 32, seed=3, split="test"), N0, label=True)
    return tr, te


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
