import numpy as np
import pytest

from mipxai.dataset import Dataset
from mipxai.synth import SynthSpec, generate

_ACCEPTANCE = {}


def record_criterion(number, title, passed, detail=""):
    prev = _ACCEPTANCE.get(number)
    ok = passed if prev is None else (prev[1] and passed)
    details = detail if prev is None else "; ".join(filter(None, [prev[2], detail]))
    _ACCEPTANCE[number] = (title, ok, details)


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def xor_data():
    X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]] * 100, dtype=float)
    y = np.array([0, 0, 1, 1] * 100)
    return Dataset.from_arrays(X, y, ["a", "b"])


@pytest.fixture(scope="session")
def independent_data():
    spec = SynthSpec.blocks(1000, [2.0, 1.0, 0.5, 0.0], seed=7)
    return generate(spec)
