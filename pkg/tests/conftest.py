from __future__ import annotations

import pytest

from marketaudit import PriceSeries, gen_random_walk, gen_trend_sine
from marketaudit.cli import main

# One line per acceptance criterion, echoed after the run so the verdicts
# survive pytest's output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def walk():
    """The fixed seeded random walk used across detector tests."""
    return gen_random_walk(seed=42, n=1000, sigma=1.0, start=100.0)


@pytest.fixture
def sine():
    """Noise-free sinusoid where direction is genuinely learnable."""
    return gen_trend_sine(seed=0, n=41, start=100.0, amplitude=5.0, period=20)


@pytest.fixture
def tiny_series():
    return PriceSeries.from_closes([100.0, 101.0, 99.0])


@pytest.fixture
def invoke(capsys):
    """Run the CLI in-process; returns (exit_code, stdout, stderr)."""

    def _invoke(*args: str):
        code = main([str(a) for a in args])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _invoke
