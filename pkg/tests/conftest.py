import numpy as np
import pytest

from eegspike.signal_io import Recording

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def triangle(fs=1000.0, rise_ms=20.0, fall_ms=40.0, amp=100.0, lead_ms=0.0, total_ms=200.0):
    """Piecewise-linear pulse 0 -> amp -> 0 starting ``lead_ms`` into a zero signal."""
    n = int(round(total_ms * fs / 1000.0))
    x = np.zeros(n)
    s = int(round(lead_ms * fs / 1000.0))
    r = int(round(rise_ms * fs / 1000.0))
    f = int(round(fall_ms * fs / 1000.0))
    x[s : s + r + 1] = amp * np.arange(r + 1) / r
    x[s + r : s + r + f + 1] = amp * (1 - np.arange(f + 1) / f)
    return x


@pytest.fixture
def tri():
    return triangle()


@pytest.fixture
def small_recording():
    rng = np.random.default_rng(7)
    return Recording(200.0, ("Fp1", "Fp2"), rng.normal(0, 10, (2, 2000)).astype(np.float32).astype(float))
