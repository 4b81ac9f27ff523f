import numpy as np
import pytest

from spadcal import TagStream

acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_results:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_results:
            terminalreporter.write_line(line)


def stream_from_pairs(pairs, duration_ps=None):
    """Build a TagStream from (channel, t_ps) tuples."""
    ch = np.array([p[0] for p in pairs], dtype=np.uint8)
    t = np.array([p[1] for p in pairs], dtype=np.int64)
    if duration_ps is None:
        duration_ps = int(t[-1]) if t.size else 0
    return TagStream(channel=ch, t_ps=t, duration_ps=duration_ps)


@pytest.fixture
def make_stream():
    return stream_from_pairs
