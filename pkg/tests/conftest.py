import numpy as np
import pytest

from sortsax.series import DataSeries, random_walk_generate, znormalize

# outcome per acceptance criterion, printed in the terminal summary
_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{name}: {outcome.upper()}")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def make_series(values, sid=0, ts=0):
    return DataSeries(id=sid, values=np.asarray(values, dtype=np.float64), timestamp=ts)


def normalized_walks(count, length, seed):
    """Z-normalized random walks, the standard test corpus."""
    return [znormalize(s) for s in random_walk_generate(count, length, seed)]
