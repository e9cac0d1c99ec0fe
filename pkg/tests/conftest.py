import pytest

from tdsentropy.core import AttributeSet, Measurement, SelectionEvent, TdsDataset

EIGHT = ("firm", "brittle", "grainy", "creamy", "sticky", "melting", "watery",
         "spreadable")


@pytest.fixture
def attrs():
    return AttributeSet(EIGHT)


def measurement(events, swallow=100.0, panelist="p1", rep=1, sample="s"):
    """Build a measurement from (attribute_idx, onset_s) pairs."""
    return Measurement(panelist, rep, sample, swallow,
                       [SelectionEvent(a, t) for a, t in events])


def dataset(measurements, attributes=None, n_r=1):
    return TdsDataset(attributes or AttributeSet(EIGHT), measurements, n_r)


# acceptance criteria report their outcome here; printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
