"""Work counters used to check the one-pass and no-retraining guarantees."""

from collections import Counter
from contextlib import contextmanager

COUNTERS: Counter = Counter()


@contextmanager
def counting():
    """Yield a Counter holding only the work done inside the block."""
    before = COUNTERS.copy()
    delta: Counter = Counter()
    try:
        yield delta
    finally:
        after = COUNTERS.copy()
        after.subtract(before)
        delta.update({k: v for k, v in after.items() if v})
