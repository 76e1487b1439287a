from pathlib import Path

import numpy as np
import pytest

from fpsieve.core import VerticalDatabase

DATA = Path(__file__).parent / "data"

# vertical form of the 14-item, 20-transaction worked example
EXAMPLE_TIDS = {
    "x1": [3, 4, 5, 7, 9, 10, 12, 13, 14, 15, 18, 19, 20],
    "x2": [1, 2, 6, 8, 11, 16, 17],
    "x3": [3, 5, 9, 10, 12, 13, 14, 18, 19, 20],
    "x4": [1, 2, 4, 6, 7, 8, 11, 15, 16, 17],
    "x5": [2, 6, 8, 10, 12, 13, 16, 20],
    "x6": [1, 3, 4, 5, 7, 9, 11, 14, 15, 17, 18, 19],
    "x7": [3, 4, 5, 6, 7, 8, 9, 11, 12, 13, 14, 17, 18, 19, 20],
    "x8": [1, 2, 10, 15, 16],
    "x9": [3, 4, 5, 8, 11, 12, 16, 17],
    "x10": [1, 2, 6, 7, 9, 10, 13, 14, 15, 18, 19, 20],
    "x11": [2, 4, 5, 7, 8, 9, 11, 12, 14, 17, 18],
    "x12": [1, 3, 6, 10, 13, 15, 16, 19, 20],
    "x13": [1, 2, 4, 5, 11, 12, 15],
    "x14": [3, 6, 7, 8, 9, 10, 13, 14, 16, 17, 18, 19, 20],
}

# level-1 visit order of the reference walkthrough (1-based element numbers);
# it breaks frequency ties differently from compute_rate
REFERENCE_RATE = [8, 13, 2, 9, 5, 12, 4, 3, 11, 10, 6, 14, 1, 7]
EXAMPLE_FREQS = [13, 7, 10, 10, 8, 12, 15, 5, 8, 12, 11, 9, 7, 13]


def example_db() -> VerticalDatabase:
    return VerticalDatabase(
        names=tuple(EXAMPLE_TIDS),
        tid_lists=tuple(np.array(v, dtype=np.int32) for v in EXAMPLE_TIDS.values()),
        n_transactions=20,
    )


def reference_rate() -> np.ndarray:
    return np.array(REFERENCE_RATE, dtype=np.int32) - 1


def random_db(rng: np.random.Generator, m: int, n: int, p: float) -> VerticalDatabase:
    mat = rng.random((n, m)) < p
    return VerticalDatabase(
        names=tuple(f"i{k}" for k in range(m)),
        tid_lists=tuple((np.flatnonzero(mat[:, k]) + 1).astype(np.int32) for k in range(m)),
        n_transactions=n,
    )


def recount(db: VerticalDatabase, itemset) -> int:
    rows = db.to_transactions()
    return sum(1 for r in rows if set(itemset) <= r)


@pytest.fixture
def tdb() -> VerticalDatabase:
    return example_db()


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
