import numpy as np
import pytest

from gambledetect.dataset_io import LabeledDataset


def make_dataset(X, y, prefix="r"):
    X = np.asarray(X, dtype=np.float64)
    return LabeledDataset([f"{prefix}{i}" for i in range(len(X))], X, np.asarray(y, dtype=np.int64),
                          [f"f{j}" for j in range(X.shape[1])])


@pytest.fixture
def small_binary():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(200, 10))
    y = (X[:, 0] + 0.5 * X[:, 1] * X[:, 2] + rng.normal(scale=0.5, size=200) > 0).astype(np.int64)
    return make_dataset(X, y)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
