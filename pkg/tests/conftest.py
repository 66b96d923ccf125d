import numpy as np
import pytest

from adaptive_ids.dataset import LabeledDataset, load_labeled_csv
from adaptive_ids.rules import default_ruleset
from adaptive_ids.synthdata import write_synthetic_nsl_kdd


@pytest.fixture(scope="session")
def ruleset():
    return default_ruleset()


@pytest.fixture(scope="session")
def nsl_subset_path(tmp_path_factory):
    """A 500-row NSL-KDD-layout file (seeded stand-in for the real corpus)."""
    path = tmp_path_factory.mktemp("nsl") / "nsl500.csv"
    write_synthetic_nsl_kdd(path, n=500, seed=7)
    return path


@pytest.fixture(scope="session")
def nsl_subset(nsl_subset_path):
    return load_labeled_csv(nsl_subset_path, "nsl_kdd")


def blobs(n=60, dim=3, sep=2.0, seed=0, names=None):
    """Two Gaussian clouds, labels -1 / +1, raw (unscaled) features."""
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([rng.normal(0.0, 1.0, (half, dim)), rng.normal(sep, 1.0, (n - half, dim))])
    y = np.array([-1] * half + [1] * (n - half))
    names = names or tuple(f"f{i}" for i in range(dim))
    return LabeledDataset(X, y, names, "generic")


@pytest.fixture
def blob_ds():
    return blobs()


# -- acceptance reporting -----------------------------------------------------

_CRITERIA: dict[tuple[int, str], tuple[str, str]] = {}


class _Criterion:
    """Context manager that records PASS/FAIL for one numbered acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:>2} {status}: {self.title}"
        if self.detail:
            line += f" ({self.detail})"
        _CRITERIA[(self.number, self.title)] = (status, line)
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n][1])
