import os
from pathlib import Path

import numpy as np
import pytest

ACCEPTANCE_LINES = []

MNIST_FILES = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
               "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run long experiment checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="long-running; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20190419)


def _find(directory, name):
    for candidate in (directory / name, directory / (name + ".gz")):
        if candidate.exists():
            return candidate
    return None


@pytest.fixture(scope="session")
def mnist_paths():
    directory = Path(os.environ.get("MVRBM_MNIST_DIR", "/root/data/mnist"))
    paths = [_find(directory, n) for n in MNIST_FILES]
    if any(p is None for p in paths):
        pytest.skip(f"MNIST IDX files not found in {directory}")
    return dict(zip(("train_images", "train_labels", "test_images", "test_labels"), map(str, paths)))
