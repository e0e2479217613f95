import numpy as np
import pytest

from fastkcde.dataset import RawDataset, standardize
from fastkcde.spatial import build


def make_blobs(n, d, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-3, 3, size=(4, d))
    labels = rng.integers(0, 4, size=n)
    x = centers[labels] + 0.7 * rng.standard_normal((n, d))
    y = np.sin(x[:, 0]) + 0.3 * rng.standard_normal(n)
    return RawDataset(x, y)


@pytest.fixture
def small_data():
    return standardize(make_blobs(60, 2, seed=1))


@pytest.fixture
def small_tree(small_data):
    return build(small_data, leaf_size=4)


@pytest.fixture
def medium_data():
    return standardize(make_blobs(300, 1, seed=2))


@pytest.fixture
def medium_tree(medium_data):
    return build(medium_data, leaf_size=16)


@pytest.fixture
def csv_file(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 10, size=100)
    y = np.sin(x) + 0.2 * rng.standard_normal(100)
    path = tmp_path / "train.csv"
    with open(path, "w") as f:
        f.write("x,y\n")
        for xi, yi in zip(x, y):
            f.write(f"{float(xi)!r},{float(yi)!r}\n")
    return str(path)
