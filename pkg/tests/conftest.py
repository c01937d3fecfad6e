import csv

import numpy as np
import pytest

from smoothgof.harness import catalog
from smoothgof.numeric import RngSeed


def _write_csv(path, header, matrix):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows([[repr(float(v)) for v in row] for row in matrix])
    return str(path)


@pytest.fixture(scope="session")
def example1_fixture_csv(tmp_path_factory):
    """Pinned-seed draw from the energy-region truth, in data-file form."""
    x = catalog("example1-truth").sample(5000, RngSeed(424242))
    path = tmp_path_factory.mktemp("fixtures") / "example1.csv"
    return _write_csv(path, ["x1", "x2"], x)


@pytest.fixture(scope="session")
def example2_fixture_csv(tmp_path_factory):
    """Pinned-seed draw from the 7-d truth, columns in natural name order."""
    model = catalog("example2-truth")
    x = model.sample(5000, RngSeed(515151))
    order = sorted(range(7), key=lambda d: model.names[d])
    path = tmp_path_factory.mktemp("fixtures") / "example2.csv"
    return _write_csv(path, [model.names[d] for d in order], x[:, order])
