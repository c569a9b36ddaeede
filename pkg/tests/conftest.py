import io

import numpy as np
import pytest

from geoas.asgraph import AsGraph
from geoas.embedding import Embedding


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def chain3():
    """Three ASes in a line, five locations, one inter gap per G edge."""
    g = AsGraph(3, [(0, 1), (1, 2)])
    e = Embedding(
        owners=[0, 0, 1, 1, 2],
        lats=[0.0, 0.0, 1.0, 0.0, 0.0],
        lons=[0.0, 3.5, 0.0, 4.0, 4.2],
    )
    return g, e


def roundtrip(save, load, *objs):
    """Write with save(*objs, stream), read back with load(stream)."""
    buf = io.StringIO()
    save(*objs, buf)
    buf.seek(0)
    return load(buf)
