import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hdgl.graph import graph_from_edges  # noqa: E402


def random_edges(rng, n, p):
    u, v = np.triu_indices(n, k=1)
    keep = rng.random(u.size) < p
    return np.stack([u[keep], v[keep]], axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_graph(rng):
    edges = random_edges(rng, 30, 0.15)
    return graph_from_edges(30, edges), edges


@pytest.fixture
def tiny_dataset(tmp_path):
    """The minimal 3-node fixture: a path 0-1-2 with 2-d features."""
    d = tmp_path / "tiny"
    d.mkdir()
    (d / "graph.edges").write_text("0\t1\n1\t2\n")
    (d / "features.dense").write_text("1.0,0.0\n0.5,0.5\n0.0,1.0\n")
    (d / "labels.tsv").write_text("0\t0\n1\t0\n2\t1\n")
    (d / "splits.json").write_text('{"train": [0, 2], "val": [], "test": [1]}')
    return d
