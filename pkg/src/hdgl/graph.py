"""Undirected graph in CSR form with multiset k-hop neighborhoods."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from hdgl import seeding

log = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphStore:
    """Symmetric adjacency with sorted, deduplicated neighbor lists."""

    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    self_loops_dropped: int = 0

    @property
    def n_edges(self) -> int:
        return int(self.indices.size // 2)

    def adj(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int | None = None):
        deg = np.diff(self.indptr)
        return deg if v is None else int(deg[v])

    def edges(self) -> np.ndarray:
        """Each undirected edge once as (u, v) with u < v, sorted."""
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adj(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))


def graph_from_edges(n: int, edges) -> GraphStore:
    """Symmetrize, deduplicate and drop self-loops.

    ``edges`` is any iterable of (u, v) pairs or an (m, 2) integer array.
    """
    if n < 0:
        raise GraphError(f"node count must be nonnegative, got {n}")
    arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
    if arr.size == 0:
        arr = np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"edges must be (u, v) pairs, got shape {arr.shape}")
    bad = np.flatnonzero(((arr < 0) | (arr >= n)).any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise GraphError(f"edge {i} ({arr[i, 0]}, {arr[i, 1]}) has a node id outside [0, {n})")
    loops = arr[:, 0] == arr[:, 1]
    n_loops = int(loops.sum())
    if n_loops:
        log.warning("dropped %d self-loop(s)", n_loops)
    arr = arr[~loops]
    both = np.concatenate([arr, arr[:, ::-1]], axis=0)
    both = np.unique(both, axis=0)
    counts = np.bincount(both[:, 0], minlength=n) if both.size else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = both[:, 1].astype(np.int64) if both.size else np.zeros(0, dtype=np.int64)
    return GraphStore(int(n), indptr, indices, n_loops)


def neighbors_k(g: GraphStore, v: int, k: int) -> np.ndarray:
    """Multiset of k-hop neighbors (k in {1, 2}) as an unsorted int array.

    Two hops means every length-2 walk from ``v``; the endpoint is kept with
    its walk multiplicity, including 1-hop nodes reachable in two steps, and
    walks returning to ``v`` are dropped.
    """
    if not 0 <= v < g.n_nodes:
        raise GraphError(f"node {v} outside [0, {g.n_nodes})")
    if k == 1:
        return g.adj(v).copy()
    if k != 2:
        raise ValueError(f"only 1- and 2-hop neighborhoods are supported, got k={k}")
    first = g.adj(v)
    if first.size == 0:
        return np.zeros(0, dtype=np.int64)
    walks = np.concatenate([g.adj(u) for u in first])
    return walks[walks != v]


@dataclass(frozen=True)
class NeighborSample:
    node: int
    hop: int
    members: np.ndarray
    requested: int


def _check_budget(budget: int) -> None:
    if budget < 1 or budget % 2 == 0:
        raise ValueError(f"neighbor budget must be a positive odd integer, got {budget}")


def sample_from(multiset: np.ndarray, budget: int, gen: np.random.Generator) -> np.ndarray:
    if multiset.size <= budget:
        return np.sort(multiset)
    picks = gen.choice(multiset.size, size=budget, replace=False)
    return np.sort(multiset[picks])


def sample_neighbors(g: GraphStore, v: int, k: int, budget: int, seed: int) -> NeighborSample:
    """Uniform draw of ``budget`` multiset positions without replacement.

    Smaller neighborhoods are returned whole. The stream is keyed by
    (seed, v, k), so samples at different nodes are independent of each other
    and of evaluation order.
    """
    _check_budget(budget)
    multiset = neighbors_k(g, v, k)
    gen = seeding.rng(seed, seeding.SAMPLING, v, k)
    return NeighborSample(int(v), int(k), sample_from(multiset, budget, gen), int(budget))
