"""Link scoring with positive/negative edge-memory hypervectors.

``e_plus`` bundles ``z_u XOR z_v`` over known edges and ``e_minus`` over sampled
non-edges. A candidate pair is scored by how close ``z_u XOR e`` lands to
``z_v`` for each memory, then squashed by a piecewise sigmoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from hdgl import seeding
from hdgl.hdvec import (
    BundleAccumulator,
    DimensionError,
    Hypervector,
    PackedHypervectors,
    TieBreakPolicy,
    unpack_bits,
)

POS_CONTEXT = 1
NEG_CONTEXT = 2
_PAIRS_PER_BLOCK = 4096


class AdjacencyTooLarge(MemoryError):
    pass


@dataclass(frozen=True)
class EdgeMemory:
    dim: int
    e_plus: Hypervector
    e_minus: Hypervector
    pos_count: int
    neg_count: int
    neg_seed: int | None = None


@dataclass(frozen=True)
class PairScores:
    pairs: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    a_hat: np.ndarray


def _as_pairs(pairs, n: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise IndexError(f"pair references a node outside [0, {n})")
    return arr


def bind_pairs_accumulate(Z: PackedHypervectors, pairs: np.ndarray) -> BundleAccumulator:
    acc = BundleAccumulator(Z.dim)
    for i in range(0, len(pairs), _PAIRS_PER_BLOCK):
        block = pairs[i:i + _PAIRS_PER_BLOCK]
        acc.add_bits(unpack_bits(Z.words[block[:, 0]] ^ Z.words[block[:, 1]], Z.dim))
    return acc


def build_edge_memory(Z: PackedHypervectors, pos_edges, neg_edges, tie: TieBreakPolicy,
                      neg_seed: int | None = None) -> EdgeMemory:
    pos = _as_pairs(pos_edges, len(Z))
    neg = _as_pairs(neg_edges, len(Z))
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("edge memory needs at least one positive and one negative pair")
    e_plus = bind_pairs_accumulate(Z, pos).majority(tie.with_context(POS_CONTEXT))
    e_minus = bind_pairs_accumulate(Z, neg).majority(tie.with_context(NEG_CONTEXT))
    return EdgeMemory(Z.dim, e_plus, e_minus, len(pos), len(neg), neg_seed)


def sample_non_edges(n_nodes: int, edges, count: int, seed: int) -> np.ndarray:
    """Uniform distinct unordered pairs (u < v) that are not in ``edges``."""
    max_pairs = n_nodes * (n_nodes - 1) // 2
    known = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in np.asarray(edges).reshape(-1, 2)}
    if count > max_pairs - len(known):
        raise ValueError(f"cannot sample {count} non-edges from {max_pairs - len(known)} available")
    gen = seeding.rng(seed, seeding.NEGATIVES)
    chosen: dict[tuple[int, int], None] = {}
    while len(chosen) < count:
        need = count - len(chosen)
        u = gen.integers(0, n_nodes, size=2 * need + 16)
        v = gen.integers(0, n_nodes, size=2 * need + 16)
        for a, b in zip(u.tolist(), v.tolist()):
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            if key in known or key in chosen:
                continue
            chosen[key] = None
            if len(chosen) == count:
                break
    return np.array(list(chosen), dtype=np.int64).reshape(-1, 2)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def adjacency_rule(d_plus, d_minus):
    """sigmoid((1 - d+) + d-) where d+ < d-, else sigmoid(d+ - (1 - d-))."""
    d_plus = np.asarray(d_plus, dtype=np.float64)
    d_minus = np.asarray(d_minus, dtype=np.float64)
    return np.where(d_plus < d_minus, _sigmoid((1.0 - d_plus) + d_minus), _sigmoid(d_plus - (1.0 - d_minus)))


def _memory_distance(Z: PackedHypervectors, e: Hypervector, pairs: np.ndarray) -> np.ndarray:
    # d(u -> v) = |z_u ^ e ^ z_v| / dim, which is already symmetric in (u, v)
    out = np.empty(len(pairs), dtype=np.float64)
    for i in range(0, len(pairs), _PAIRS_PER_BLOCK):
        block = pairs[i:i + _PAIRS_PER_BLOCK]
        x = Z.words[block[:, 0]] ^ e.words ^ Z.words[block[:, 1]]
        out[i:i + _PAIRS_PER_BLOCK] = np.bitwise_count(x).sum(axis=1, dtype=np.int64) / Z.dim
    return out


def score_pairs(Z: PackedHypervectors, em: EdgeMemory, pairs) -> PairScores:
    if Z.dim != em.dim:
        raise DimensionError(f"dimension mismatch: embeddings {Z.dim} vs memory {em.dim}")
    pairs = _as_pairs(pairs, len(Z))
    d_plus = _memory_distance(Z, em.e_plus, pairs)
    d_minus = _memory_distance(Z, em.e_minus, pairs)
    return PairScores(pairs, d_plus, d_minus, adjacency_rule(d_plus, d_minus))


def full_adjacency(Z: PackedHypervectors, em: EdgeMemory, max_entries: int = 25_000_000) -> np.ndarray:
    """Dense N x N matrix of scores; refuses when N*N exceeds ``max_entries``."""
    n = len(Z)
    if n * n > max_entries:
        raise AdjacencyTooLarge(
            f"{n}x{n} adjacency needs {n * n} entries (~{n * n * 8 / 2**20:.0f} MiB), "
            f"limit is {max_entries}"
        )
    if Z.dim != em.dim:
        raise DimensionError(f"dimension mismatch: embeddings {Z.dim} vs memory {em.dim}")
    out = np.empty((n, n), dtype=np.float64)
    rows_per_block = max(1, _PAIRS_PER_BLOCK // max(n, 1))
    for i in range(0, n, rows_per_block):
        zi = Z.words[i:i + rows_per_block, None, :]
        dp = np.bitwise_count(zi ^ em.e_plus.words ^ Z.words[None]).sum(axis=-1, dtype=np.int64) / Z.dim
        dm = np.bitwise_count(zi ^ em.e_minus.words ^ Z.words[None]).sum(axis=-1, dtype=np.int64) / Z.dim
        out[i:i + rows_per_block] = adjacency_rule(dp, dm)
    return out


# --- ranking metrics ---------------------------------------------------------


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and the same length")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise ValueError("both positive and negative labels are required")
    return scores, labels


def auc_roc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counting one half."""
    scores, labels = _check_binary(scores, labels)
    ranks = rankdata(scores)
    n_pos = labels.sum()
    n_neg = labels.size - n_pos
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Step-wise area under precision-recall, thresholds at distinct scores."""
    scores, labels = _check_binary(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], labels[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[last_of_group]
    precision = tp / (last_of_group + 1)
    recall_gain = np.diff(np.r_[0, tp]) / y.sum()
    return float(np.sum(recall_gain * precision))
