"""Latent node hypervectors from 1-hop and 2-hop neighborhoods.

    z_v = r_v XOR rot1(bundle(sampled 1-hop sketches)) XOR rot2(bundle(sampled 2-hop sketches))

An empty neighborhood bundles to the node's own sketch. Bundle ties are
resolved with contexts keyed by (node, hop).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from hdgl.graph import GraphStore, sample_neighbors
from hdgl.hdvec import (
    WORD_BITS,
    DimensionError,
    Hypervector,
    PackedHypervectors,
    TieBreakPolicy,
    majority_from_counts,
    pack_bits,
    rotate_words,
    unpack_bits,
)
from hdgl.instrument import COUNTERS

HOPS = (1, 2)
EMBED_MAGIC = b"HDGLEMB1"


def tie_context(v, hop: int):
    return np.asarray(v, dtype=np.uint64) * np.uint64(4) + np.uint64(hop)


class EmbeddingTable(PackedHypervectors):
    """Node embeddings (one row per node) plus the config that produced them."""

    def __init__(self, dim: int, words: np.ndarray, fingerprint: dict | None = None):
        super().__init__(dim, words)
        self.fingerprint = dict(fingerprint or {})


def _check_budgets(budgets) -> tuple[int, int]:
    if len(budgets) != len(HOPS):
        raise ValueError(f"expected {len(HOPS)} hop budgets, got {budgets}")
    return tuple(int(b) for b in budgets)


def combine(r_words: np.ndarray, hop_bundles, dim: int, rotations: bool = True) -> np.ndarray:
    """Bind a sketch with its hop bundles, the k-th bundle rotated k times."""
    z = np.array(r_words, dtype=np.uint64, copy=True)
    for hop, b in enumerate(hop_bundles, start=1):
        z ^= rotate_words(b, dim, hop) if rotations else np.asarray(b, dtype=np.uint64)
    return z


def embed_node(r: PackedHypervectors, g: GraphStore, v: int, budgets, tie: TieBreakPolicy,
               seed: int, rotations: bool = True) -> Hypervector:
    if len(r) != g.n_nodes:
        raise DimensionError(f"sketch table has {len(r)} rows for a graph of {g.n_nodes} nodes")
    budgets = _check_budgets(budgets)
    bundles = []
    for hop, budget in zip(HOPS, budgets):
        members = sample_neighbors(g, v, hop, budget, seed).members
        if members.size == 0:
            members = np.array([v])
        counts = 2 * r.bits(members).sum(axis=0, dtype=np.int64) - members.size
        bundles.append(pack_bits(majority_from_counts(counts, tie, tie_context(v, hop))))
    return Hypervector(r.dim, combine(r.words[v], bundles, r.dim, rotations))


def sample_matrix(g: GraphStore, hop: int, budget: int, seed: int) -> sp.csr_matrix:
    """(N, N) matrix whose row v counts each sampled member of v's hop bundle."""
    rows, cols = [], []
    for v in range(g.n_nodes):
        members = sample_neighbors(g, v, hop, budget, seed).members
        if members.size == 0:
            members = np.array([v])
        rows.append(np.full(members.size, v))
        cols.append(members)
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    m = sp.coo_matrix((np.ones(rows.size, dtype=np.float32), (rows, cols)), shape=(g.n_nodes, g.n_nodes))
    return m.tocsr()


def _chunk_bits(n_rows: int, target_cells: int = 1 << 24) -> int:
    return max(WORD_BITS, (target_cells // max(n_rows, 1)) // WORD_BITS * WORD_BITS)


def bundle_rows(r: PackedHypervectors, samples: sp.csr_matrix, tie: TieBreakPolicy, contexts) -> np.ndarray:
    """Majority bundle per row of ``samples`` over the sketches it selects."""
    n = samples.shape[0]
    sizes = np.asarray(samples.sum(axis=1)).ravel()
    out = np.zeros((n, r.words.shape[1]), dtype=np.uint64)
    step = _chunk_bits(max(n, len(r)))
    for c0 in range(0, r.dim, step):
        c1 = min(c0 + step, r.dim)
        w0, w1 = c0 // WORD_BITS, (c1 + WORD_BITS - 1) // WORD_BITS
        block = unpack_bits(r.words[:, w0:w1], c1 - c0).astype(np.float32)
        ones = np.asarray(samples @ block)
        counts = (2 * ones - sizes[:, None]).astype(np.int64)
        bits = _majority_offset(counts, tie, contexts, c0)
        out[:, w0:w1] = pack_bits(bits)
    return out


def _majority_offset(counts, tie, contexts, offset):
    bits = (counts > 0).astype(np.uint8)
    ti, tj = np.nonzero(counts == 0)
    if ti.size:
        bits[ti, tj] = tie.tie_bits(np.asarray(contexts, dtype=np.uint64)[ti], tj + offset)
    return bits


def embed_all(r: PackedHypervectors, g: GraphStore, budgets, tie: TieBreakPolicy, seed: int,
              rotations: bool = True) -> EmbeddingTable:
    """Embed every node; row v equals ``embed_node(..., v, ...)`` bit for bit."""
    if len(r) != g.n_nodes:
        raise DimensionError(f"sketch table has {len(r)} rows for a graph of {g.n_nodes} nodes")
    budgets = _check_budgets(budgets)
    nodes = np.arange(g.n_nodes)
    z = r.words.copy()
    for hop, budget in zip(HOPS, budgets):
        bundled = bundle_rows(r, sample_matrix(g, hop, budget, seed), tie, tie_context(nodes, hop))
        if rotations:
            bundled = _rotate_table(bundled, r.dim, hop)
        z ^= bundled
    COUNTERS["nodes_embedded"] += g.n_nodes
    fingerprint = {"dim": r.dim, "budgets": list(budgets), "seed": int(seed), "tie": repr(tie),
                   "rotations": rotations}
    return EmbeddingTable(r.dim, z, fingerprint)


def _rotate_table(words: np.ndarray, dim: int, k: int, rows_per_chunk: int = 2048) -> np.ndarray:
    out = np.empty_like(words)
    for i in range(0, words.shape[0], rows_per_chunk):
        out[i:i + rows_per_chunk] = rotate_words(words[i:i + rows_per_chunk], dim, k)
    return out


# --- packed dump -------------------------------------------------------------


def dump_embeddings(table: PackedHypervectors, path) -> None:
    """8-byte magic, dim and N as little-endian uint64, then N rows of ceil(dim/8) bytes.

    Bit i of a row is bit (i % 8) of byte i // 8 (little-endian bit order).
    """
    n_bytes = (table.dim + 7) // 8
    rows = table.words.astype("<u8").view(np.uint8)[:, :n_bytes]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(EMBED_MAGIC)
        fh.write(struct.pack("<QQ", table.dim, len(table)))
        fh.write(np.ascontiguousarray(rows).tobytes())
    tmp.replace(path)


def load_embeddings(path) -> PackedHypervectors:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != EMBED_MAGIC:
            raise ValueError(f"{path}: not an embedding dump (magic {magic!r})")
        dim, n = struct.unpack("<QQ", fh.read(16))
        n_bytes = (dim + 7) // 8
        raw = np.frombuffer(fh.read(n * n_bytes), dtype=np.uint8)
    if raw.size != n * n_bytes:
        raise ValueError(f"{path}: truncated, expected {n} rows of {n_bytes} bytes")
    bits = np.unpackbits(raw.reshape(n, n_bytes), axis=1, count=dim, bitorder="little")
    return PackedHypervectors(dim, pack_bits(bits))
