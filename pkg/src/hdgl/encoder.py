"""Random hyperplane sketches of real-valued node features.

Each of ``hd_dim`` hyperplanes has a standard-normal normal vector and an
offset uniform on ``[-offset_half_width, offset_half_width]``. A feature row
maps to one bit per hyperplane: 1 when ``q . x + offset >= 0``, else 0.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp

from hdgl import seeding
from hdgl.hdvec import WORD_BITS, DimensionError, Hypervector, PackedHypervectors, n_words, pack_bits
from hdgl.instrument import COUNTERS

log = logging.getLogger(__name__)

# multiple of WORD_BITS so each block packs into whole words
BLOCK_ROWS = 4096


class NonFiniteFeatureError(ValueError):
    def __init__(self, node: int):
        super().__init__(f"node {node} has a NaN or infinite feature value")
        self.node = node


class Encoder:
    """Seeded projection pair (Q, offsets).

    With ``materialize=False`` the projection matrix is regenerated block by
    block on every call instead of being held in memory; both modes draw the
    same numbers and give identical bits.
    """

    def __init__(self, input_dim: int, hd_dim: int, offset_half_width: float = 0.0,
                 seed: int = 0, materialize: bool = True):
        if input_dim < 1 or hd_dim < 1:
            raise DimensionError(f"invalid encoder dims: d={input_dim}, beta={hd_dim}")
        if not offset_half_width >= 0:
            raise ValueError(f"offset half-width must be >= 0, got {offset_half_width}")
        self.input_dim = int(input_dim)
        self.hd_dim = int(hd_dim)
        self.offset_half_width = float(offset_half_width)
        self.seed = int(seed)
        self.materialize = materialize
        if self.offset_half_width == 0.0:
            self.offsets = np.zeros(self.hd_dim)
        else:
            lam = self.offset_half_width
            self.offsets = seeding.rng(self.seed, seeding.ENCODER, 1).uniform(-lam, lam, self.hd_dim)
        self._projection = None
        if materialize:
            self._projection = np.concatenate([q for _, q in self._generate_blocks()], axis=0)

    @classmethod
    def from_arrays(cls, projection, offsets) -> "Encoder":
        """Encoder with an explicit (hd_dim, d) projection and offsets."""
        q = np.array(projection, dtype=np.float64, ndmin=2)
        off = np.array(offsets, dtype=np.float64).reshape(-1)
        if off.size != q.shape[0]:
            raise DimensionError(f"{q.shape[0]} hyperplanes but {off.size} offsets")
        enc = cls.__new__(cls)
        enc.input_dim, enc.hd_dim = q.shape[1], q.shape[0]
        enc.offset_half_width = float(np.abs(off).max(initial=0.0))
        enc.seed = None
        enc.materialize = True
        enc.offsets = off
        enc._projection = q
        return enc

    def _generate_blocks(self):
        gen = seeding.rng(self.seed, seeding.ENCODER, 0)
        for start in range(0, self.hd_dim, BLOCK_ROWS):
            rows = min(BLOCK_ROWS, self.hd_dim - start)
            yield start, gen.standard_normal((rows, self.input_dim))

    def blocks(self):
        """Yield ``(start_row, Q[start_row:start_row + rows])``."""
        if self._projection is None:
            yield from self._generate_blocks()
            return
        for start in range(0, self.hd_dim, BLOCK_ROWS):
            yield start, self._projection[start:start + BLOCK_ROWS]

    @property
    def projection(self) -> np.ndarray:
        if self._projection is not None:
            return self._projection
        return np.concatenate([q for _, q in self._generate_blocks()], axis=0)

    def __repr__(self):
        return (f"Encoder(d={self.input_dim}, beta={self.hd_dim}, "
                f"lambda={self.offset_half_width}, seed={self.seed})")


def encoder_fit(d: int, beta: int, lam: float = 0.0, seed: int = 0, materialize: bool = True) -> Encoder:
    return Encoder(d, beta, lam, seed, materialize=materialize)


def _check_finite(features) -> None:
    if sp.issparse(features):
        csr = features.tocsr()
        bad = ~np.isfinite(csr.data)
        if bad.any():
            first = int(np.flatnonzero(bad)[0])
            raise NonFiniteFeatureError(int(np.searchsorted(csr.indptr, first, side="right") - 1))
    else:
        bad_rows = ~np.isfinite(features).all(axis=1)
        if bad_rows.any():
            raise NonFiniteFeatureError(int(np.flatnonzero(bad_rows)[0]))


def _as_matrix(features, d: int):
    if sp.issparse(features):
        out = features.tocsr().astype(np.float64)
    else:
        out = np.asarray(features, dtype=np.float64)
        if out.ndim == 1:
            out = out[None, :]
    if out.ndim != 2 or out.shape[1] != d:
        raise DimensionError(f"feature width {out.shape[-1]} does not match encoder input dim {d}")
    return out


def encode_all(enc: Encoder, features) -> PackedHypervectors:
    """Sketch every row of a dense array or scipy sparse matrix."""
    x = _as_matrix(features, enc.input_dim)
    _check_finite(x)
    n = x.shape[0]
    out = np.zeros((n, n_words(enc.hd_dim)), dtype=np.uint64)
    for start, q in enc.blocks():
        proj = x @ q.T
        proj = np.asarray(proj) + enc.offsets[start:start + q.shape[0]]
        w0 = start // WORD_BITS
        packed = pack_bits(proj >= 0)
        out[:, w0:w0 + packed.shape[1]] = packed
    COUNTERS["nodes_encoded"] += n
    return PackedHypervectors(enc.hd_dim, out)


def encode(enc: Encoder, x) -> Hypervector:
    """Sketch a single feature row (same arithmetic path as ``encode_all``)."""
    return encode_all(enc, x)[0]


def normalize_rows(features):
    """L2-normalize feature rows; all-zero rows are left as zeros."""
    if sp.issparse(features):
        csr = features.tocsr().astype(np.float64)
        norms = np.sqrt(np.asarray(csr.multiply(csr).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        return sp.diags(1.0 / norms) @ csr
    arr = np.asarray(features, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return arr / norms
