"""Binary hypervectors packed into 64-bit words.

Bit ``i`` of a vector lives in word ``i // 64`` at position ``i % 64``
(little-endian). Bits at positions ``>= dim`` are padding and are kept zero
by every operation, so XOR/popcount can run over whole words.

Text form (``Hypervector.from_string`` / ``str``) lists bit 0 first.
``rotate`` shifts toward lower indices, i.e. to the left in the text form:
``rotate("00011", 1) == "00110"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from hdgl import seeding

WORD_BITS = 64


class DimensionError(ValueError):
    """Invalid or mismatched hypervector dimension."""


class EmptyBundleError(ValueError):
    """Majority requested over zero vectors."""


def n_words(dim: int) -> int:
    return (dim + WORD_BITS - 1) // WORD_BITS


def _check_dim(dim: int) -> int:
    if int(dim) < 1:
        raise DimensionError(f"hypervector dimension must be >= 1, got {dim}")
    return int(dim)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., dim) array of 0/1 values into (..., n_words) uint64."""
    bits = np.asarray(bits)
    dim = bits.shape[-1]
    packed = np.packbits(bits.astype(np.uint8, copy=False), axis=-1, bitorder="little")
    pad = n_words(dim) * 8 - packed.shape[-1]
    if pad:
        widths = [(0, 0)] * (packed.ndim - 1) + [(0, pad)]
        packed = np.pad(packed, widths)
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns uint8 of shape (..., dim)."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    as_bytes = words.astype("<u8", copy=False).view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, count=dim, bitorder="little")


def pad_mask(dim: int) -> np.ndarray:
    """Word mask with ones on logical bits only."""
    mask = np.full(n_words(dim), np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    tail = dim % WORD_BITS
    if tail:
        mask[-1] = np.uint64((1 << tail) - 1)
    return mask


@dataclass(frozen=True, eq=False)
class Hypervector:
    """A ``dim``-bit binary vector."""

    dim: int
    words: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dim(self.dim)
        words = np.ascontiguousarray(self.words, dtype=np.uint64)
        if words.shape != (n_words(self.dim),):
            raise DimensionError(
                f"expected {n_words(self.dim)} words for dim {self.dim}, got shape {words.shape}"
            )
        if np.any(words & ~pad_mask(self.dim)):
            raise ValueError("pad bits beyond dim must be zero")
        words.setflags(write=False)
        object.__setattr__(self, "words", words)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Hypervector":
        arr = np.fromiter((int(b) for b in bits), dtype=np.uint8)
        if np.any(arr > 1):
            raise ValueError("bits must be 0 or 1")
        return cls(_check_dim(arr.size), pack_bits(arr))

    @classmethod
    def from_string(cls, text: str) -> "Hypervector":
        return cls.from_bits(int(c) for c in text)

    @classmethod
    def zeros(cls, dim: int) -> "Hypervector":
        return cls(_check_dim(dim), np.zeros(n_words(dim), dtype=np.uint64))

    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.dim)

    def bipolar(self) -> np.ndarray:
        """View in {-1, +1}: bit 1 -> +1, bit 0 -> -1."""
        return self.bits().astype(np.int8) * 2 - 1

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __eq__(self, other):
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.dim, self.words.tobytes()))

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits())

    def __xor__(self, other: "Hypervector") -> "Hypervector":
        return bind(self, other)


def _same_dim(a: Hypervector, b: Hypervector) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def random_hypervector(dim: int, seed: int) -> Hypervector:
    """I.i.d. Bernoulli(0.5) bits drawn from a stream keyed by ``seed``."""
    dim = _check_dim(dim)
    words = seeding.rng(seed).integers(0, 2**64, size=n_words(dim), dtype=np.uint64, endpoint=False)
    return Hypervector(dim, words & pad_mask(dim))


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    _same_dim(a, b)
    return Hypervector(a.dim, a.words ^ b.words)


def rotate(a: Hypervector, k: int) -> Hypervector:
    """Circular left shift by ``k`` over the ``dim`` logical bits."""
    return Hypervector(a.dim, rotate_words(a.words, a.dim, k))


def rotate_words(words: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Rotate packed rows of shape (..., n_words) by ``k`` logical bits."""
    shift = int(k) % dim
    if shift == 0:
        return np.array(words, dtype=np.uint64, copy=True)
    return pack_bits(np.roll(unpack_bits(words, dim), -shift, axis=-1))


def hamming(a: Hypervector, b: Hypervector) -> float:
    """Normalized Hamming distance in [0, 1]."""
    _same_dim(a, b)
    return int(np.bitwise_count(a.words ^ b.words).sum()) / a.dim


def hamming_words(a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    """Broadcast normalized Hamming distance between packed rows."""
    return np.bitwise_count(np.bitwise_xor(a, b)).sum(axis=-1, dtype=np.int64) / dim


# --- tie breaking ----------------------------------------------------------


@dataclass(frozen=True)
class SeededRandom:
    """Ties resolved by a pseudorandom bit keyed (seed, context, dimension)."""

    seed: int
    context: int = 0

    def with_context(self, context: int) -> "SeededRandom":
        return SeededRandom(self.seed, int(context))

    def tie_bits(self, contexts, positions) -> np.ndarray:
        return seeding.keyed_bits(self.seed, contexts, positions)


@dataclass(frozen=True)
class ConstantZero:
    def with_context(self, context: int) -> "ConstantZero":
        return self

    def tie_bits(self, contexts, positions) -> np.ndarray:
        return np.zeros(np.broadcast(np.asarray(contexts), np.asarray(positions)).shape, dtype=np.uint8)


@dataclass(frozen=True)
class ConstantOne:
    def with_context(self, context: int) -> "ConstantOne":
        return self

    def tie_bits(self, contexts, positions) -> np.ndarray:
        return np.ones(np.broadcast(np.asarray(contexts), np.asarray(positions)).shape, dtype=np.uint8)


TieBreakPolicy = SeededRandom | ConstantZero | ConstantOne


def majority_from_counts(counts: np.ndarray, tie: TieBreakPolicy, contexts=None) -> np.ndarray:
    """Resolve signed counters to bits.

    ``counts`` has shape (..., dim). ``contexts`` broadcasts against
    ``counts[..., 0]`` and selects the tie stream per row; it defaults to the
    policy's own context.
    """
    counts = np.asarray(counts)
    bits = (counts > 0).astype(np.uint8)
    tie_idx = np.nonzero(counts == 0)
    if tie_idx[0].size:
        if contexts is None:
            contexts = getattr(tie, "context", 0)
        ctx = np.broadcast_to(np.asarray(contexts, dtype=np.uint64), counts.shape[:-1])
        row_ctx = ctx[tie_idx[:-1]] if counts.ndim > 1 else ctx
        bits[tie_idx] = tie.tie_bits(row_ctx, tie_idx[-1])
    return bits


# --- bundling --------------------------------------------------------------


class BundleAccumulator:
    """Signed per-dimension counters: bit 1 adds +1, bit 0 adds -1.

    Majority over the counters is the bitwise-majority bundle of every vector
    added so far, independent of insertion order. Accumulators can be merged
    by summing counts.
    """

    def __init__(self, dim: int):
        self.dim = _check_dim(dim)
        self.counts = np.zeros(self.dim, dtype=np.int64)
        self.items_added = 0

    def _signed(self, v: Hypervector) -> np.ndarray:
        if v.dim != self.dim:
            raise DimensionError(f"dimension mismatch: accumulator {self.dim} vs vector {v.dim}")
        return v.bits().astype(np.int64) * 2 - 1

    def add(self, v: Hypervector) -> "BundleAccumulator":
        self.counts += self._signed(v)
        self.items_added += 1
        return self

    def remove(self, v: Hypervector) -> "BundleAccumulator":
        if self.items_added == 0:
            raise EmptyBundleError("cannot remove from an empty accumulator")
        self.counts -= self._signed(v)
        self.items_added -= 1
        return self

    def add_bits(self, bits: np.ndarray) -> "BundleAccumulator":
        """Add a (n, dim) block of unpacked 0/1 rows at once."""
        bits = np.asarray(bits)
        if bits.ndim == 1:
            bits = bits[None, :]
        if bits.shape[-1] != self.dim:
            raise DimensionError(f"dimension mismatch: accumulator {self.dim} vs rows {bits.shape[-1]}")
        ones = bits.sum(axis=0, dtype=np.int64)
        self.counts += 2 * ones - bits.shape[0]
        self.items_added += bits.shape[0]
        return self

    def merge(self, other: "BundleAccumulator") -> "BundleAccumulator":
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        self.counts += other.counts
        self.items_added += other.items_added
        return self

    def copy(self) -> "BundleAccumulator":
        out = BundleAccumulator(self.dim)
        out.counts = self.counts.copy()
        out.items_added = self.items_added
        return out

    def majority(self, tie: TieBreakPolicy) -> Hypervector:
        if self.items_added < 1:
            raise EmptyBundleError("majority of an empty accumulator is undefined")
        return Hypervector(self.dim, pack_bits(majority_from_counts(self.counts, tie)))

    def __eq__(self, other):
        if not isinstance(other, BundleAccumulator):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.items_added == other.items_added
            and bool(np.array_equal(self.counts, other.counts))
        )

    def __repr__(self):
        return f"BundleAccumulator(dim={self.dim}, items_added={self.items_added})"


def bundle(vs: Sequence[Hypervector], tie: TieBreakPolicy) -> Hypervector:
    """Bitwise majority of a nonempty sequence of hypervectors."""
    if len(vs) == 0:
        raise EmptyBundleError("cannot bundle an empty list")
    acc = BundleAccumulator(vs[0].dim)
    for v in vs:
        acc.add(v)
    return acc.majority(tie)


# --- packed tables ---------------------------------------------------------


class PackedHypervectors(Sequence[Hypervector]):
    """A table of equal-dimension hypervectors stored as (n, n_words) uint64."""

    def __init__(self, dim: int, words: np.ndarray):
        self.dim = _check_dim(dim)
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != n_words(self.dim):
            raise DimensionError(f"expected (n, {n_words(self.dim)}) words, got {words.shape}")
        self.words = words

    @classmethod
    def from_vectors(cls, vs: Sequence[Hypervector]) -> "PackedHypervectors":
        if not vs:
            raise ValueError("need at least one vector")
        dim = vs[0].dim
        for v in vs:
            if v.dim != dim:
                raise DimensionError(f"dimension mismatch: {dim} vs {v.dim}")
        return cls(dim, np.stack([v.words for v in vs]))

    def __len__(self) -> int:
        return self.words.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return Hypervector(self.dim, self.words[i])

    def __iter__(self) -> Iterator[Hypervector]:
        for i in range(len(self)):
            yield self[i]

    def bits(self, rows=None) -> np.ndarray:
        words = self.words if rows is None else self.words[rows]
        return unpack_bits(words, self.dim)

    def __eq__(self, other):
        if not isinstance(other, PackedHypervectors):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.words, other.words))
