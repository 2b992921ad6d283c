"""Nearest-class-hypervector node classification.

Each class keeps its bundle accumulator, so adding members later yields the
same class vector as bundling everything at once.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from hdgl.hdvec import (
    BundleAccumulator,
    ConstantOne,
    ConstantZero,
    DimensionError,
    Hypervector,
    PackedHypervectors,
    SeededRandom,
    TieBreakPolicy,
    hamming_words,
)
from hdgl.instrument import COUNTERS

_ROWS_PER_BLOCK = 1024


class EmptyClassError(ValueError):
    pass


@dataclass
class ClassState:
    accumulator: BundleAccumulator
    vector: Hypervector

    @property
    def member_count(self) -> int:
        return self.accumulator.items_added


class ClassModel:
    def __init__(self, dim: int, tie: TieBreakPolicy):
        self.dim = dim
        self.tie = tie
        self.classes: dict[int, ClassState] = {}

    @property
    def labels(self) -> list[int]:
        return sorted(self.classes)

    def vector(self, label: int) -> Hypervector:
        return self.classes[label].vector

    def class_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        labels = np.array(self.labels, dtype=np.int64)
        return labels, np.stack([self.classes[int(l)].vector.words for l in labels])

    def copy(self) -> "ClassModel":
        out = ClassModel(self.dim, self.tie)
        out.classes = {l: ClassState(s.accumulator.copy(), s.vector) for l, s in self.classes.items()}
        return out

    def _add(self, Z: PackedHypervectors, labeled: Iterable[tuple[int, int]]) -> set[int]:
        groups: dict[int, list[int]] = defaultdict(list)
        for node, label in labeled:
            if not 0 <= int(node) < len(Z):
                raise IndexError(f"unknown node {node} (table has {len(Z)} rows)")
            groups[int(label)].append(int(node))
        for label, nodes in groups.items():
            state = self.classes.get(label)
            acc = state.accumulator if state else BundleAccumulator(self.dim)
            for i in range(0, len(nodes), _ROWS_PER_BLOCK):
                acc.add_bits(Z.bits(np.asarray(nodes[i:i + _ROWS_PER_BLOCK])))
            self.classes[label] = ClassState(acc, acc.majority(self.tie.with_context(label)))
            COUNTERS["class_members_bundled"] += len(nodes)
        return set(groups)

    def __eq__(self, other):
        if not isinstance(other, ClassModel):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.tie == other.tie
            and self.labels == other.labels
            and all(
                self.classes[l].accumulator == other.classes[l].accumulator
                and self.classes[l].vector == other.classes[l].vector
                for l in self.labels
            )
        )

    def __repr__(self):
        sizes = {l: s.member_count for l, s in sorted(self.classes.items())}
        return f"ClassModel(dim={self.dim}, classes={sizes})"


def fit_classes(Z: PackedHypervectors, labeled, tie: TieBreakPolicy,
                declared_labels: Iterable[int] | None = None) -> ClassModel:
    """Bundle member embeddings per class.

    ``labeled`` is a sequence of (node, label). Every label in
    ``declared_labels`` must receive at least one member.
    """
    model = ClassModel(Z.dim, tie)
    labeled = list(labeled)
    if declared_labels is not None:
        present = {int(l) for _, l in labeled}
        for label in declared_labels:
            if int(label) not in present:
                raise EmptyClassError(f"class {label} has no labeled members")
    if not labeled:
        raise EmptyClassError("no labeled nodes to build classes from")
    model._add(Z, labeled)
    return model


def add_class_members(model: ClassModel, Z: PackedHypervectors, new_labeled) -> ClassModel:
    """Return a copy with new members folded in; untouched classes are shared unchanged."""
    if Z.dim != model.dim:
        raise DimensionError(f"dimension mismatch: model {model.dim} vs table {Z.dim}")
    out = model.copy()
    out._add(Z, list(new_labeled))
    return out


def distances(model: ClassModel, z_words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels (ascending) and a (..., L) matrix of normalized Hamming distances."""
    if not model.classes:
        raise EmptyClassError("model has no classes")
    labels, C = model.class_matrix()
    z_words = np.asarray(z_words, dtype=np.uint64)
    if z_words.shape[-1] != C.shape[1]:
        raise DimensionError("embedding width does not match the class vectors")
    return labels, hamming_words(z_words[..., None, :], C, model.dim)


def predict(model: ClassModel, z: Hypervector) -> tuple[int, dict[int, float]]:
    """Nearest class; ties go to the smallest label."""
    if z.dim != model.dim:
        raise DimensionError(f"dimension mismatch: model {model.dim} vs vector {z.dim}")
    labels, d = distances(model, z.words)
    return int(labels[int(np.argmin(d))]), {int(l): float(x) for l, x in zip(labels, d)}


def predict_nodes(model: ClassModel, Z: PackedHypervectors, nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=np.int64)
    out = np.empty(nodes.size, dtype=np.int64)
    for i in range(0, nodes.size, _ROWS_PER_BLOCK):
        labels, d = distances(model, Z.words[nodes[i:i + _ROWS_PER_BLOCK]])
        out[i:i + _ROWS_PER_BLOCK] = labels[np.argmin(d, axis=1)]
    return out


def evaluate_accuracy(model: ClassModel, Z: PackedHypervectors, test) -> float:
    test = list(test)
    if not test:
        raise ValueError("empty test set")
    nodes = np.array([n for n, _ in test], dtype=np.int64)
    truth = np.array([l for _, l in test], dtype=np.int64)
    return float(np.mean(predict_nodes(model, Z, nodes) == truth))


# --- persistence -------------------------------------------------------------

_TIE_KINDS = {"seeded": SeededRandom, "zero": ConstantZero, "one": ConstantOne}


def save_model(model: ClassModel, path) -> None:
    """Header (dim, L, tie policy) plus per-class label, member count and counters."""
    labels = model.labels
    kind = {SeededRandom: "seeded", ConstantZero: "zero", ConstantOne: "one"}[type(model.tie)]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp.npz")
    np.savez(
        tmp,
        format=np.array("hdgl-classmodel/1"),
        dim=np.int64(model.dim),
        n_classes=np.int64(len(labels)),
        tie_kind=np.array(kind),
        tie_seed=np.uint64(getattr(model.tie, "seed", 0)),
        labels=np.array(labels, dtype=np.int64),
        member_counts=np.array([model.classes[l].member_count for l in labels], dtype=np.int64),
        counts=np.stack([model.classes[l].accumulator.counts for l in labels])
        if labels else np.zeros((0, model.dim), dtype=np.int64),
    )
    tmp.replace(path)


def load_model(path) -> ClassModel:
    with np.load(path) as f:
        if str(f["format"]) != "hdgl-classmodel/1":
            raise ValueError(f"{path}: unsupported model format {f['format']}")
        kind = str(f["tie_kind"])
        tie = SeededRandom(int(f["tie_seed"])) if kind == "seeded" else _TIE_KINDS[kind]()
        model = ClassModel(int(f["dim"]), tie)
        for label, members, counts in zip(f["labels"], f["member_counts"], f["counts"]):
            acc = BundleAccumulator(model.dim)
            acc.counts = counts.astype(np.int64)
            acc.items_added = int(members)
            model.classes[int(label)] = ClassState(acc, acc.majority(tie.with_context(int(label))))
    return model
