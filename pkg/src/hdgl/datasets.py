"""Plain-text dataset directories, link splits and synthetic graphs.

A dataset directory holds::

    graph.edges      "u<TAB>v" per line, zero-based ids
    features.dense   CSV, row i = node i            (exactly one of these two)
    features.coo     "node,col,value" per line, implicit zeros
    labels.tsv       "node<TAB>label", labels 0..L-1
    splits.json      {"train": [...], "val": [...], "test": [...]}
    links.json       optional {"train_edges", "val_edges", "val_neg", "test_edges", "test_neg"}

Lines starting with ``#`` are comments, except for two optional headers:
``# shape: N,d`` in features.coo (to pin trailing all-zero rows/columns) and
``# n_labels: L`` in labels.tsv (to declare the label universe).
"""

from __future__ import annotations

import json
import logging
import pickle
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from hdgl import seeding
from hdgl.graph import GraphStore, graph_from_edges
from hdgl.linkpred import sample_non_edges

log = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")
LINK_KEYS = ("train_edges", "val_edges", "val_neg", "test_edges", "test_neg")
_HEADER = re.compile(r"^#\s*(shape|n_labels)\s*:\s*(.+)$")


class DatasetError(ValueError):
    pass


@dataclass
class DatasetBundle:
    graph: GraphStore
    features: np.ndarray | sp.csr_matrix
    labels: np.ndarray  # -1 for unlabeled nodes
    n_labels: int
    splits: dict[str, np.ndarray] = field(default_factory=dict)
    links: dict[str, np.ndarray] | None = None
    name: str = ""

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def labeled(self, *split_names: str) -> list[tuple[int, int]]:
        nodes = np.concatenate([self.splits[s] for s in split_names]) if split_names else np.zeros(0, int)
        return [(int(v), int(self.labels[v])) for v in nodes]

    def summary(self) -> dict:
        out = {
            "name": self.name,
            "n_nodes": self.n_nodes,
            "n_edges": self.graph.n_edges,
            "feature_dim": self.feature_dim,
            "n_labels": self.n_labels,
            "splits": {k: int(len(v)) for k, v in self.splits.items()},
        }
        if self.links is not None:
            out["links"] = {k: int(len(v)) for k, v in self.links.items()}
        return out


# --- reading -----------------------------------------------------------------


def _lines(path: Path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                yield lineno, line


def _parse_ints(path: Path, sep: str | None, width: int):
    rows, headers = [], {}
    for lineno, line in _lines(path):
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m:
                headers[m.group(1)] = m.group(2).strip()
            continue
        parts = line.split(sep)
        try:
            if len(parts) != width:
                raise ValueError
            rows.append([int(p) for p in parts])
        except ValueError:
            raise DatasetError(f"{path.name}:{lineno}: malformed line {line!r}") from None
    return np.array(rows, dtype=np.int64).reshape(-1, width), headers


def _read_coo(path: Path):
    nodes, cols, vals, headers = [], [], [], {}
    for lineno, line in _lines(path):
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m:
                headers[m.group(1)] = m.group(2).strip()
            continue
        parts = line.split(",")
        try:
            if len(parts) != 3:
                raise ValueError
            nodes.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
        except ValueError:
            raise DatasetError(f"{path.name}:{lineno}: malformed line {line!r}") from None
    nodes, cols, vals = np.array(nodes, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals)
    if "shape" in headers:
        try:
            n, d = (int(x) for x in headers["shape"].split(","))
        except ValueError:
            raise DatasetError(f"{path.name}: bad shape header {headers['shape']!r}") from None
    else:
        n = int(nodes.max()) + 1 if nodes.size else 0
        d = int(cols.max()) + 1 if cols.size else 0
    if nodes.size and (nodes.min() < 0 or cols.min() < 0 or nodes.max() >= n or cols.max() >= d):
        raise DatasetError(f"{path.name}: entries fall outside the declared shape ({n}, {d})")
    return sp.csr_matrix((vals, (nodes, cols)), shape=(n, d))


def _read_dense(path: Path) -> np.ndarray:
    rows, width = [], None
    for lineno, line in _lines(path):
        if line.startswith("#"):
            continue
        try:
            row = [float(x) for x in line.split(",")]
        except ValueError:
            raise DatasetError(f"{path.name}:{lineno}: malformed line {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DatasetError(f"{path.name}:{lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    return np.array(rows, dtype=np.float64).reshape(len(rows), width or 0)


def _read_json(path: Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path.name}: invalid JSON ({exc})") from None


def load_dataset(directory) -> DatasetBundle:
    """Read and validate a dataset directory."""
    d = Path(directory)
    if not d.is_dir():
        raise DatasetError(f"{d}: not a directory")
    for name in ("graph.edges", "labels.tsv", "splits.json"):
        if not (d / name).exists():
            raise DatasetError(f"{d}: missing {name}")
    dense, coo = d / "features.dense", d / "features.coo"
    if dense.exists() == coo.exists():
        raise DatasetError(f"{d}: need exactly one of features.dense / features.coo")
    features = _read_dense(dense) if dense.exists() else _read_coo(coo)

    edges, _ = _parse_ints(d / "graph.edges", None, 2)
    label_rows, label_headers = _parse_ints(d / "labels.tsv", None, 2)
    splits_raw = _read_json(d / "splits.json")
    if not isinstance(splits_raw, dict):
        raise DatasetError("splits.json: expected an object")
    splits = {k: np.asarray(splits_raw.get(k, []), dtype=np.int64) for k in SPLIT_NAMES}
    links = None
    if (d / "links.json").exists():
        raw = _read_json(d / "links.json")
        links = {k: np.asarray(raw.get(k, []), dtype=np.int64).reshape(-1, 2) for k in LINK_KEYS}

    n = features.shape[0]
    referenced = [edges.max(initial=-1), label_rows[:, 0].max(initial=-1)]
    referenced += [s.max(initial=-1) for s in splits.values()]
    if links is not None:
        referenced += [v.max(initial=-1) for v in links.values()]
    if max(referenced) >= n:
        raise DatasetError(
            f"features have {n} rows but other files reference node {int(max(referenced))} "
            f"(need {int(max(referenced)) + 1} rows)"
        )
    try:
        graph = graph_from_edges(n, edges)
    except ValueError as exc:
        raise DatasetError(f"graph.edges: {exc}") from None

    if label_rows.size and label_rows[:, 0].min() < 0:
        raise DatasetError("labels.tsv: negative node id")
    if "n_labels" in label_headers:
        n_labels = int(label_headers["n_labels"])
    else:
        n_labels = int(label_rows[:, 1].max()) + 1 if label_rows.size else 0
    bad = (label_rows[:, 1] < 0) | (label_rows[:, 1] >= n_labels)
    if bad.any():
        node, label = label_rows[np.flatnonzero(bad)[0]]
        raise DatasetError(f"labels.tsv: node {node} has label {label} outside 0..{n_labels - 1}")
    labels = np.full(n, -1, dtype=np.int64)
    labels[label_rows[:, 0]] = label_rows[:, 1]

    _validate_splits(splits, labels)
    bundle = DatasetBundle(graph, features, labels, n_labels, splits, links, name=d.name)
    log.info("loaded %s: %s", d, bundle.summary())
    return bundle


def _validate_splits(splits, labels) -> None:
    seen: dict[int, str] = {}
    for name, nodes in splits.items():
        if nodes.size and (nodes.min() < 0 or nodes.max() >= labels.size):
            raise DatasetError(f"splits.json: {name} references a node outside [0, {labels.size})")
        if np.unique(nodes).size != nodes.size:
            raise DatasetError(f"splits.json: {name} lists a node twice")
        for v in nodes.tolist():
            if v in seen:
                raise DatasetError(f"splits.json: node {v} is in both {seen[v]} and {name}")
            seen[v] = name
        unlabeled = nodes[labels[nodes] < 0]
        if unlabeled.size:
            raise DatasetError(f"splits.json: {name} node {int(unlabeled[0])} has no label")


# --- writing -----------------------------------------------------------------


def write_dataset(bundle: DatasetBundle, directory, sparse_features: bool | None = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "graph.edges", "w") as fh:
        for u, v in bundle.graph.edges().tolist():
            fh.write(f"{u}\t{v}\n")
    if sparse_features is None:
        sparse_features = sp.issparse(bundle.features)
    for stale in ("features.dense", "features.coo"):
        (d / stale).unlink(missing_ok=True)
    if sparse_features:
        coo = sp.coo_matrix(bundle.features)
        with open(d / "features.coo", "w") as fh:
            fh.write(f"# shape: {coo.shape[0]},{coo.shape[1]}\n")
            order = np.lexsort((coo.col, coo.row))
            for r, c, x in zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist()):
                fh.write(f"{r},{c},{x!r}\n")
    else:
        dense = bundle.features.toarray() if sp.issparse(bundle.features) else np.asarray(bundle.features)
        with open(d / "features.dense", "w") as fh:
            for row in dense:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    with open(d / "labels.tsv", "w") as fh:
        fh.write(f"# n_labels: {bundle.n_labels}\n")
        for v in np.flatnonzero(bundle.labels >= 0):
            fh.write(f"{v}\t{bundle.labels[v]}\n")
    with open(d / "splits.json", "w") as fh:
        json.dump({k: [int(x) for x in v] for k, v in bundle.splits.items()}, fh)
    if bundle.links is not None:
        with open(d / "links.json", "w") as fh:
            json.dump({k: np.asarray(v).tolist() for k, v in bundle.links.items()}, fh)
    return d


# --- link splits -------------------------------------------------------------


def make_link_splits(graph: GraphStore, seed: int, val_frac: float = 0.05,
                     test_frac: float = 0.10) -> dict[str, np.ndarray]:
    """Hold out edges for validation/test with an equal number of non-edges each."""
    edges = graph.edges()
    gen = seeding.rng(seed, seeding.SPLITS)
    edges = edges[gen.permutation(len(edges))]
    n_test = int(np.floor(test_frac * len(edges)))
    n_val = int(np.floor(val_frac * len(edges)))
    test, val, train = edges[:n_test], edges[n_test:n_test + n_val], edges[n_test + n_val:]
    neg = sample_non_edges(graph.n_nodes, edges, n_val + n_test, seeding.derive_seed(seed, seeding.SPLITS))
    return {
        "train_edges": train,
        "val_edges": val,
        "val_neg": neg[:n_val],
        "test_edges": test,
        "test_neg": neg[n_val:],
    }


# --- synthetic graphs ----------------------------------------------------------


def block_sbm(n: int = 1000, n_blocks: int = 2, p_in: float = 0.05, p_out: float = 0.005,
              feature_dim: int = 16, separation: float = 4.0, seed: int = 0,
              split_fracs=(0.1, 0.1, 0.8)) -> DatasetBundle:
    """Stochastic block model with Gaussian features.

    Block means sit at distance ``separation`` (in units of the unit noise
    standard deviation) from each other: for two blocks they are
    ``+-separation/2`` along a random direction, for more blocks a scaled
    simplex in random orthogonal directions.
    """
    gen = seeding.rng(seed, 0x5B)
    labels = np.arange(n) % n_blocks
    labels = labels[gen.permutation(n)]

    same = labels[:, None] == labels[None, :]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    prob = np.where(same, p_in, p_out)
    draws = gen.random((n, n)) < prob
    u, v = np.nonzero(draws & upper)
    graph = graph_from_edges(n, np.stack([u, v], axis=1))

    if n_blocks > feature_dim:
        raise ValueError("feature_dim must be at least n_blocks")
    basis, _ = np.linalg.qr(gen.standard_normal((feature_dim, n_blocks)))
    # orthogonal unit directions are sqrt(2) apart
    means = basis.T * (separation / np.sqrt(2.0))
    if n_blocks == 2:
        means = np.stack([basis[:, 0], -basis[:, 0]]) * (separation / 2.0)
    features = means[labels] + gen.standard_normal((n, feature_dim))

    order = gen.permutation(n)
    n_train = int(split_fracs[0] * n)
    n_val = int(split_fracs[1] * n)
    n_test = int(split_fracs[2] * n)
    splits = {
        "train": np.sort(order[:n_train]),
        "val": np.sort(order[n_train:n_train + n_val]),
        "test": np.sort(order[n_train + n_val:n_train + n_val + n_test]),
    }
    return DatasetBundle(graph, features, labels.astype(np.int64), n_blocks, splits, None,
                         name=f"sbm{n_blocks}-n{n}")


# --- planetoid conversion ------------------------------------------------------


def convert_planetoid(raw_dir, name: str, out_dir, n_val: int = 500) -> DatasetBundle:
    """Convert the published ``ind.<name>.*`` planetoid files.

    Follows the usual recipe: features are ``allx`` stacked with ``tx``
    reordered to the test indices, the first ``len(y)`` nodes train, the next
    ``n_val`` validate, and ``test.index`` is the test set. Test indices
    missing from the files (isolated citeseer nodes) get zero features and no
    label.
    """
    raw = Path(raw_dir)

    def load(suffix):
        with open(raw / f"ind.{name}.{suffix}", "rb") as fh:
            return pickle.load(fh, encoding="latin1")

    x, y, tx, ty, allx, ally, graph = (load(s) for s in ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_idx = np.loadtxt(raw / f"ind.{name}.test.index", dtype=np.int64).reshape(-1)
    test_sorted = np.sort(test_idx)

    tx = sp.csr_matrix(tx)
    ty = np.asarray(ty)
    full_range = np.arange(test_sorted.min(), test_sorted.max() + 1)
    if full_range.size != test_sorted.size:
        tx_ext = sp.lil_matrix((full_range.size, tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext.tocsr()
        ty_ext = np.zeros((full_range.size, ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack([sp.csr_matrix(allx), tx]).tolil()
    features[test_idx, :] = features[test_sorted, :]
    onehot = np.vstack([np.asarray(ally), ty])
    onehot[test_idx, :] = onehot[test_sorted, :]
    labels = np.where(onehot.sum(axis=1) > 0, onehot.argmax(axis=1), -1).astype(np.int64)

    n = features.shape[0]
    edges = [(int(u), int(v)) for u, nbrs in graph.items() for v in nbrs if int(u) < n and int(v) < n]
    g = graph_from_edges(n, edges)
    n_train = np.asarray(y).shape[0]
    test = test_sorted[labels[test_sorted] >= 0]
    splits = {
        "train": np.arange(n_train),
        "val": np.arange(n_train, n_train + n_val),
        "test": test,
    }
    bundle = DatasetBundle(g, features.tocsr(), labels, onehot.shape[1], splits, None, name=name)
    write_dataset(bundle, out_dir, sparse_features=True)
    return bundle
