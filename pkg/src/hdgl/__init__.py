"""One-pass hyperdimensional graph learning for node classification and link prediction."""

from hdgl.hdvec import (
    BundleAccumulator,
    ConstantOne,
    ConstantZero,
    Hypervector,
    PackedHypervectors,
    SeededRandom,
    bind,
    bundle,
    hamming,
    random_hypervector,
    rotate,
)
from hdgl.encoder import Encoder, encode, encode_all, encoder_fit
from hdgl.graph import GraphStore, graph_from_edges, neighbors_k, sample_neighbors
from hdgl.embed import EmbeddingTable, embed_all, embed_node
from hdgl.nodeclass import ClassModel, add_class_members, evaluate_accuracy, fit_classes, predict
from hdgl.linkpred import (
    EdgeMemory,
    PairScores,
    auc_roc,
    average_precision,
    build_edge_memory,
    full_adjacency,
    score_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "BundleAccumulator", "ConstantOne", "ConstantZero", "Hypervector", "PackedHypervectors",
    "SeededRandom", "bind", "bundle", "hamming", "random_hypervector", "rotate",
    "Encoder", "encode", "encode_all", "encoder_fit",
    "GraphStore", "graph_from_edges", "neighbors_k", "sample_neighbors",
    "EmbeddingTable", "embed_all", "embed_node",
    "ClassModel", "add_class_members", "evaluate_accuracy", "fit_classes", "predict",
    "EdgeMemory", "PairScores", "auc_roc", "average_precision", "build_edge_memory",
    "full_adjacency", "score_pairs",
]
