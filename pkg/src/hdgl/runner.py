"""Experiment orchestration: node classification, link prediction, class-incremental."""

from __future__ import annotations

import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from hdgl import seeding
from hdgl.datasets import DatasetBundle, make_link_splits
from hdgl.embed import EmbeddingTable, embed_all
from hdgl.encoder import encode_all, encoder_fit, normalize_rows
from hdgl.graph import GraphStore, graph_from_edges
from hdgl.hdvec import SeededRandom
from hdgl.instrument import counting
from hdgl.linkpred import (
    PairScores,
    auc_roc,
    average_precision,
    build_edge_memory,
    sample_non_edges,
    score_pairs,
)
from hdgl.nodeclass import add_class_members, evaluate_accuracy, fit_classes

log = logging.getLogger(__name__)

REPORT_FORMAT = "hdgl-report/1"


@dataclass
class RunConfig:
    dim: int = 20000
    offset_half_width: float = 0.0
    seed: int = 0
    hop1: int = 11
    hop2: int = 21
    task: str = "nodeclass"
    repeats: int = 1
    normalize_features: bool = False
    dim_sweep: list[int] = field(default_factory=list)
    out: str | None = None

    def __post_init__(self):
        for name in ("hop1", "hop2"):
            b = getattr(self, name)
            if b < 1 or b % 2 == 0:
                raise ValueError(f"{name} budget must be a positive odd integer, got {b}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    @property
    def budgets(self) -> tuple[int, int]:
        return (self.hop1, self.hop2)


@dataclass
class RepeatSeeds:
    """All streams used by one repeat, derived from hash(base seed, repeat index)."""

    repeat_seed: int
    encoder: int
    sampling: int
    ties: int
    negatives: int
    splits: int

    @classmethod
    def derive(cls, base_seed: int, repeat: int) -> "RepeatSeeds":
        s = seeding.derive_seed(base_seed, repeat)
        return cls(
            repeat_seed=s,
            encoder=seeding.derive_seed(s, seeding.ENCODER),
            sampling=seeding.derive_seed(s, seeding.SAMPLING),
            ties=seeding.derive_seed(s, seeding.TIES),
            negatives=seeding.derive_seed(s, seeding.NEGATIVES),
            splits=seeding.derive_seed(s, seeding.SPLITS),
        )


class PhaseTimer:
    def __init__(self):
        self.seconds: dict[str, float] = {}

    @contextmanager
    def __call__(self, phase: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[phase] = self.seconds.get(phase, 0.0) + time.perf_counter() - t0


def summarize(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def new_report(task: str, bundle: DatasetBundle, cfg: RunConfig) -> dict:
    return {
        "format": REPORT_FORMAT,
        "task": task,
        "dataset": bundle.summary(),
        "config": asdict(cfg),
        "repeats": [],
    }


def embed_bundle(bundle: DatasetBundle, cfg: RunConfig, seeds: RepeatSeeds, timer: PhaseTimer,
                 graph: GraphStore | None = None, dim: int | None = None) -> EmbeddingTable:
    """Encode features and aggregate neighborhoods for every node."""
    graph = bundle.graph if graph is None else graph
    dim = cfg.dim if dim is None else dim
    features = normalize_rows(bundle.features) if cfg.normalize_features else bundle.features
    tie = SeededRandom(seeds.ties)
    with timer("encode"):
        enc = encoder_fit(bundle.feature_dim, dim, cfg.offset_half_width, seeds.encoder)
        sketches = encode_all(enc, features)
    with timer("embed"):
        return embed_all(sketches, graph, cfg.budgets, tie, seeds.sampling)


# --- node classification -----------------------------------------------------


def run_nodeclass(bundle: DatasetBundle, cfg: RunConfig) -> dict:
    """Fit class vectors on train + val, report test accuracy per repeat."""
    for name in ("train", "test"):
        if len(bundle.splits.get(name, ())) == 0:
            raise ValueError(f"node classification needs a nonempty {name!r} split")
    report = new_report("nodeclass", bundle, cfg)
    labeled = bundle.labeled("train", "val")
    test = bundle.labeled("test")
    for r in range(cfg.repeats):
        seeds = RepeatSeeds.derive(cfg.seed, r)
        timer = PhaseTimer()
        with counting() as work:
            Z = embed_bundle(bundle, cfg, seeds, timer)
            with timer("fit"):
                model = fit_classes(Z, labeled, SeededRandom(seeds.ties))
            with timer("infer"):
                acc = evaluate_accuracy(model, Z, test)
        log.info("repeat %d: accuracy %.4f", r, acc)
        report["repeats"].append({
            "repeat": r,
            "seed": seeds.repeat_seed,
            "accuracy": acc,
            "work": dict(sorted(work.items())),
            "timings": timer.seconds,
        })
    report["summary"] = {"accuracy": summarize([x["accuracy"] for x in report["repeats"]])}
    return report


# --- link prediction ---------------------------------------------------------


def _link_splits(bundle: DatasetBundle, seeds: RepeatSeeds) -> dict[str, np.ndarray]:
    if bundle.links is not None:
        return bundle.links
    return make_link_splits(bundle.graph, seeds.splits)


def link_repeat(bundle: DatasetBundle, cfg: RunConfig, seeds: RepeatSeeds, dim: int,
                timer: PhaseTimer) -> tuple[dict, PairScores, np.ndarray]:
    splits = _link_splits(bundle, seeds)
    train_edges = np.asarray(splits["train_edges"]).reshape(-1, 2)
    train_graph = graph_from_edges(bundle.n_nodes, train_edges)
    Z = embed_bundle(bundle, cfg, seeds, timer, graph=train_graph, dim=dim)
    with timer("fit"):
        neg = sample_non_edges(bundle.n_nodes, train_edges, len(train_edges), seeds.negatives)
        memory = build_edge_memory(Z, train_edges, neg, SeededRandom(seeds.ties), seeds.negatives)
    result = {}
    test_scores = test_labels = None
    with timer("infer"):
        for split in ("val", "test"):
            pos = np.asarray(splits[f"{split}_edges"]).reshape(-1, 2)
            negs = np.asarray(splits[f"{split}_neg"]).reshape(-1, 2)
            if len(pos) == 0 or len(negs) == 0:
                continue
            scores = score_pairs(Z, memory, np.concatenate([pos, negs]))
            labels = np.r_[np.ones(len(pos), dtype=np.int64), np.zeros(len(negs), dtype=np.int64)]
            result[f"{split}_auc"] = auc_roc(scores.a_hat, labels)
            result[f"{split}_ap"] = average_precision(scores.a_hat, labels)
            if split == "test":
                test_scores, test_labels = scores, labels
    if test_scores is None:
        raise ValueError("link prediction needs nonempty test_edges and test_neg")
    return result, test_scores, test_labels


def run_linkpred(bundle: DatasetBundle, cfg: RunConfig, keep_scores: bool = False) -> dict:
    """Test AUC/AP over repeats at ``cfg.dim`` and at every ``cfg.dim_sweep`` size.

    Embeddings and edge memories come from training edges only. Held-out
    splits come from links.json when present, otherwise they are redrawn per
    repeat (5% validation, 10% test).
    """
    report = new_report("linkpred", bundle, cfg)
    dims = [cfg.dim] + [d for d in cfg.dim_sweep if d != cfg.dim]
    sweep = []
    for dim in dims:
        rows = []
        for r in range(cfg.repeats):
            seeds = RepeatSeeds.derive(cfg.seed, r)
            timer = PhaseTimer()
            with counting() as work:
                metrics, scores, labels = link_repeat(bundle, cfg, seeds, dim, timer)
            log.info("dim %d repeat %d: %s", dim, r, metrics)
            row = {"repeat": r, "dim": dim, "seed": seeds.repeat_seed, **metrics,
                   "work": dict(sorted(work.items())), "timings": timer.seconds}
            if keep_scores and dim == cfg.dim and r == 0:
                report["_scores"] = (scores, labels)
            rows.append(row)
        if dim == cfg.dim:
            report["repeats"] = rows
            report["summary"] = {
                "test_auc": summarize([x["test_auc"] for x in rows]),
                "test_ap": summarize([x["test_ap"] for x in rows]),
            }
        sweep.append({
            "dim": dim,
            "test_auc": summarize([x["test_auc"] for x in rows]),
            "test_ap": summarize([x["test_ap"] for x in rows]),
            "per_repeat_auc": [x["test_auc"] for x in rows],
            "per_repeat_ap": [x["test_ap"] for x in rows],
        })
    if cfg.dim_sweep:
        report["sweep"] = sorted(sweep, key=lambda s: s["dim"])
    return report


# --- class-incremental -------------------------------------------------------


def check_schedule(schedule) -> list[set[int]]:
    steps = [set(int(x) for x in s) for s in schedule]
    if not steps:
        raise ValueError("schedule must have at least one step")
    if not steps[0]:
        raise ValueError("the first schedule step must reveal at least one label")
    for t in range(1, len(steps)):
        if not steps[t - 1] <= steps[t]:
            raise ValueError(
                f"schedule is not nested: step {t + 1} drops labels {sorted(steps[t - 1] - steps[t])}"
            )
    return steps


def run_incremental(bundle: DatasetBundle, cfg: RunConfig, schedule) -> dict:
    """Reveal labels step by step; embeddings are computed once at the first step."""
    steps = check_schedule(schedule)
    report = new_report("incremental", bundle, cfg)
    report["schedule"] = [sorted(s) for s in steps]
    seeds = RepeatSeeds.derive(cfg.seed, 0)
    tie = SeededRandom(seeds.ties)
    pool = bundle.labeled("train", "val")
    test = bundle.labeled("test")
    model = Z = None
    revealed: set[int] = set()
    for t, labels in enumerate(steps, start=1):
        timer = PhaseTimer()
        new_labels = labels - revealed
        members = [(v, l) for v, l in pool if l in new_labels]
        with counting() as work:
            if Z is None:
                Z = embed_bundle(bundle, cfg, seeds, timer)
                with timer("fit"):
                    model = fit_classes(Z, members, tie)
            else:
                with timer("fit"):
                    model = add_class_members(model, Z, members)
            visible = [(v, l) for v, l in test if l in labels]
            with timer("infer"):
                acc = evaluate_accuracy(model, Z, visible) if visible else float("nan")
        revealed = labels
        report["repeats"].append({
            "step": t,
            "labels": sorted(labels),
            "new_members": len(members),
            "n_test": len(visible),
            "accuracy": acc,
            "work": dict(sorted(work.items())),
            "timings": {**timer.seconds, "total": sum(timer.seconds.values())},
        })
        log.info("step %d: labels %s accuracy %.4f", t, sorted(labels), acc)
    report["summary"] = {"final_accuracy": report["repeats"][-1]["accuracy"]}
    report["_model"] = model
    return report


# --- output ------------------------------------------------------------------


def public(report: dict) -> dict:
    """Drop in-memory attachments (keys starting with an underscore)."""
    return {k: v for k, v in report.items() if not k.startswith("_")}


def strip_timings(obj):
    """Copy of a report without wall-clock fields, for determinism checks."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k != "timings" and not k.startswith("_")}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def write_report(report: dict, path) -> Path:
    """Write JSON via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w") as fh:
        json.dump(public(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path
