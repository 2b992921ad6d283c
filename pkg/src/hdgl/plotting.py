"""Figures for run reports, written to files next to the JSON/TSV output."""

from __future__ import annotations

import csv
import math
from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def figsize(scale=1.0, ratio=None):
    width = 5.5 * scale
    ratio = (math.sqrt(5.0) - 1.0) / 2.0 if ratio is None else ratio
    return (width, width * ratio)


@contextmanager
def new_figure(path, scale=1.0, ratio=None, **kw):
    with matplotlib.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=figsize(scale, ratio), **kw)
        try:
            yield fig, ax
            fig.savefig(path)
        finally:
            plt.close(fig)


def plot_repeats(report: dict, path, metric: str = "accuracy"):
    rows = report["repeats"]
    values = np.array([r[metric] for r in rows], dtype=float)
    with new_figure(path) as (fig, ax):
        ax.plot(np.arange(len(values)), values, "o", color="C0")
        ax.axhline(values.mean(), color="C1", lw=1, label=f"mean {values.mean():.4f}")
        if len(values) > 1:
            ax.axhspan(values.mean() - values.std(), values.mean() + values.std(), color="C1", alpha=0.15)
        ax.set_xlabel("repeat")
        ax.set_ylabel(metric.replace("_", " "))
        ax.legend(frameon=False)
    return Path(path)


def plot_phase_timings(report: dict, path):
    rows = [r for r in report["repeats"] if "timings" in r]
    phases = [p for p in ("encode", "embed", "fit", "infer") if any(p in r["timings"] for r in rows)]
    means = [np.mean([r["timings"].get(p, 0.0) for r in rows]) for p in phases]
    with new_figure(path, scale=0.8) as (fig, ax):
        ax.bar(phases, means, color="C0")
        ax.set_ylabel("seconds (mean over repeats)")
    return Path(path)


def plot_dim_sweep(report: dict, path):
    sweep = report["sweep"]
    dims = np.array([s["dim"] for s in sweep])
    with new_figure(path) as (fig, ax):
        for key, color in (("test_auc", "C0"), ("test_ap", "C2")):
            mean = np.array([s[key]["mean"] for s in sweep])
            std = np.array([s[key]["std"] for s in sweep])
            ax.errorbar(dims, mean, yerr=std, marker="o", capsize=3, color=color, label=key[5:].upper())
        ax.set_xscale("log")
        ax.set_xlabel("hypervector dimension")
        ax.set_ylabel("test score")
        ax.legend(frameon=False)
    return Path(path)


def plot_incremental(report: dict, path):
    rows = report["repeats"]
    steps = [r["step"] for r in rows]
    with new_figure(path) as (fig, ax):
        ax.plot(steps, [r["accuracy"] for r in rows], "o-", color="C0")
        ax.set_xlabel("time step")
        ax.set_ylabel("accuracy", color="C0")
        ax.set_xticks(steps)
        twin = ax.twinx()
        twin.bar(steps, [r["timings"]["total"] for r in rows], alpha=0.3, color="C1")
        twin.set_ylabel("wall time (s)", color="C1")
        twin.set_yscale("log")
    return Path(path)


def plot_score_distributions(a_hat, labels, path):
    a_hat = np.asarray(a_hat)
    labels = np.asarray(labels)
    bins = np.linspace(a_hat.min(), a_hat.max(), 40) if a_hat.size else 10
    with new_figure(path) as (fig, ax):
        ax.hist(a_hat[labels == 1], bins=bins, alpha=0.6, label="edges", color="C0")
        ax.hist(a_hat[labels == 0], bins=bins, alpha=0.6, label="non-edges", color="C3")
        ax.set_xlabel("predicted adjacency score")
        ax.set_ylabel("pairs")
        ax.legend(frameon=False)
    return Path(path)


def write_repeat_table(report: dict, path):
    """Per-repeat (or per-step) metrics as tab-separated text."""
    rows = report["repeats"]
    keys = [k for k in rows[0] if k not in ("work", "timings", "labels")] if rows else []
    timing_keys = sorted({k for r in rows for k in r.get("timings", {})})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(keys + [f"time_{k}" for k in timing_keys])
        for r in rows:
            w.writerow([r[k] for k in keys] + [r.get("timings", {}).get(k, "") for k in timing_keys])
    return Path(path)


def render_report(report: dict, out_dir) -> list[Path]:
    """Write every figure that applies to ``report`` plus ``repeats.tsv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    task = report["task"]
    paths = [write_repeat_table(report, out / "repeats.tsv")]
    if task == "nodeclass":
        paths.append(plot_repeats(report, out / "accuracy.png", "accuracy"))
        paths.append(plot_phase_timings(report, out / "timings.png"))
    elif task == "linkpred":
        paths.append(plot_repeats(report, out / "auc.png", "test_auc"))
        paths.append(plot_phase_timings(report, out / "timings.png"))
        if "sweep" in report:
            paths.append(plot_dim_sweep(report, out / "dim_sweep.png"))
        if "_scores" in report:
            scores, labels = report["_scores"]
            paths.append(plot_score_distributions(scores.a_hat, labels, out / "scores.png"))
    elif task == "incremental":
        paths.append(plot_incremental(report, out / "incremental.png"))
    return paths
