"""Command-line entry point: ``hdgl <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from hdgl.datasets import DatasetError, block_sbm, convert_planetoid, load_dataset, make_link_splits, write_dataset
from hdgl.runner import RepeatSeeds, RunConfig, PhaseTimer, embed_bundle, run_incremental, run_linkpred, run_nodeclass, write_report

log = logging.getLogger("hdgl")


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, budgets: bool = True) -> None:
    p.add_argument("--data", required=True, type=Path, help="dataset directory")
    p.add_argument("--dim", type=int, default=20000, help="hypervector dimension (default 20000)")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--lambda", dest="offset_half_width", type=float, default=0.0,
                   help="hyperplane offset half-width (default 0: through the origin)")
    p.add_argument("--normalize-features", type=_bool, default=False, metavar="BOOL")
    if budgets:
        p.add_argument("--hop1", type=int, default=11, help="1-hop sample budget (odd)")
        p.add_argument("--hop2", type=int, default=21, help="2-hop sample budget (odd)")
    p.add_argument("--out", type=Path, required=True, help="output file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdgl", description="One-pass hyperdimensional graph learning.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodeclass", help="node classification over repeats")
    _common(p)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--figures", type=Path, help="directory for figures and repeats.tsv")

    p = sub.add_parser("linkpred", help="link prediction over repeats")
    _common(p)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--dim-sweep", type=_int_list, default=[], metavar="LIST",
                   help="extra dimensions, e.g. 10000,20000,50000")
    p.add_argument("--scores", type=Path, help="write test pair scores as TSV")
    p.add_argument("--figures", type=Path, help="directory for figures and repeats.tsv")

    p = sub.add_parser("incremental", help="class-incremental node labeling")
    _common(p)
    p.add_argument("--schedule", type=Path, required=True, help="JSON list of label lists")
    p.add_argument("--model", type=Path, help="save the final class model here")
    p.add_argument("--figures", type=Path, help="directory for figures and repeats.tsv")

    p = sub.add_parser("embed", help="dump packed node embeddings")
    _common(p)

    p = sub.add_parser("convert-planetoid", help="convert ind.<name>.* files to a dataset directory")
    p.add_argument("--raw", type=Path, required=True)
    p.add_argument("--name", required=True, help="cora, citeseer or pubmed")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--with-links", action="store_true", help="also write a 5%%/10%% links.json")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", help="write a synthetic block-model dataset")
    p.add_argument("--nodes", type=int, default=1000)
    p.add_argument("--blocks", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.05)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--with-links", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _config(args, task: str) -> RunConfig:
    return RunConfig(
        dim=args.dim,
        offset_half_width=args.offset_half_width,
        seed=args.seed,
        hop1=getattr(args, "hop1", 11),
        hop2=getattr(args, "hop2", 21),
        task=task,
        repeats=getattr(args, "repeats", 1),
        normalize_features=args.normalize_features,
        dim_sweep=getattr(args, "dim_sweep", []),
        out=str(args.out),
    )


def write_scores(scores, labels, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["u", "v", "d_plus", "d_minus", "a_hat", "label"])
        for (u, v), dp, dm, a, y in zip(scores.pairs.tolist(), scores.d_plus, scores.d_minus,
                                        scores.a_hat, labels):
            w.writerow([u, v, repr(float(dp)), repr(float(dm)), repr(float(a)), int(y)])


def _figures(report, directory) -> None:
    if directory is None:
        return
    from hdgl.plotting import render_report

    for path in render_report(report, directory):
        log.info("wrote %s", path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (DatasetError, ValueError) as exc:
        print(f"hdgl: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "synth":
        bundle = block_sbm(args.nodes, args.blocks, args.p_in, args.p_out, args.feature_dim,
                           args.separation, args.seed)
        if args.with_links:
            bundle.links = make_link_splits(bundle.graph, args.seed)
        write_dataset(bundle, args.out)
        print(json.dumps(bundle.summary()))
        return 0
    if args.command == "convert-planetoid":
        bundle = convert_planetoid(args.raw, args.name, args.out)
        if args.with_links:
            bundle.links = make_link_splits(bundle.graph, args.seed)
            write_dataset(bundle, args.out, sparse_features=True)
        print(json.dumps(bundle.summary()))
        return 0

    bundle = load_dataset(args.data)
    if args.command == "nodeclass":
        report = run_nodeclass(bundle, _config(args, "nodeclass"))
    elif args.command == "linkpred":
        report = run_linkpred(bundle, _config(args, "linkpred"), keep_scores=True)
        if args.scores:
            write_scores(*report["_scores"], args.scores)
    elif args.command == "incremental":
        with open(args.schedule) as fh:
            schedule = json.load(fh)
        report = run_incremental(bundle, _config(args, "incremental"), schedule)
        if args.model:
            from hdgl.nodeclass import save_model

            save_model(report["_model"], args.model)
    elif args.command == "embed":
        from hdgl.embed import dump_embeddings

        cfg = _config(args, "embed")
        table = embed_bundle(bundle, cfg, RepeatSeeds.derive(cfg.seed, 0), PhaseTimer())
        dump_embeddings(table, args.out)
        return 0
    else:  # pragma: no cover - argparse rejects unknown commands
        raise AssertionError(args.command)

    write_report(report, args.out)
    _figures(report, getattr(args, "figures", None))
    summary = report.get("summary", {})
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
