"""Command-line surface: ingest, synth, split, core, evaluate, sweep."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import CORE_METHODS, dump_core, extract_core
from .errors import RecsysError
from .evaluate import ExperimentConfig, parse_grid, run_experiment
from .graph import InteractionList, build_graph, sample_users, split_train_probe
from .io import (graph_links_as_interactions, load_edge_list, read_config,
                 save_edge_list, save_id_maps)
from .similarity import top_n_table
from .synth import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infocore",
        description="Bipartite-network recommendation with information-core "
                    "extraction: dataset tooling and experiment runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load an edge list, optionally sample "
                                      "users, write normalized outputs")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--min-degree", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic community dataset")
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--objects", type=int, required=True)
    p.add_argument("--links", type=int, required=True)
    p.add_argument("--degree-dist", choices=("powerlaw", "uniform"),
                   default="powerlaw")
    p.add_argument("--exponent", type=float, default=2.5)
    p.add_argument("--communities", type=int, default=1)
    p.add_argument("--mixing", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="split an edge list into train and probe")
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-output", required=True)
    p.add_argument("--probe-output", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("core", help="extract an information core and dump it")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=CORE_METHODS, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n", type=int, default=20,
                   help="neighbor-table width for frequency/rank")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_core)

    p = sub.add_parser("evaluate", help="run the experiment described by a config")
    _add_run_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a config with grid overrides")
    _add_run_options(p)
    p.add_argument("--r", dest="r_grid", help="override the core-ratio grid, "
                                              "e.g. 0.1:1.0:0.1")
    p.add_argument("--k-grid", help="expand knnmd/ucf cells over this K grid")
    p.add_argument("--lambda-grid", help="expand hybrid cells over this grid")
    p.set_defaults(func=cmd_run)
    return parser


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--workers", type=int)


def cmd_ingest(args) -> int:
    interactions = load_edge_list(args.input)
    for lineno, reason in interactions.skipped_lines:
        print(f"warning: line {lineno}: {reason}", file=sys.stderr)
    if args.min_degree is not None or args.count is not None:
        if args.min_degree is None or args.count is None:
            raise ValueError("sampling needs both --min-degree and --count")
        interactions = sample_users(interactions, args.min_degree,
                                    args.count, args.seed)
        if interactions.truncated:
            print("warning: fewer eligible users than requested; kept all",
                  file=sys.stderr)
    g = build_graph(interactions)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(graph_links_as_interactions(g), out / "edges.tsv")
    save_id_maps(g, out / "users.tsv", out / "objects.tsv")
    print(f"ingested n={g.n} m={g.m} l={g.l} -> {out}")
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(n_users=args.users, n_objects=args.objects,
                         n_links=args.links, degree_dist=args.degree_dist,
                         exponent=args.exponent, communities=args.communities,
                         mixing=args.mixing, seed=args.seed)
    interactions = generate_synthetic(spec)
    save_edge_list(interactions, args.output)
    print(f"generated {len(interactions)} links -> {args.output}")
    return 0


def cmd_split(args) -> int:
    g = build_graph(load_edge_list(args.input))
    split = split_train_probe(g, args.ratio, args.seed)
    save_edge_list(graph_links_as_interactions(split.train), args.train_output)
    probe_pairs = tuple(
        (g.user_tokens[u], g.object_tokens[o])
        for u in sorted(split.probe) for o in sorted(split.probe[u]))
    save_edge_list(InteractionList(pairs=probe_pairs), args.probe_output)
    print(f"split l={g.l} -> train={split.train.l} probe={g.l - split.train.l}")
    return 0


def cmd_core(args) -> int:
    g = build_graph(load_edge_list(args.input))
    table = None
    if args.method in ("frequency", "rank"):
        table = top_n_table(g, args.n)
    core = extract_core(g, table, args.method, args.r, seed=args.seed)
    dump_core(core, g, args.output)
    print(f"core method={args.method} r={args.r:g} size={core.size} "
          f"-> {args.output}")
    return 0


def cmd_run(args) -> int:
    overrides: dict[str, str] = {}
    if args.output:
        overrides["output"] = args.output
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    if getattr(args, "r_grid", None):
        overrides["r_grid"] = args.r_grid
    if getattr(args, "k_grid", None):
        overrides["k_grid"] = args.k_grid
    if getattr(args, "lambda_grid", None):
        overrides["lambda_grid"] = args.lambda_grid
    config = ExperimentConfig.from_mapping(read_config(args.config), overrides)
    report = run_experiment(config)
    print(f"wrote {len(report.rows)} rows (+{len(report.aggregates)} "
          f"aggregate) -> {config.output}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (RecsysError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
