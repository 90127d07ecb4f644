"""Command line front end: run experiments, inspect decompositions, report bounds."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import info_report, report_csv
from .decompose import decompose
from .harness import (
    DEFAULT_PROBES,
    DEFAULT_REPS,
    SETTINGS,
    ExperimentConfig,
    emit,
    run_experiment,
)
from .estimators import METHODS
from .topology import TopologyError, UnsupportedTopologyError, parse_topology

EXIT_CONFIG = 1
EXIT_UNSUPPORTED = 2


def _add_topology_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--topology", type=Path, help="topology file")
    g.add_argument("--setting", choices=sorted(SETTINGS), help="built-in setting")


def _topology_text(args) -> str:
    if args.setting:
        return SETTINGS[args.setting]
    return args.topology.read_text()


def _int_list(text: str):
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="losstomo", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a replication experiment")
    _add_topology_args(run)
    run.add_argument("--probes", type=_int_list, default=DEFAULT_PROBES,
                     help="comma-separated per-source probe counts (default 100,500,1000)")
    run.add_argument("--reps", type=int, default=DEFAULT_REPS)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--estimators", type=lambda s: tuple(s.split(",")), default=("mle",),
                     help=f"comma-separated subset of {','.join(METHODS)}")
    run.add_argument("--format", choices=("csv", "markdown"), default="csv")
    run.add_argument("--out", type=Path, help="output path (default stdout)")

    dec = sub.add_parser("decompose", help="print the d-tree plan")
    _add_topology_args(dec)

    ana = sub.add_parser("analyze", help="print true-parameter information bounds")
    _add_topology_args(ana)
    ana.add_argument("--probes", type=int, default=1000)
    return ap


def cmd_run(args) -> int:
    cfg = ExperimentConfig(
        topology_text=_topology_text(args),
        probe_counts=args.probes,
        reps=args.reps,
        seed=args.seed,
        estimators=args.estimators,
    )
    table = run_experiment(cfg)
    text = emit(table, args.format)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_decompose(args) -> int:
    plan = decompose(parse_topology(_topology_text(args)))
    print(f"joint nodes: {list(plan.joint_nodes) or 'none'}")
    for mt in plan.msource_trees:
        print(f"multi-source tree at node {mt.joint}:")
        print(f"  sources S({mt.joint}) = {list(mt.sources)}")
        print(f"  nodes = {list(mt.nodes)}")
        print(f"  links = {[l.label for l in mt.links]}")
        print(f"  virtual links = {[f'{s}->{j}' for s, j in mt.virtual_links]}")
    for frag in plan.fragments:
        print(f"fragment of source {frag.source}:")
        print(f"  nodes = {list(frag.nodes)}")
        print(f"  links = {[l.label for l in frag.links]}")
    if plan.merged_labels:
        print(f"merged serial links: {list(plan.merged_labels)}")
    print("estimation order:")
    for step in plan.estimation_order:
        if step[0] == "msource":
            print(f"  solve multi-source tree at node {step[1]}")
        else:
            print(f"  solve upstream path of source {step[1]} at node {step[2]}")
    return 0


def cmd_analyze(args) -> int:
    plan = decompose(parse_topology(_topology_text(args)))
    rows = info_report(plan, args.probes)
    sys.stdout.write(report_csv(rows))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "decompose": cmd_decompose, "analyze": cmd_analyze}
    try:
        return handlers[args.command](args)
    except UnsupportedTopologyError as exc:
        print(f"unsupported topology: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (TopologyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
