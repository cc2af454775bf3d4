# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List
from typing import Optional

from .about import __version__
from .exceptions import ScenarioConfigError
from .exceptions import SwarmSimError
from .graph import DEFAULT_EDGE_THRESHOLD
from .graph import load_edge_list
from .graph import write_edge_list
from .harness import run_scenario
from .harness import write_outputs
from .robustness import analyze_robustness
from .scenario import list_presets
from .scenario import load_config
from .scenario import load_preset

log = logging.getLogger("swarmsim.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swarm-sim", description="Resilient formation control simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write timeseries.csv, summary.json, config.echo.json")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="scenario JSON file")
    source.add_argument("--preset", help="bundled scenario name (see 'presets')")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--out", help="output directory (default: the scenario's output_dir or runs/<name>)")
    run.add_argument("--save-graph", action="store_true", help="also write the final communication graph edge list")

    analyze = sub.add_parser("analyze", help="robustness report for an edge-list graph, printed as JSON")
    analyze.add_argument("--graph", required=True, help="edge list file with 'i j w' lines")
    analyze.add_argument("--threshold", type=float, default=DEFAULT_EDGE_THRESHOLD,
                         help="minimum weight for an edge to count (default: %(default)s)")
    analyze.add_argument("--exact-robustness", action="store_true",
                         help="exhaustive r-robustness and isoperimetric number (n <= 16)")

    sub.add_parser("presets", help="list bundled scenarios")
    return parser


def _run(args) -> int:
    config = load_preset(args.preset) if args.preset else load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out_dir = args.out or config.output_dir or os.path.join("runs", config.name)
    config = replace(config, output_dir=out_dir)
    result = run_scenario(config)
    write_outputs(result, out_dir)
    if args.save_graph:
        write_edge_list(result.final_graph, os.path.join(out_dir, "final_graph.txt"))
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return 0


def _analyze(args) -> int:
    graph = load_edge_list(args.graph)
    report = analyze_robustness(graph, threshold=args.threshold, exact=args.exact_robustness)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _presets(args) -> int:
    for name in list_presets():
        print(f"{name}\t{load_preset(name).description}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    handlers = {"run": _run, "analyze": _analyze, "presets": _presets}
    try:
        return handlers[args.command](args)
    except ScenarioConfigError as e:
        for error in e.errors:
            print(f"swarm-sim: config error: {error}", file=sys.stderr)
        return 2
    except (SwarmSimError, ValueError, OSError) as e:
        print(f"swarm-sim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
