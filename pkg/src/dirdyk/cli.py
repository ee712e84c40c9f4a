"""Command-line entry point: ``dirdyk run | gen | preset``."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import GraphError, ProblemFormatError
from .harness import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    PRESETS,
    load_config,
    parse_graph,
    preset_config,
    run_experiment,
)
from .problems import PROBLEM_KINDS, generate_problem, save_problem

log = logging.getLogger("dirdyk")


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config, debug_invariants=args.debug_invariants)
    except ProblemFormatError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    return run_experiment(config)


def _cmd_gen(args) -> int:
    m = args.m if args.m is not None else (1 if args.kind == "consensus" else 6)
    try:
        graph = parse_graph(args.graph)
        problem = generate_problem(args.kind, m, graph, args.seed)
    except (ProblemFormatError, GraphError, ValueError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        save_problem(problem, args.out)
    except OSError as exc:
        log.error("cannot write %s: %s", args.out, exc)
        return EXIT_IO
    log.info("wrote %s (%s, m=%d, %d nodes)", args.out, args.kind, m, problem.n)
    return EXIT_OK


def _run_preset(name, out_dir, seed, debug):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    return run_experiment(preset_config(name, out_dir, seed, debug))


def _cmd_preset(args) -> int:
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
    out = Path(args.out_dir)
    if len(seeds) == 1:
        return _run_preset(args.name, out, seeds[0], args.debug_invariants)
    dirs = [out / f"seed{s}" for s in seeds]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(_run_preset, [args.name] * len(seeds), dirs, seeds,
                              [args.debug_invariants] * len(seeds)))
    return max(codes)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirdyk",
        description="Asynchronous dual ascent over directed graphs with delayed links.",
    )
    parser.add_argument("--debug-invariants", action="store_true",
                        help="check conservation and monotonicity after every event")
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_gen = sub.add_parser("gen", help="generate a problem instance")
    p_gen.add_argument("--kind", required=True, choices=PROBLEM_KINDS)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--m", type=int, default=None, help="dimension (default 6, or 1 for consensus)")
    p_gen.add_argument("--graph", default="paper", help="paper, cycle:N or complete:N")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen)

    p_pre = sub.add_parser("preset", help="run a named experiment preset")
    p_pre.add_argument("name", choices=sorted(PRESETS))
    p_pre.add_argument("--out-dir", required=True)
    p_pre.add_argument("--seed", type=int, default=0)
    p_pre.add_argument("--seeds", default=None, help="comma-separated seeds, run concurrently")
    p_pre.add_argument("--jobs", type=int, default=None)
    p_pre.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
