"""Experiment presets, config ingestion and output emission."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .digraph import build_graph, paper_graph
from .errors import DirdykError, GraphError, InvariantViolation, ProblemFormatError
from .problems import PROBLEM_KINDS, generate_problem, load_problem, save_problem
from .simulator import (
    AdversarialDelay,
    RoundRobinSweep,
    RunConfig,
    UniformRandom,
    run,
    write_events_csv,
    write_trace_csv,
)

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_INVARIANT",
    "EXIT_IO",
    "PRESETS",
    "ExperimentConfig",
    "parse_graph",
    "parse_policy",
    "preset_config",
    "load_config",
    "run_experiment",
    "plot_script",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

PRESETS = {
    "paper-smooth": {
        "problem": {"kind": "F-S", "m": 6, "graph": "paper"},
        "iterations": 1000,
        "policy": {"kind": "uniform"},
    },
    "paper-nonsmooth": {
        "problem": {"kind": "F-NS", "m": 6, "graph": "paper"},
        "iterations": 50_000,
        "policy": {"kind": "uniform"},
    },
    "consensus-demo": {
        "problem": {"kind": "consensus", "m": 1, "graph": "paper"},
        "iterations": 5000,
        "policy": {"kind": "round-robin"},
    },
}


def parse_graph(spec):
    """``"paper"``, ``"cycle:N"``, ``"complete:N"`` or ``{"nodes": N, "edges": [[i, j], ...]}``
    with one-based endpoints."""
    if isinstance(spec, dict):
        try:
            n, edges = spec["nodes"], spec["edges"]
        except KeyError as exc:
            raise ProblemFormatError(f"graph is missing field {exc.args[0]!r}") from None
        return build_graph(n, [(i - 1, j - 1) for i, j in edges])
    name, _, arg = str(spec).partition(":")
    if name == "paper":
        return paper_graph()
    if name in ("cycle", "complete"):
        try:
            n = int(arg)
        except ValueError:
            raise ProblemFormatError(f"graph {spec!r} needs a node count, e.g. {name}:4") from None
        if name == "cycle":
            return build_graph(n, [(i, (i + 1) % n) for i in range(n)] if n > 1 else [])
        return build_graph(n, [(i, j) for i in range(n) for j in range(n) if i != j])
    raise ProblemFormatError(f"unknown graph {spec!r}")


def parse_policy(spec):
    spec = dict(spec or {"kind": "uniform"})
    kind = spec.pop("kind", "uniform")
    try:
        if kind == "uniform":
            return UniformRandom(**spec)
        if kind == "round-robin":
            return RoundRobinSweep()
        if kind == "adversarial-delay":
            return AdversarialDelay(int(spec.get("delay_k", 1)))
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"policy: {exc}") from None
    raise ProblemFormatError(f"unknown policy kind {kind!r}")


@dataclass
class ExperimentConfig:
    problem: dict | None = None          # generator spec: kind, m, graph, seed
    problem_file: str | None = None
    run: RunConfig = field(default_factory=lambda: RunConfig(1000))
    trace_path: str = "trace.csv"
    events_path: str | None = None
    plot_path: str | None = None
    problem_out: str | None = None       # where to write the generated instance

    def build_problem(self):
        if self.problem_file is not None:
            return load_problem(self.problem_file)
        spec = self.problem or {}
        kind = spec.get("kind")
        if kind not in PROBLEM_KINDS:
            raise ProblemFormatError(f"problem kind must be one of {PROBLEM_KINDS}, got {kind!r}")
        m = int(spec.get("m", 1 if kind == "consensus" else 6))
        graph = parse_graph(spec.get("graph", "paper"))
        return generate_problem(kind, m, graph, int(spec.get("seed", self.run.seed)))


def config_from_dict(data: dict, debug_invariants: bool = False) -> ExperimentConfig:
    data = dict(data)
    outputs = data.get("outputs", {})
    try:
        run_cfg = RunConfig(
            iterations=int(data["iterations"]),
            seed=int(data.get("seed", 0)),
            policy=parse_policy(data.get("policy")),
            liveness_window_K=data.get("liveness_window_K"),
            record_every=data.get("record_every"),
            epsilon_bar=data.get("epsilon_bar"),
            debug_invariants=bool(data.get("debug_invariants", debug_invariants)),
            record_x=bool(data.get("record_x", False)),
            record_events="events" in outputs,
            rng=data.get("rng", "PCG64"),
        )
    except KeyError as exc:
        raise ProblemFormatError(f"config is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"config: {exc}") from None
    if "problem" not in data and "problem_file" not in data:
        raise ProblemFormatError("config needs either 'problem' or 'problem_file'")
    return ExperimentConfig(
        problem=data.get("problem"),
        problem_file=data.get("problem_file"),
        run=run_cfg,
        trace_path=outputs.get("trace", "trace.csv"),
        events_path=outputs.get("events"),
        plot_path=outputs.get("plot"),
        problem_out=outputs.get("problem"),
    )


def load_config(path, debug_invariants: bool = False) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return config_from_dict(data, debug_invariants)


def preset_config(name: str, out_dir, seed: int = 0, debug_invariants: bool = False) -> ExperimentConfig:
    if name not in PRESETS:
        raise ProblemFormatError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    data = json.loads(json.dumps(PRESETS[name]))
    data["seed"] = seed
    data["problem"]["seed"] = seed
    out = Path(out_dir)
    data["outputs"] = {
        "trace": str(out / "trace.csv"),
        "events": str(out / "events.csv"),
        "plot": str(out / "plot_trace.py"),
        "problem": str(out / "problem.json"),
    }
    return config_from_dict(data, debug_invariants)


def plot_script(csv_path: str, title: str = "") -> str:
    """Source of a standalone matplotlib script plotting gap and wdist against k."""
    png = str(Path(csv_path).with_suffix(".png"))
    return f'''"""Plot the duality gap and the weighted squared distance on a log scale."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
out = sys.argv[2] if len(sys.argv) > 2 else {png!r}
k, gap, wdist = [], [], []
with open(path) as fh:
    for row in csv.DictReader(fh):
        k.append(int(row["k"]))
        gap.append(max(float(row["gap"]), 1e-300))
        wdist.append(max(float(row["wdist"]), 1e-300))

fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(k, gap, label="duality gap")
ax.semilogy(k, wdist, label="weighted squared distance")
ax.set_xlabel("iteration k")
ax.set_title({title!r})
ax.legend()
fig.tight_layout()
fig.savefig(out, dpi=150)
print("wrote", out)
'''


def run_experiment(config: ExperimentConfig) -> int:
    """Run one experiment and write its outputs; returns a process exit code."""
    try:
        problem = config.build_problem()
    except (ProblemFormatError, GraphError, ValueError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read problem: %s", exc)
        return EXIT_IO
    sims = []
    try:
        rows = run(problem, config.run, simulation_out=sims)
    except InvariantViolation as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    except ValueError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except DirdykError as exc:
        log.error("run failed: %s", exc)
        return EXIT_INVARIANT
    try:
        for p in (config.trace_path, config.events_path, config.plot_path, config.problem_out):
            if p:
                Path(p).parent.mkdir(parents=True, exist_ok=True)
        write_trace_csv(rows, config.trace_path, problem.n, problem.dim)
        if config.events_path and sims[0].events is not None:
            write_events_csv(sims[0].events, config.events_path, problem.graph)
        if config.plot_path:
            Path(config.plot_path).write_text(plot_script(config.trace_path))
        if config.problem_out:
            save_problem(problem, config.problem_out)
    except OSError as exc:
        log.error("cannot write outputs: %s", exc)
        return EXIT_IO
    last = rows[-1]
    log.info("k=%d val=%.6g gap=%.3e wdist=%.3e spread=%.3e",
             last.k, last.val, last.gap, last.wdist, last.spread)
    return EXIT_OK
