"""Deterministic event scheduling and the simulation run loop.

Unreliable links are modelled as delays only: a send (A) always lands in
the sender's cumulative counter, and the matching receive (B) may be
postponed arbitrarily.  Nothing is ever lost.

Randomness comes from numpy's PCG64 bit generator seeded from the run
seed through a ``SeedSequence``, so a (problem, config) pair always yields
the same event sequence and the same trace.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .potential import diagnostics, solve_reference, val
from .protocol import Event, apply_event, check_invariants, init_state

__all__ = [
    "UniformRandom",
    "RoundRobinSweep",
    "AdversarialDelay",
    "RunConfig",
    "TraceRow",
    "Scheduler",
    "Simulation",
    "check_liveness",
    "run",
    "default_epsilon_bar",
    "default_liveness_window",
    "write_trace_csv",
    "write_events_csv",
]

RNG_ALGORITHM = "PCG64"
VAL_TOL = 1e-10
GAP_TOL = 1e-9


@dataclass(frozen=True)
class UniformRandom:
    """Each step picks A, B or C with the given probabilities, then a
    uniformly random node or edge."""

    p_a: float = 1 / 3
    p_b: float = 1 / 3
    p_c: float = 1 / 3

    def __post_init__(self):
        probs = (self.p_a, self.p_b, self.p_c)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError(f"probabilities must lie in [0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {sum(probs)!r}")


@dataclass(frozen=True)
class RoundRobinSweep:
    """A on every node, B on every edge, C on every node, repeated."""


@dataclass(frozen=True)
class AdversarialDelay:
    """Round-robin sweeps where each edge delivers only on every
    ``delay_k``-th time its B slot comes up; other B slots are skipped."""

    delay_k: int = 1

    def __post_init__(self):
        if int(self.delay_k) < 1:
            raise ValueError(f"delay_k must be >= 1, got {self.delay_k}")


def default_epsilon_bar(graph) -> float:
    """``1 / (|V| (max outdeg + 1)^|V|)``."""
    n = graph.node_count
    return 1.0 / (n * (int(graph.out_degrees.max()) + 1) ** n)


def minimum_liveness_window(graph) -> int:
    return 2 * graph.node_count + graph.edge_count


def default_liveness_window(graph, policy) -> int:
    base = 100 * minimum_liveness_window(graph)
    if isinstance(policy, AdversarialDelay):
        base *= policy.delay_k
    return base


@dataclass
class RunConfig:
    iterations: int
    seed: int = 0
    policy: object = field(default_factory=UniformRandom)
    liveness_window_K: int | None = None
    record_every: int | None = None
    epsilon_bar: float | None = None
    debug_invariants: bool = False
    record_x: bool = False
    record_events: bool = False
    rng: str = RNG_ALGORITHM

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise ValueError("iterations must be positive")
        if self.rng != RNG_ALGORITHM:
            raise ValueError(f"unsupported rng {self.rng!r}; only {RNG_ALGORITHM} is available")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be positive")
        if self.epsilon_bar is not None and not self.epsilon_bar > 0:
            raise ValueError("epsilon_bar must be positive")

    def resolved(self, graph) -> "RunConfig":
        """Copy with every graph-dependent default filled in and validated."""
        K = self.liveness_window_K
        if K is None:
            K = default_liveness_window(graph, self.policy)
        if K < minimum_liveness_window(graph):
            raise ValueError(
                f"liveness_window_K={K} is below the coverage minimum "
                f"2|V| + |E| = {minimum_liveness_window(graph)}"
            )
        every = self.record_every
        if every is None:
            every = 1 if self.iterations <= 10_000 else 10
        eps = self.epsilon_bar if self.epsilon_bar is not None else default_epsilon_bar(graph)
        return RunConfig(self.iterations, self.seed, self.policy, K, every, eps,
                         self.debug_invariants, self.record_x, self.record_events, self.rng)


@dataclass(frozen=True)
class TraceRow:
    k: int
    val: float
    gap: float
    wdist: float
    spread: float
    x: np.ndarray | None = None

    @property
    def flagged(self) -> bool:
        return math.isinf(self.val)


class Scheduler:
    """Produces a legal event stream for one run.

    A send that would push ``s_i`` down to the floor ``epsilon_bar`` is
    replaced: under the random and round-robin policies by a receive on a
    uniformly chosen in-edge of ``i`` that still carries weight (falling back
    to a dual step at ``i`` if there is none); under adversarial delay by a
    dual step at ``i``, since that policy owns delivery timing.
    """

    def __init__(self, policy, graph, seed: int, epsilon_bar: float):
        self.policy = policy
        self.graph = graph
        self.epsilon_bar = epsilon_bar
        seq = np.random.SeedSequence(seed)
        self.rng = np.random.Generator(np.random.PCG64(seq.spawn(1)[0]))
        n, E = graph.node_count, graph.edge_count
        self._sweep = ([("A", i) for i in range(n)] + [("B", e) for e in range(E)]
                       + [("C", i) for i in range(n)])
        self._pos = 0
        self._draws = np.zeros(E, dtype=np.int64)

    def _floor_ok(self, state, i) -> bool:
        return state.s[i] / (self.graph.out_degrees[i] + 1) > self.epsilon_bar

    def _substitute(self, state, i) -> Event:
        if isinstance(self.policy, AdversarialDelay):
            return Event("C", i)
        src = self.graph.sources
        live = [e for e in self.graph.in_edges(i)
                if state.sigma_s[src[e]] - state.rho_s[e] > 0.0]
        if live:
            return Event("B", live[int(self.rng.integers(len(live)))])
        return Event("C", i)

    def _next_sweep_slot(self):
        op, target = self._sweep[self._pos]
        self._pos = (self._pos + 1) % len(self._sweep)
        return op, target

    def next_event(self, state) -> Event:
        policy = self.policy
        if isinstance(policy, UniformRandom):
            u = self.rng.random()
            if u < policy.p_a:
                op, count = "A", self.graph.node_count
            elif u < policy.p_a + policy.p_b:
                op, count = "B", self.graph.edge_count
            else:
                op, count = "C", self.graph.node_count
            target = int(self.rng.integers(count))
        elif isinstance(policy, RoundRobinSweep):
            op, target = self._next_sweep_slot()
        elif isinstance(policy, AdversarialDelay):
            while True:
                op, target = self._next_sweep_slot()
                if op != "B":
                    break
                self._draws[target] += 1
                if self._draws[target] % policy.delay_k == 0:
                    break
        else:
            raise TypeError(f"unknown schedule policy {policy!r}")
        if op == "A" and not self._floor_ok(state, target):
            return self._substitute(state, target)
        return Event(op, target)


def _coverage_gaps(events, graph):
    """Largest gap per required item, counting the run boundaries as occurrences."""
    n, E = graph.node_count, graph.edge_count
    keys = [("A", i) for i in range(n)] + [("B", e) for e in range(E)] + [("C", i) for i in range(n)]
    last = dict.fromkeys(keys, 0)
    worst = dict.fromkeys(keys, 0)
    t = 0
    for t, ev in enumerate(events, start=1):
        key = (ev[0], ev[1])
        if key in last:
            worst[key] = max(worst[key], t - last[key])
            last[key] = t
    for key in keys:
        worst[key] = max(worst[key], t + 1 - last[key])
    return worst


def check_liveness(events, K: int, graph) -> bool:
    """True iff every window of ``K`` consecutive events contains A(i) and
    C(i) for every node and B(e) for every edge.

    A sequence shorter than ``K`` is judged as a single window.
    """
    events = list(events)
    if not events:
        raise ValueError("event list is empty")
    K_eff = min(int(K), len(events))
    return max(_coverage_gaps(events, graph).values()) <= K_eff


class Simulation:
    """One isolated protocol run: state, scheduler and bookkeeping."""

    def __init__(self, problem, config: RunConfig, x_star=None, y0=None):
        graph = problem.graph
        graph.require_strongly_connected()
        self.problem = problem
        self.config = config.resolved(graph)
        self.state = init_state(problem, y0)
        self.scheduler = Scheduler(self.config.policy, graph, self.config.seed,
                                   self.config.epsilon_bar)
        self.x_star = solve_reference(problem) if x_star is None else np.asarray(x_star, dtype=float)
        self.oracles = problem.functions
        self.events = [] if self.config.record_events else None
        self._eps = self.config.epsilon_bar
        keys = ([("A", i) for i in range(graph.node_count)]
                + [("B", e) for e in range(graph.edge_count)]
                + [("C", i) for i in range(graph.node_count)])
        self._last = dict.fromkeys(keys, 0)
        self._worst = dict.fromkeys(keys, 0)

    def step(self) -> Event:
        state = self.state
        ev = self.scheduler.next_event(state)
        apply_event(state, ev, self.oracles)
        t = state.iteration
        self._worst[ev] = max(self._worst[ev], t - self._last[ev])
        self._last[ev] = t
        if ev.op == "A" and not state.s[ev.target] > self._eps:
            raise InvariantViolation(
                f"s_{ev.target + 1} = {state.s[ev.target]:.3e} fell to the floor {self._eps:.3e}",
                t, ev)
        if self.events is not None:
            self.events.append(ev)
        return ev

    def liveness_gap(self) -> int:
        """Largest coverage gap so far, including the still-open tails."""
        t = self.state.iteration
        return max(max(w, t + 1 - self._last[k]) for k, w in self._worst.items())

    def row(self) -> TraceRow:
        d = diagnostics(self.state, self.problem, self.x_star)
        x = self.state.estimates().ravel().copy() if self.config.record_x else None
        return TraceRow(self.state.iteration, d.val, d.duality_gap, d.weighted_sq_dist,
                        d.consensus_spread, x)


def _check_row(row, prev_val, ev):
    if row.val > prev_val + VAL_TOL:
        raise InvariantViolation(f"potential increased by {row.val - prev_val:.3e}", row.k, ev)
    if not row.gap >= row.wdist - GAP_TOL or row.wdist < -GAP_TOL:
        raise InvariantViolation(
            f"gap chain broken: gap={row.gap:.6e}, wdist={row.wdist:.6e}", row.k, ev)


def run(problem, config: RunConfig, x_star=None, simulation_out=None) -> list[TraceRow]:
    """Execute ``config.iterations`` events and return the decimated trace.

    Mass conservation, potential monotonicity and the gap chain are checked
    at every recorded row, or after every event with ``debug_invariants``.
    Pass a list as ``simulation_out`` to receive the :class:`Simulation`.
    """
    sim = Simulation(problem, config, x_star=x_star)
    if simulation_out is not None:
        simulation_out.append(sim)
    cfg = sim.config
    state = sim.state
    check_invariants(state)
    rows = [sim.row()]
    prev_val = rows[0].val
    K = cfg.liveness_window_K
    for k in range(1, cfg.iterations + 1):
        ev = sim.step()
        if cfg.debug_invariants:
            check_invariants(state, event=ev)
            v = val(state, problem)
            if v > prev_val + VAL_TOL:
                raise InvariantViolation(f"potential increased by {v - prev_val:.3e}", k, ev)
            prev_val = v
        if k % cfg.record_every == 0 or k == cfg.iterations:
            if not cfg.debug_invariants:
                check_invariants(state, event=ev)
            row = sim.row()
            _check_row(row, rows[-1].val, ev)
            rows.append(row)
            if k >= K and sim.liveness_gap() > K:
                raise InvariantViolation(f"liveness window K={K} violated", k, ev)
    return rows


def write_trace_csv(rows, path, n: int | None = None, m: int | None = None) -> None:
    """CSV with header ``k,val,gap,wdist,spread[,x_i_c...]`` at 17 significant digits."""
    header = ["k", "val", "gap", "wdist", "spread"]
    with_x = bool(rows) and rows[0].x is not None
    if with_x:
        if n is None or m is None:
            m = m or 1
            n = rows[0].x.size // m
        header += [f"x_{i}_{c}" for i in range(1, n + 1) for c in range(1, m + 1)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            line = [str(r.k)] + [f"{v:.17g}" for v in (r.val, r.gap, r.wdist, r.spread)]
            if with_x:
                line += [f"{v:.17g}" for v in r.x]
            writer.writerow(line)


def write_events_csv(events, path, graph) -> None:
    """Event log ``k,op,target``; targets are one-based, edges as ``i->j``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "op", "target"])
        for k, ev in enumerate(events, start=1):
            writer.writerow([k, ev.op, ev.describe(graph)])
