"""Problem instances, the planted-optimum generators and the JSON file format.

A problem is ``min_x sum_i [f_i(x) + 1/2 |x - x_bar_i|^2]`` over a strongly
connected digraph.  The generators plant the optimum at the all-ones vector
``e``: draw node subgradients ``v_i``, set every anchor to
``x_bar = e + mean(v_i)`` so that ``sum v_i + |V| (e - x_bar) = 0``, then
build ``f_i`` with ``v_i`` in its subdifferential at ``e``.

File schema (node and edge indices are one-based)::

    {"m": 2,
     "nodes": [{"x_bar": [...], "function": {"kind": "zero"}},
               {"x_bar": [...], "function": {"kind": "quadratic", "A": [[...]], "b": [...], "c": 0.0}},
               {"x_bar": [...], "function": {"kind": "max2", "A": [[...]],
                                              "b1": [...], "c1": 0.0, "b2": [...], "c2": 0.0}}],
     "edges": [[1, 2], [2, 1]],
     "known_optimum": [...]}          # optional
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import lsq_linear

from .digraph import DirectedGraph, build_graph
from .errors import DirdykError, GraphError, ProblemFormatError
from .oracles import ConvexFunction, MaxTwoQuadratics, Quadratic, Zero, function_from_dict

__all__ = [
    "ProblemInstance",
    "PROBLEM_KINDS",
    "generate_problem",
    "kkt_residual",
    "load_problem",
    "save_problem",
    "problem_to_dict",
    "problem_from_dict",
]

PROBLEM_KINDS = ("consensus", "F-S", "F-NS")
KKT_TOL = 1e-9
MAX_REDRAWS = 100
NS_OFFSET = 0.5
MIN_SHIFT = 1e-6  # smallest accepted diagonal shift r in A = uu' + rI


@dataclass(frozen=True)
class ProblemInstance:
    graph: DirectedGraph
    dim: int
    functions: tuple[ConvexFunction, ...]
    x_bar: np.ndarray
    known_optimum: np.ndarray | None = None

    def __post_init__(self):
        x_bar = np.array(self.x_bar, dtype=float)
        n = self.graph.node_count
        if x_bar.shape != (n, self.dim):
            raise ProblemFormatError(f"x_bar has shape {x_bar.shape}, expected ({n}, {self.dim})")
        if len(self.functions) != n:
            raise ProblemFormatError(f"{len(self.functions)} functions for {n} nodes")
        for i, f in enumerate(self.functions):
            if f.dim != self.dim:
                raise ProblemFormatError(f"function at node {i + 1} has dimension {f.dim}, expected {self.dim}")
        x_bar.setflags(write=False)
        object.__setattr__(self, "x_bar", x_bar)
        object.__setattr__(self, "functions", tuple(self.functions))
        if self.known_optimum is not None:
            opt = np.array(self.known_optimum, dtype=float)
            if opt.shape != (self.dim,):
                raise ProblemFormatError(f"known_optimum has shape {opt.shape}, expected ({self.dim},)")
            opt.setflags(write=False)
            object.__setattr__(self, "known_optimum", opt)
        self.graph.require_strongly_connected()

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def m_bar(self) -> np.ndarray:
        return self.x_bar.mean(axis=0)

    @property
    def is_consensus(self) -> bool:
        return all(isinstance(f, Zero) for f in self.functions)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        same_opt = (
            (self.known_optimum is None and other.known_optimum is None)
            or (
                self.known_optimum is not None
                and other.known_optimum is not None
                and np.array_equal(self.known_optimum, other.known_optimum)
            )
        )
        return (
            self.graph == other.graph
            and self.dim == other.dim
            and self.functions == other.functions
            and np.array_equal(self.x_bar, other.x_bar)
            and same_opt
        )


def kkt_residual(problem: ProblemInstance, x) -> float:
    """Smallest ``|sum_i v_i + sum_i (x - x_bar_i)|`` over subgradients ``v_i`` at ``x``.

    Nodes sitting on the kink of a two-piece max contribute a segment of
    subgradients; the best mixing weights come from a bounded least squares.
    """
    x = np.asarray(x, dtype=float)
    residual = (x - problem.x_bar).sum(axis=0)
    columns = []
    for f in problem.functions:
        subs = f.subgradients(x)
        residual = residual + subs[-1]
        if len(subs) == 2:
            columns.append(subs[0] - subs[1])
    if not columns:
        return float(np.linalg.norm(residual))
    D = np.column_stack(columns)
    sol = lsq_linear(D, -residual, bounds=(0.0, 1.0), method="bvls", tol=1e-15)
    return float(np.linalg.norm(residual + D @ sol.x))


def _spd_hessian(rng, m):
    for _ in range(MAX_REDRAWS):
        u = rng.random(m)
        r = rng.random()
        if r >= MIN_SHIFT:
            return np.outer(u, u) + r * np.eye(m)
    raise DirdykError("could not draw a well-conditioned Hessian")


def _unit_direction(rng, m):
    for _ in range(MAX_REDRAWS):
        d = rng.standard_normal(m)
        norm = np.linalg.norm(d)
        if norm > 1e-8:
            return d / norm
    raise DirdykError("could not draw a nonzero offset direction")


def generate_problem(kind: str, m: int, graph: DirectedGraph, seed: int) -> ProblemInstance:
    """Random instance with a known optimum.

    ``consensus`` uses zero functions and random anchors, so the optimum is
    the anchor mean.  ``F-S`` uses quadratics ``1/2 x'Ax + b'x`` with
    ``A = uu' + rI`` (``u`` uniform on [0,1]^m, ``r`` uniform on [0,1]) and
    ``b`` chosen so the gradient at ``e`` is ``v_i``.  ``F-NS`` takes the max
    of two such quadratics sharing ``A`` whose gradients at ``e`` are
    ``v_i +/- d`` (``|d| = 0.5``) and whose values at ``e`` agree.
    """
    if kind not in PROBLEM_KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")
    m = int(m)
    n = graph.node_count
    rng = np.random.Generator(np.random.PCG64(seed))
    graph.require_strongly_connected()

    if kind == "consensus":
        x_bar = rng.uniform(-1.0, 1.0, size=(n, m))
        return ProblemInstance(graph, m, tuple(Zero(m) for _ in range(n)), x_bar,
                               known_optimum=x_bar.mean(axis=0))

    e = np.ones(m)
    v = rng.uniform(-1.0, 1.0, size=(n, m))
    functions = []
    for i in range(n):
        A = _spd_hessian(rng, m)
        base = v[i] - A @ e
        if kind == "F-S":
            f = Quadratic(A, base, 0.0)
            if np.abs(f.gradient(e) - v[i]).max() > 1e-10:
                raise DirdykError(f"F-S construction failed at node {i + 1}")
        else:
            d = NS_OFFSET * _unit_direction(rng, m)
            shift = d @ e
            f = MaxTwoQuadratics(A, base + d, -shift, base - d, shift)
            _check_ns_piece(f, v[i], e, i)
        functions.append(f)
    x_bar_common = e + v.mean(axis=0)
    x_bar = np.tile(x_bar_common, (n, 1))
    problem = ProblemInstance(graph, m, tuple(functions), x_bar, known_optimum=e)
    res = kkt_residual(problem, e)
    if res > KKT_TOL:
        raise DirdykError(f"planted optimum fails KKT check: residual {res:.3e}")
    return problem


def _check_ns_piece(f, v, e, i):
    f1, f2 = f.pieces(e)
    g1, g2 = f.piece_gradients(e)
    if abs(f1 - f2) > 1e-12 * max(1.0, abs(f1)):
        raise DirdykError(f"F-NS pieces disagree at e for node {i + 1}")
    if np.abs(0.5 * (g1 + g2) - v).max() > 1e-10:
        raise DirdykError(f"F-NS gradients do not average to v at node {i + 1}")
    if min(np.linalg.norm(g1 - v), np.linalg.norm(g2 - v)) < 1e-3:
        raise DirdykError(f"F-NS subgradient is not interior at node {i + 1}")


def problem_to_dict(problem: ProblemInstance) -> dict:
    data = {
        "m": problem.dim,
        "nodes": [
            {"x_bar": problem.x_bar[i].tolist(), "function": f.to_dict()}
            for i, f in enumerate(problem.functions)
        ],
        "edges": [[i + 1, j + 1] for i, j in problem.graph.edges],
    }
    if problem.known_optimum is not None:
        data["known_optimum"] = problem.known_optimum.tolist()
    return data


def problem_from_dict(data: dict) -> ProblemInstance:
    try:
        m = int(data["m"])
        nodes = data["nodes"]
        edges = data["edges"]
    except KeyError as exc:
        raise ProblemFormatError(f"problem is missing field {exc.args[0]!r}") from None
    if m < 1:
        raise ProblemFormatError(f"field 'm' must be positive, got {m}")
    functions, x_bar = [], []
    for idx, node in enumerate(nodes, start=1):
        try:
            fdata = node["function"]
            xb = node["x_bar"]
        except KeyError as exc:
            raise ProblemFormatError(f"nodes[{idx}] is missing field {exc.args[0]!r}") from None
        if len(xb) != m:
            raise ProblemFormatError(f"nodes[{idx}].x_bar has length {len(xb)}, expected m={m}")
        try:
            functions.append(function_from_dict(fdata, m))
        except ProblemFormatError as exc:
            raise ProblemFormatError(f"nodes[{idx}].function: {exc}") from None
        x_bar.append(xb)
    try:
        graph = build_graph(len(nodes), [(int(i) - 1, int(j) - 1) for i, j in edges])
    except (GraphError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"edges: {exc}") from None
    if not graph.is_strongly_connected():
        raise ProblemFormatError("graph fails the strong connectivity check")
    problem = ProblemInstance(graph, m, tuple(functions), np.array(x_bar, dtype=float),
                              known_optimum=data.get("known_optimum"))
    if problem.known_optimum is not None:
        res = kkt_residual(problem, problem.known_optimum)
        if res > KKT_TOL:
            raise ProblemFormatError(f"known_optimum fails the KKT check: residual {res:.3e}")
    return problem


def save_problem(problem: ProblemInstance, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=1) + "\n")


def load_problem(path) -> ProblemInstance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return problem_from_dict(data)
