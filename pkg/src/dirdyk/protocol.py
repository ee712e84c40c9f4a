"""Protocol state and the mass-transfer / dual-step operations.

The network snapshot keeps, per node, the mass pair ``(y_i, s_i)``, the dual
block ``z_i`` and the cumulative broadcast counters ``sigma``; per edge, the
last cumulative value the receiver has absorbed, ``rho``.  The in-flight
mass of edge ``(i, j)`` is ``sigma_i - rho_(i,j)``.  Every local estimate is
the ratio ``x = y / s``.

Operations A (send), B (receive) and C (dual step) are the protocol proper.
Operations D (split into the virtual slot ``r``) and E (merge ``r`` back) are
analysis tools; the protocol never touches ``r``.

All operations mutate the state in place and return it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .digraph import DirectedGraph
from .errors import DimensionError, InvariantViolation, ProtocolError

__all__ = [
    "Event",
    "ProtocolState",
    "R_SLOT",
    "init_state",
    "op_a",
    "op_b",
    "op_c",
    "op_d",
    "op_e",
    "apply_event",
    "local_estimate",
    "slot_mass",
    "mass_residuals",
    "check_invariants",
]

MASS_TOL = 1e-9
R_SLOT = -1


class Event(NamedTuple):
    """One protocol step: ``op`` is ``"A"``, ``"B"`` or ``"C"``.

    ``target`` is a node index for A and C and an edge index for B.
    """

    op: str
    target: int

    def describe(self, graph: DirectedGraph | None = None) -> str:
        if self.op == "B" and graph is not None:
            i, j = graph.edges[self.target]
            return f"{i + 1}->{j + 1}"
        return str(self.target + 1)


@dataclass
class ProtocolState:
    graph: DirectedGraph
    y: np.ndarray        # (n, m)
    s: np.ndarray        # (n,)
    z: np.ndarray        # (n, m) node dual blocks
    sigma_y: np.ndarray  # (n, m)
    sigma_s: np.ndarray  # (n,)
    rho_y: np.ndarray    # (|E|, m)
    rho_s: np.ndarray    # (|E|,)
    r_y: np.ndarray      # (m,)
    r_s: float
    m_bar: np.ndarray    # (m,)
    iteration: int = 0

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    @property
    def slot_count(self) -> int:
        """Number of real slots, nodes first then edges."""
        return self.graph.node_count + self.graph.edge_count

    def edge_s(self) -> np.ndarray:
        return self.sigma_s[self.graph.sources] - self.rho_s

    def edge_y(self) -> np.ndarray:
        return self.sigma_y[self.graph.sources] - self.rho_y

    def estimates(self) -> np.ndarray:
        """Node estimates ``y_i / s_i`` as an (n, m) array."""
        return self.y / self.s[:, None]

    def copy(self) -> "ProtocolState":
        return ProtocolState(
            self.graph,
            self.y.copy(),
            self.s.copy(),
            self.z.copy(),
            self.sigma_y.copy(),
            self.sigma_s.copy(),
            self.rho_y.copy(),
            self.rho_s.copy(),
            self.r_y.copy(),
            self.r_s,
            self.m_bar.copy(),
            self.iteration,
        )

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "m_bar": self.m_bar.tolist(),
            "nodes": [
                {
                    "y": self.y[i].tolist(),
                    "s": float(self.s[i]),
                    "z": self.z[i].tolist(),
                    "sigma_y": self.sigma_y[i].tolist(),
                    "sigma_s": float(self.sigma_s[i]),
                }
                for i in range(self.n)
            ],
            "edges": [
                {
                    "edge": [i + 1, j + 1],
                    "rho_y": self.rho_y[e].tolist(),
                    "rho_s": float(self.rho_s[e]),
                }
                for e, (i, j) in enumerate(self.graph.edges)
            ],
            "r": {"y": self.r_y.tolist(), "s": self.r_s},
        }


def init_state(problem, y0=None) -> ProtocolState:
    """Fresh state: ``s_i = 1``, no in-flight mass, zero duals and counters.

    ``y0`` defaults to the node anchors ``x_bar``; any choice whose rows sum
    to ``|V| * m_bar`` is accepted.
    """
    graph = problem.graph
    n, m = graph.node_count, problem.dim
    m_bar = np.asarray(problem.m_bar, dtype=float).copy()
    if y0 is None:
        y0 = problem.x_bar
    y0 = np.array(y0, dtype=float)
    if y0.shape != (n, m):
        raise DimensionError(f"y0 has shape {y0.shape}, expected ({n}, {m})")
    residual = np.abs(y0.sum(axis=0) - n * m_bar).max()
    if residual > MASS_TOL * max(1.0, np.abs(n * m_bar).max()):
        raise ValueError(f"initial masses must sum to |V| * m_bar (off by {residual:.3e})")
    E = graph.edge_count
    return ProtocolState(
        graph=graph,
        y=np.ascontiguousarray(y0),
        s=np.ones(n),
        z=np.zeros((n, m)),
        sigma_y=np.zeros((n, m)),
        sigma_s=np.zeros(n),
        rho_y=np.zeros((E, m)),
        rho_s=np.zeros(E),
        r_y=np.zeros(m),
        r_s=0.0,
        m_bar=m_bar,
    )


def op_a(state: ProtocolState, i: int) -> ProtocolState:
    """Node ``i`` divides its mass by ``outdeg + 1`` and broadcasts a share."""
    denom = state.graph.out_degree(i) + 1.0
    kernels.send(state.y, state.s, state.sigma_y, state.sigma_s, i, denom)
    return state


def op_b(state: ProtocolState, e: int) -> ProtocolState:
    """The head of edge ``e`` absorbs everything outstanding on it."""
    g = state.graph
    g.check_edge(e)
    src, dst = g.edges[e]
    kernels.receive(state.y, state.s, state.sigma_y, state.sigma_s,
                    state.rho_y, state.rho_s, src, dst, e)
    return state


def op_c(state: ProtocolState, j: int, f) -> ProtocolState:
    """Exact minimization of the dual potential over node ``j``'s block.

    Solved in primal form: ``x_j = prox_{f/s}(x_temp)``, then the new dual
    block is ``s (x_temp - x_j)`` and ``y_j + z_j`` is left unchanged.
    """
    state.graph.check_node(j)
    s = state.s[j]
    if not s > 0.0:
        raise ProtocolError(f"dual step at node {j} with s = {s!r}; s must stay positive")
    w = state.y[j] + state.z[j]
    _, z_new = f.prox(s, w / s)
    state.y[j] = w - z_new
    state.z[j] = z_new
    return state


def apply_event(state: ProtocolState, ev: Event, oracles) -> ProtocolState:
    """Dispatch one protocol event and advance the iteration counter."""
    op, target = ev
    if op == "A":
        op_a(state, target)
    elif op == "B":
        op_b(state, target)
    elif op == "C":
        op_c(state, target, oracles[target])
    else:
        raise ValueError(f"unknown operation {op!r}")
    if state.r_s != 0.0 or state.r_y.any():
        raise InvariantViolation("virtual slot r became nonzero during the protocol",
                                 iteration=state.iteration, event=ev)
    state.iteration += 1
    return state


def _split_slot(state, alpha):
    n = state.n
    if alpha < 0 or alpha >= state.slot_count:
        raise IndexError(f"slot {alpha} out of range [0, {state.slot_count})")
    return (True, alpha) if alpha < n else (False, alpha - n)


def slot_mass(state: ProtocolState, alpha: int):
    """``(s_alpha, y_alpha)`` for a node, edge or the virtual slot ``R_SLOT``."""
    if alpha == R_SLOT:
        return state.r_s, state.r_y.copy()
    is_node, idx = _split_slot(state, alpha)
    if is_node:
        return float(state.s[idx]), state.y[idx].copy()
    src = state.graph.sources[idx]
    return (float(state.sigma_s[src] - state.rho_s[idx]),
            state.sigma_y[src] - state.rho_y[idx])


def _set_slot(state, alpha, s_new, y_new):
    is_node, idx = _split_slot(state, alpha)
    if is_node:
        state.s[idx] = s_new
        state.y[idx] = y_new
    else:
        src = state.graph.sources[idx]
        state.rho_s[idx] = state.sigma_s[src] - s_new
        state.rho_y[idx] = state.sigma_y[src] - y_new


def local_estimate(state: ProtocolState, alpha: int):
    """``y_alpha / s_alpha``, or ``None`` when the slot holds no mass."""
    s, y = slot_mass(state, alpha)
    if s > 0.0:
        return y / s
    return None


def op_d(state: ProtocolState, alpha: int, s_split: float) -> ProtocolState:
    """Move ``s_split`` of slot ``alpha``'s weight, with proportional ``y``, into ``r``."""
    if state.r_s != 0.0 or state.r_y.any():
        raise ProtocolError("split requires an empty virtual slot r")
    s0, y0 = slot_mass(state, alpha)
    s_split = float(s_split)
    if not 0.0 <= s_split <= s0:
        raise ProtocolError(f"split amount {s_split} outside [0, {s0}]")
    if s_split == 0.0:
        return state
    s_keep = s0 - s_split
    if s_keep == 0.0:
        _set_slot(state, alpha, 0.0, np.zeros_like(y0))
    else:
        _set_slot(state, alpha, s_keep, (s_keep / s0) * y0)
    state.r_s = s_split
    state.r_y = (s_split / s0) * y0
    return state


def op_e(state: ProtocolState, alpha2: int) -> ProtocolState:
    """Merge the virtual slot ``r`` into slot ``alpha2`` and empty ``r``."""
    if not state.r_s > 0.0:
        raise ProtocolError("combine requires positive weight in the virtual slot r")
    s0, y0 = slot_mass(state, alpha2)
    _set_slot(state, alpha2, s0 + state.r_s, y0 + state.r_y)
    state.r_s = 0.0
    state.r_y = np.zeros_like(state.r_y)
    return state


def mass_residuals(state: ProtocolState):
    """Drift of the two conserved totals.

    Returns ``(s_residual, y_residual)`` where the first is
    ``sum(s) - |V|`` over nodes, edges and ``r``, and the second is
    ``sum(y) + sum(z) - |V| m_bar`` componentwise.
    """
    g = state.graph
    y_flight = np.empty(state.dim)
    s_flight = kernels.inflight_totals(state.sigma_y, state.sigma_s, state.rho_y,
                                       state.rho_s, g.sources, y_flight)
    s_total = float(state.s.sum()) + s_flight + state.r_s
    y_total = state.y.sum(axis=0) + y_flight + state.r_y + state.z.sum(axis=0)
    return s_total - state.n, y_total - state.n * state.m_bar


def check_invariants(state: ProtocolState, tol: float = MASS_TOL, event=None) -> None:
    """Raise :class:`InvariantViolation` if any conservation law is broken."""
    s_res, y_res = mass_residuals(state)
    it = state.iteration
    if abs(s_res) > tol:
        raise InvariantViolation(f"s-mass drifted by {s_res:.3e}", it, event)
    worst = float(np.abs(y_res).max())
    if worst > tol:
        raise InvariantViolation(f"y-mass drifted by {worst:.3e}", it, event)
    if state.s.min() < -tol or state.r_s < -tol:
        raise InvariantViolation("negative node weight", it, event)
    es = state.edge_s()
    if es.size and es.min() < -tol:
        raise InvariantViolation(f"negative in-flight weight {es.min():.3e}", it, event)
    if es.size:
        empty = es == 0.0
        if empty.any() and np.abs(state.edge_y()[empty]).max() > tol:
            raise InvariantViolation("empty edge carries nonzero y", it, event)
