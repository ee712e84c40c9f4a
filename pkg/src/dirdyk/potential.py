"""Snapshot diagnostics: dual potential, duality gap, distance to the optimum.

For a snapshot with weights ``s_a``, estimates ``x_a = y_a / s_a`` over all
slots (nodes, edges and the virtual slot) and node duals ``z_i``:

* ``val = sum_i f_i*(z_i) + sum_a s_a/2 |x_a|^2`` is the dual potential the
  protocol never increases;
* ``gap = |V|/2 |x* - m_bar|^2 - |V|/2 |m_bar|^2 + sum_i f_i(x*) + val`` is
  the primal-dual gap (it relies on ``sum_a s_a = |V|``);
* ``wdist = sum_a s_a/2 |x* - x_a|^2`` is bounded above by ``gap``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, InvariantViolation
from .problems import KKT_TOL, kkt_residual

__all__ = [
    "Diagnostics",
    "val",
    "dual_objective",
    "duality_gap",
    "weighted_sq_dist",
    "consensus_spread",
    "primal_objective",
    "solve_reference",
    "diagnostics",
]

REFERENCE_MAX_ITER = 1_000_000
REFERENCE_TOL = 1e-12
RATE_SPAN = 10


@dataclass(frozen=True)
class Diagnostics:
    val: float
    duality_gap: float
    weighted_sq_dist: float
    consensus_spread: float

    @property
    def flagged(self) -> bool:
        """True when the potential is infinite (a zero function with nonzero dual)."""
        return math.isinf(self.val)


def _conjugate_sum(state, problem) -> float:
    total = 0.0
    for f, z in zip(problem.functions, state.z):
        total += f.conjugate(z)
    return total


def val(state, problem) -> float:
    g = state.graph
    total = _conjugate_sum(state, problem)
    if math.isinf(total):
        return math.inf
    total += kernels.node_energy(state.y, state.s)
    total += kernels.edge_energy(state.sigma_y, state.sigma_s, state.rho_y, state.rho_s, g.sources)
    if state.r_s > 0.0:
        xr = state.r_y / state.r_s
        total += 0.5 * state.r_s * float(xr @ xr)
    return total


def dual_objective(state, problem) -> float:
    """Dual value of the original problem attained by the snapshot."""
    return 0.5 * float(np.sum(problem.x_bar * problem.x_bar)) - val(state, problem)


def duality_gap(state, problem, x_star, val_value=None) -> float:
    x_star = np.asarray(x_star, dtype=float)
    v = val(state, problem) if val_value is None else val_value
    if math.isinf(v):
        return math.inf
    n = state.n
    m_bar = state.m_bar
    d = x_star - m_bar
    f_sum = sum(f.eval(x_star) for f in problem.functions)
    return 0.5 * n * float(d @ d) - 0.5 * n * float(m_bar @ m_bar) + f_sum + v


def weighted_sq_dist(state, x_star) -> float:
    x_star = np.ascontiguousarray(x_star, dtype=float)
    g = state.graph
    total = kernels.node_sq_dist(state.y, state.s, x_star)
    total += kernels.edge_sq_dist(state.sigma_y, state.sigma_s, state.rho_y, state.rho_s,
                                  g.sources, x_star)
    if state.r_s > 0.0:
        d = x_star - state.r_y / state.r_s
        total += 0.5 * state.r_s * float(d @ d)
    return total


def consensus_spread(state) -> float:
    """Largest distance between two node estimates."""
    return kernels.node_spread(state.y, state.s)


def diagnostics(state, problem, x_star) -> Diagnostics:
    v = val(state, problem)
    return Diagnostics(
        val=v,
        duality_gap=duality_gap(state, problem, x_star, val_value=v),
        weighted_sq_dist=weighted_sq_dist(state, x_star),
        consensus_spread=consensus_spread(state),
    )


def primal_objective(problem, x) -> float:
    x = np.asarray(x, dtype=float)
    d = x - problem.x_bar
    return sum(f.eval(x) for f in problem.functions) + 0.5 * float(np.sum(d * d))


def solve_reference(problem, max_iter: int = REFERENCE_MAX_ITER) -> np.ndarray:
    """Minimizer of the centralized problem.

    Planted optima are returned after a KKT check, consensus problems give
    the anchor mean.  Anything else is solved with a parallel proximal
    splitting loop (one prox per node term, then averaging) until the
    objective stagnates and the distance left, extrapolated from the observed
    contraction rate, is below 1e-12 relative.
    """
    if problem.known_optimum is not None:
        res = kkt_residual(problem, problem.known_optimum)
        if res > KKT_TOL:
            raise InvariantViolation(f"known optimum has KKT residual {res:.3e}")
        return problem.known_optimum.copy()
    if problem.is_consensus:
        return problem.m_bar.copy()

    # each term phi_i = f_i + 1/2|. - x_bar_i|^2; prox of phi_i with unit step
    # equals prox of f_i with weight 2 at (x_bar_i + y) / 2
    n = problem.n
    anchors = problem.x_bar
    ys = np.tile(problem.m_bar, (n, 1))
    x = problem.m_bar.copy()
    obj = primal_objective(problem, x)
    steps = []
    for _ in range(max_iter):
        p = np.array([f.prox(2.0, 0.5 * (anchors[i] + ys[i]))[0]
                      for i, f in enumerate(problem.functions)])
        p_mean = p.mean(axis=0)
        ys += 2.0 * p_mean - x - p
        x_new = p_mean
        obj_new = primal_objective(problem, x_new)
        step = float(np.linalg.norm(x_new - x))
        steps.append(step)
        if len(steps) > RATE_SPAN and abs(obj_new - obj) <= REFERENCE_TOL * max(1.0, abs(obj_new)):
            # remaining distance of a linearly contracting sequence: step * q / (1 - q)
            old = steps[-1 - RATE_SPAN]
            q = (step / old) ** (1.0 / RATE_SPAN) if old > 0.0 else 0.0
            if step == 0.0 or (q < 1.0 and step * q / (1.0 - q)
                               <= REFERENCE_TOL * max(1.0, np.linalg.norm(x_new))):
                return x_new
            del steps[:-RATE_SPAN - 1]
        x, obj = x_new, obj_new
    raise ConvergenceError(f"reference solver did not converge in {max_iter} iterations")
