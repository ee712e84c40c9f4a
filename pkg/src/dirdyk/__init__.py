"""Asynchronous dual ascent for distributed optimization on directed graphs
with delayed (never lost) communication."""
from .digraph import DirectedGraph, build_graph, is_strongly_connected, out_degree, paper_graph
from .kernels import BACKEND
from .oracles import MaxTwoQuadratics, Quadratic, Zero, conjugate, evaluate, fenchel_young_gap, prox
from .potential import (
    Diagnostics,
    consensus_spread,
    diagnostics,
    dual_objective,
    duality_gap,
    primal_objective,
    solve_reference,
    val,
    weighted_sq_dist,
)
from .problems import ProblemInstance, generate_problem, load_problem, save_problem
from .protocol import (
    Event,
    ProtocolState,
    apply_event,
    check_invariants,
    init_state,
    local_estimate,
    mass_residuals,
    op_a,
    op_b,
    op_c,
    op_d,
    op_e,
)
from .simulator import (
    AdversarialDelay,
    RoundRobinSweep,
    RunConfig,
    TraceRow,
    UniformRandom,
    check_liveness,
    run,
)

__version__ = "0.1.0"
