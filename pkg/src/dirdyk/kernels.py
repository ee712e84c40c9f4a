"""Kernel backend selection.

The compiled extension is used when it was built; setting the environment
variable ``DIRDYK_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

if os.environ.get("DIRDYK_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

send = _impl.send
receive = _impl.receive
node_energy = _impl.node_energy
edge_energy = _impl.edge_energy
node_sq_dist = _impl.node_sq_dist
edge_sq_dist = _impl.edge_sq_dist
inflight_totals = _impl.inflight_totals
node_spread = _impl.node_spread

__all__ = [
    "BACKEND",
    "send",
    "receive",
    "node_energy",
    "edge_energy",
    "node_sq_dist",
    "edge_sq_dist",
    "inflight_totals",
    "node_spread",
]
