"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Part one times each kernel in isolation on the six-node test graph and on a
larger random graph.  Part two times a full nonsmooth preset run under each
backend (the fallback is forced through DIRDYK_PURE_PYTHON in a subprocess).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dirdyk import _kernels_py

try:
    from dirdyk import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def arrays(n, E, m, seed=0):
    rng = np.random.default_rng(seed)
    src = rng.integers(0, n, E).astype(np.intp)
    sigma_s = rng.random(n) + 1.0
    rho_s = sigma_s[src] * rng.random(E)
    sigma_y = rng.normal(size=(n, m))
    rho_y = sigma_y[src] * rng.random((E, 1))
    y, s = rng.normal(size=(n, m)), rng.random(n) + 0.1
    return dict(y=y, s=s, sy=sigma_y, ss=sigma_s, ry=rho_y, rs=rho_s, src=src,
                x=rng.normal(size=m), out=np.empty(m))


def calls(mod, a):
    return {
        "send": lambda: mod.send(a["y"], a["s"], a["sy"], a["ss"], 1, 1.0),
        "receive": lambda: mod.receive(a["y"], a["s"], a["sy"], a["ss"], a["ry"], a["rs"],
                                       int(a["src"][0]), 2, 0),
        "node_energy": lambda: mod.node_energy(a["y"], a["s"]),
        "edge_energy": lambda: mod.edge_energy(a["sy"], a["ss"], a["ry"], a["rs"], a["src"]),
        "node_sq_dist": lambda: mod.node_sq_dist(a["y"], a["s"], a["x"]),
        "edge_sq_dist": lambda: mod.edge_sq_dist(a["sy"], a["ss"], a["ry"], a["rs"], a["src"], a["x"]),
        "inflight_totals": lambda: mod.inflight_totals(a["sy"], a["ss"], a["ry"], a["rs"], a["src"], a["out"]),
        "node_spread": lambda: mod.node_spread(a["y"], a["s"]),
    }


def per_call_us(fn, repeat):
    number = 2000
    best = min(timeit.repeat(fn, number=number, repeat=repeat))
    return 1e6 * best / number


RUN_SCRIPT = """
import time
from dirdyk import BACKEND, run
from dirdyk.harness import preset_config
cfg = preset_config("paper-nonsmooth", "unused", 0)
p = cfg.build_problem()
t = time.perf_counter()
run(p, cfg.run)
print(BACKEND, time.perf_counter() - t)
"""


def end_to_end():
    out = {}
    for pure in (False, True):
        env = dict(os.environ)
        env.pop("DIRDYK_PURE_PYTHON", None)
        if pure:
            env["DIRDYK_PURE_PYTHON"] = "1"
        proc = subprocess.run([sys.executable, "-c", RUN_SCRIPT], env=env, capture_output=True,
                              text=True, check=True)
        backend, secs = proc.stdout.split()
        out[backend] = float(secs)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-run", action="store_true", help="only time the isolated kernels")
    args = parser.parse_args()
    if _kernels_cy is None:
        sys.exit("compiled kernels are not built; reinstall with Cython available")

    for label, shape in (("6 nodes, 7 edges, m=6", (6, 7, 6)), ("200 nodes, 800 edges, m=50", (200, 800, 50))):
        print(f"\n{label}")
        print(f"{'kernel':<17}{'cython us':>11}{'python us':>11}{'speedup':>9}")
        a_cy, a_py = arrays(*shape), arrays(*shape)
        c_cy, c_py = calls(_kernels_cy, a_cy), calls(_kernels_py, a_py)
        for name in c_cy:
            t_cy = per_call_us(c_cy[name], args.repeat)
            t_py = per_call_us(c_py[name], args.repeat)
            print(f"{name:<17}{t_cy:>11.2f}{t_py:>11.2f}{t_py / t_cy:>8.1f}x")

    if not args.skip_run:
        times = end_to_end()
        print("\npaper-nonsmooth preset, 50 000 events")
        for backend, secs in times.items():
            print(f"  {backend:<7} {secs:6.2f} s")
        print(f"  speedup {times['python'] / times['cython']:.2f}x")


if __name__ == "__main__":
    main()
