import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dirdyk import build_graph, generate_problem, init_state, paper_graph  # noqa: E402
from dirdyk.protocol import R_SLOT, apply_event, Event, op_d, op_e, slot_mass  # noqa: E402


@pytest.fixture(scope="session")
def graph():
    return paper_graph()


@pytest.fixture(scope="session")
def smooth_problem(graph):
    return generate_problem("F-S", 6, graph, 0)


@pytest.fixture(scope="session")
def nonsmooth_problem(graph):
    return generate_problem("F-NS", 6, graph, 0)


@pytest.fixture(scope="session")
def consensus_problem(graph):
    return generate_problem("consensus", 1, graph, 0)


def cycle(n):
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_events(graph, rng, count):
    n, E = graph.node_count, graph.edge_count
    out = []
    for _ in range(count):
        op = "ABC"[rng.integers(3)]
        out.append(Event(op, int(rng.integers(E if op == "B" else n))))
    return out


def random_state(problem, rng, steps=None):
    """A state reached from the initial one by random A/B/C events.

    Sends are skipped once a node's weight gets tiny so weights stay well scaled.
    """
    state = init_state(problem)
    steps = int(rng.integers(0, 60)) if steps is None else steps
    for ev in random_events(problem.graph, rng, steps):
        if ev.op == "A" and state.s[ev.target] < 1e-3:
            continue
        apply_event(state, ev, problem.functions)
    return state


def random_slot(state, rng, need_mass=True):
    """A node or edge index, preferring ones that hold weight."""
    slots = range(state.slot_count)
    if need_mass:
        slots = [a for a in slots if slot_mass(state, a)[0] > 0.0]
    return int(rng.choice(list(slots)))


def random_split(state, rng):
    """Apply a random split into r; returns the source slot."""
    alpha = random_slot(state, rng)
    s0, _ = slot_mass(state, alpha)
    op_d(state, alpha, float(rng.uniform(0.0, 1.0)) * s0)
    return alpha


__all__ = ["R_SLOT", "cycle", "random_events", "random_state", "random_slot", "random_split", "op_e", "np"]


def random_spd(rng, m):
    """uu' + rI with u and r uniform on [0, 1), as the problem generator draws them."""
    u = rng.random(m)
    return np.outer(u, u) + rng.random() * np.eye(m)


def random_max2_case(rng, m=2):
    """A max-of-two-quadratics instance with a prox point and a conjugate point.

    Half of the conjugate points are drawn from the range of the subdifferential,
    so the kink branch of the conjugate is exercised as often as the smooth ones.
    """
    from dirdyk import MaxTwoQuadratics

    A = random_spd(rng, m)
    b1, b2 = rng.uniform(-1, 1, m), rng.uniform(-1, 1, m)
    c1, c2 = rng.uniform(-1, 1, 2)
    f = MaxTwoQuadratics(A, b1, c1, b2, c2)
    s = float(rng.uniform(0.5, 2.0))
    t = rng.uniform(-2, 2, m)
    if rng.random() < 0.5:
        lam = rng.random()
        z = A @ rng.uniform(-2, 2, m) + lam * b1 + (1 - lam) * b2
    else:
        z = rng.uniform(-2, 2, m)
    return f, s, t, z


ACCEPTANCE_LINES = []


def report(number, title, ok, detail):
    """Record one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
