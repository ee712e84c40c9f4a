import math

import numpy as np
import pytest

from conftest import cycle, random_split, random_state
from dirdyk import (
    Quadratic,
    Zero,
    apply_event,
    build_graph,
    consensus_spread,
    diagnostics,
    dual_objective,
    duality_gap,
    generate_problem,
    init_state,
    primal_objective,
    solve_reference,
    val,
    weighted_sq_dist,
)
from dirdyk.problems import ProblemInstance, kkt_residual
from dirdyk.protocol import Event
from reference import brute_reference, literal_gap


def two_node_consensus():
    g = build_graph(2, [(0, 1), (1, 0)])
    return ProblemInstance(g, 1, (Zero(1), Zero(1)), np.array([[0.0], [2.0]]))


def optimal_state(problem):
    """Every estimate at e, node duals at the planted subgradients."""
    st = init_state(problem)
    e = problem.known_optimum
    st.y[:] = e
    for i, f in enumerate(problem.functions):
        subs = f.subgradients(e)
        st.z[i] = 0.5 * (subs[0] + subs[-1])
    return st


def test_consensus_potential_at_start_and_at_limit(consensus_problem):
    prob = consensus_problem
    st = init_state(prob)
    v0 = val(st, prob)
    assert v0 == pytest.approx(0.5 * float((prob.x_bar ** 2).sum()), rel=1e-14)
    sweep = ([Event("A", i) for i in range(6)] + [Event("B", e) for e in range(7)]
             + [Event("C", i) for i in range(6)])
    for _ in range(400):
        for ev in sweep:
            apply_event(st, ev, prob.functions)
    limit = 0.5 * prob.n * float(prob.m_bar @ prob.m_bar)
    assert val(st, prob) == pytest.approx(limit, abs=1e-9)
    assert limit <= v0


def test_two_node_consensus_gap_and_distance():
    prob = two_node_consensus()
    st = init_state(prob)
    x_star = solve_reference(prob)
    assert x_star[0] == 1.0
    assert duality_gap(st, prob, x_star) == pytest.approx(1.0, abs=1e-15)
    assert literal_gap(st, prob, x_star) == pytest.approx(1.0, abs=1e-15)
    assert weighted_sq_dist(st, x_star) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kind", ["F-S", "F-NS"])
def test_gap_vanishes_at_optimum(kind, graph):
    prob = generate_problem(kind, 6, graph, 3)
    st = optimal_state(prob)
    x_star = prob.known_optimum
    assert duality_gap(st, prob, x_star) == pytest.approx(0.0, abs=1e-8)
    assert weighted_sq_dist(st, x_star) == 0.0
    assert consensus_spread(st) == 0.0


@pytest.mark.parametrize("fixture", ["smooth_problem", "nonsmooth_problem", "consensus_problem"])
def test_simplified_gap_matches_literal_form(fixture, request):
    prob = request.getfixturevalue(fixture)
    rng = np.random.default_rng(61)
    x_star = solve_reference(prob)
    for k in range(300):
        st = random_state(prob, rng)
        if k % 3 == 0:
            random_split(st, rng)
        gap = duality_gap(st, prob, x_star)
        assert gap == pytest.approx(literal_gap(st, prob, x_star), abs=1e-10)
        # same gap through the primal and dual objectives
        alt = primal_objective(prob, x_star) - dual_objective(st, prob)
        assert gap == pytest.approx(alt, abs=1e-10)
        assert gap - weighted_sq_dist(st, x_star) >= -1e-9


def test_gap_dominates_distance_along_runs(nonsmooth_problem):
    rng = np.random.default_rng(62)
    prob = nonsmooth_problem
    st = init_state(prob)
    x_star = prob.known_optimum
    for _ in range(3000):
        op = "ABC"[rng.integers(3)]
        t = int(rng.integers(7 if op == "B" else 6))
        if op == "A" and st.s[t] < 1e-3:
            continue
        apply_event(st, Event(op, t), prob.functions)
        d = diagnostics(st, prob, x_star)
        assert d.duality_gap >= d.weighted_sq_dist - 1e-9 >= -2e-9


def test_infinite_potential_is_flagged(consensus_problem):
    st = init_state(consensus_problem)
    st.z[0] = 0.1
    st.y[0] -= 0.1
    d = diagnostics(st, consensus_problem, consensus_problem.m_bar)
    assert math.isinf(d.val) and math.isinf(d.duality_gap)
    assert d.flagged


def test_primal_objective_examples(consensus_problem, smooth_problem):
    prob = consensus_problem
    m_bar = prob.m_bar
    assert primal_objective(prob, m_bar) == pytest.approx(0.5 * float(((prob.x_bar - m_bar) ** 2).sum()))
    rng = np.random.default_rng(63)
    for p in (prob, smooth_problem):
        x_star = p.known_optimum
        best = primal_objective(p, x_star)
        for _ in range(100):
            delta = rng.normal(size=p.dim) * 10.0 ** rng.uniform(-4, 0)
            assert primal_objective(p, x_star + delta) > best


def test_reference_solution_for_generated_and_consensus(graph, smooth_problem, consensus_problem):
    x = solve_reference(smooth_problem)
    np.testing.assert_array_equal(x, np.ones(6))
    assert kkt_residual(smooth_problem, x) <= 1e-9
    np.testing.assert_array_equal(solve_reference(consensus_problem), consensus_problem.m_bar)


def test_reference_solution_random_quadratics():
    rng = np.random.default_rng(64)
    g = cycle(4)
    for _ in range(5):
        m = 3
        fs = []
        for _ in range(4):
            u = rng.random(m)
            fs.append(Quadratic(np.outer(u, u) + rng.random() * np.eye(m), rng.normal(size=m), rng.normal()))
        prob = ProblemInstance(g, m, tuple(fs), rng.normal(size=(4, m)))
        lhs = sum(f.A for f in fs) + 4 * np.eye(m)
        rhs = (prob.x_bar - np.array([f.b for f in fs])).sum(axis=0)
        exact = np.linalg.solve(lhs, rhs)
        np.testing.assert_allclose(solve_reference(prob), exact, atol=1e-10)
        np.testing.assert_allclose(brute_reference(prob), exact, atol=1e-12)


def test_reference_solution_nonsmooth_without_planted_optimum():
    g = cycle(3)
    planted = generate_problem("F-NS", 2, g, 5)
    prob = ProblemInstance(g, 2, planted.functions, planted.x_bar)
    x = solve_reference(prob)
    np.testing.assert_allclose(x, np.ones(2), atol=1e-9)
    assert kkt_residual(prob, x) <= 1e-9
