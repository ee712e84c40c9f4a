import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirdyk import build_graph, is_strongly_connected, out_degree, paper_graph
from dirdyk.errors import (
    DuplicateEdgeError,
    NodeIndexError,
    NotStronglyConnectedError,
    SelfLoopError,
)
from reference import all_digraphs, strongly_connected_bruteforce


def test_paper_graph_shape():
    g = paper_graph()
    assert g.node_count == 6
    assert g.edge_count == 7
    # one-based (2,3) and (2,4) leave node 2, (4,6) leaves node 4
    assert out_degree(g, 1) == 2
    assert out_degree(g, 3) == 1


def test_isolated_node_has_zero_outdegree():
    assert out_degree(build_graph(1, []), 0) == 0


def test_edges_keep_input_order():
    g = build_graph(3, [(2, 0), (0, 1), (1, 2)])
    assert g.edges == ((2, 0), (0, 1), (1, 2))
    assert list(g.sources) == [2, 0, 1]
    assert list(g.targets) == [0, 1, 2]
    assert g.in_edges(0) == (0,)


@pytest.mark.parametrize(
    "n, edges, expected",
    [
        (6, None, True),
        (2, [(0, 1)], False),
        (1, [], True),
        (3, [(0, 1), (1, 2), (2, 0)], True),
        (3, [(0, 1), (1, 0), (1, 2)], False),
    ],
)
def test_strong_connectivity_examples(n, edges, expected):
    g = paper_graph() if edges is None else build_graph(n, edges)
    assert is_strongly_connected(g) is expected
    assert strongly_connected_bruteforce(n, g.edges) is expected


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_strong_connectivity_exhaustive_small(n):
    edge_lists, strong = all_digraphs(n)
    for edges, expected in zip(edge_lists, strong):
        assert is_strongly_connected(build_graph(n, edges)) == expected


@pytest.mark.slow
def test_strong_connectivity_exhaustive_five_nodes():
    edge_lists, strong = all_digraphs(5)
    mismatches = sum(is_strongly_connected(build_graph(5, edges)) != expected
                     for edges, expected in zip(edge_lists, strong))
    assert mismatches == 0
    assert strong.size == 1 << 20


@given(st.integers(1, 7).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                            .filter(lambda p: p[0] != p[1])))))
@settings(max_examples=200, deadline=None)
def test_outdegrees_sum_to_edge_count(case):
    n, edges = case
    g = build_graph(n, sorted(edges))
    assert sum(out_degree(g, i) for i in range(n)) == g.edge_count
    assert is_strongly_connected(g) == strongly_connected_bruteforce(n, g.edges)


def test_invalid_graphs_rejected():
    with pytest.raises(SelfLoopError):
        build_graph(2, [(0, 0)])
    with pytest.raises(DuplicateEdgeError):
        build_graph(2, [(0, 1), (0, 1)])
    with pytest.raises(NodeIndexError):
        build_graph(2, [(0, 2)])
    with pytest.raises(NodeIndexError):
        build_graph(0, [])
    with pytest.raises(IndexError):
        out_degree(paper_graph(), 6)


def test_require_strongly_connected_names_the_check():
    with pytest.raises(NotStronglyConnectedError, match="strong"):
        build_graph(2, [(0, 1)]).require_strongly_connected()


def test_graph_arrays_are_read_only():
    g = paper_graph()
    with pytest.raises(ValueError):
        g.sources[0] = 3
