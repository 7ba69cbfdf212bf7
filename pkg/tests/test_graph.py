import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semica.errors import CycleDetected, NotAPath
from semica.graph import (
    Dag,
    all_paths,
    eliminate_vertex,
    path_weight,
    reachability,
    validate_dag,
)

from .oracles import brute_reachable, enum_paths


def test_validate_dag_empty_graph_identity_order():
    order = validate_dag(Dag.from_edges(3, {}))
    assert order.positions == (0, 1, 2)


def test_validate_dag_example_order(ex1_graph):
    # expected positions (1-based): k(1)=4, k(2)=1, k(3)=2, k(4)=3
    order = validate_dag(ex1_graph)
    assert order.positions == (3, 0, 1, 2)
    perm = order.permutation_matrix()
    strictly_lower = perm @ ex1_graph.adjacency_matrix() @ perm.T
    assert np.allclose(np.triu(strictly_lower), 0.0)


def test_validate_dag_two_cycle():
    graph = Dag.from_edges(2, {(0, 1): 1.0, (1, 0): 1.0})
    with pytest.raises(CycleDetected) as err:
        validate_dag(graph)
    assert set(err.value.cycle) == {0, 1}


def test_path_weight_single_vertex(ex1_graph):
    assert path_weight(ex1_graph, [2]) == 1.0


def test_path_weight_product(ex1_graph, ex1_weights):
    # V2 -> V4 -> V1
    assert path_weight(ex1_graph, [1, 3, 0]) == pytest.approx(
        ex1_weights["b"] * ex1_weights["d"]
    )


def test_path_weight_not_a_path(ex1_graph):
    with pytest.raises(NotAPath):
        path_weight(ex1_graph, [0, 2])


def test_reachability_matches_enumeration(ex1_graph):
    reach = reachability(ex1_graph)
    edges = ex1_graph.weight_map
    for i in range(4):
        for j in range(4):
            if i != j:
                assert reach[i, j] == brute_reachable(4, edges, i, j)
    assert not reach.diagonal().any()


def test_all_paths_matches_enumeration(ex1_graph):
    got = sorted(all_paths(ex1_graph, 1, 0))
    want = sorted(enum_paths(4, ex1_graph.weight_map, 1, 0))
    assert got == want


def test_eliminate_vertex_preserves_total_effects(ex1_graph):
    # remove V3 (index 2); effects among remaining vertices are unchanged
    reduced = eliminate_vertex(ex1_graph, 2)
    keep = [0, 1, 3]
    for a, va in enumerate(keep):
        for b, vb in enumerate(keep):
            want = sum(
                np.prod([ex1_graph.weight_map[e] for e in zip(p, p[1:])])
                for p in enum_paths(4, ex1_graph.weight_map, va, vb)
            )
            got = sum(
                np.prod([reduced.weight_map[e] for e in zip(p, p[1:])])
                for p in enum_paths(3, reduced.weight_map, a, b)
            )
            assert got == pytest.approx(want, abs=1e-12)


@st.composite
def random_dags(draw):
    p = draw(st.integers(2, 7))
    edges = {}
    for i in range(p):
        for j in range(i + 1, p):
            if draw(st.booleans()):
                edges[(i, j)] = draw(
                    st.floats(0.1, 2.0, allow_nan=False, allow_infinity=False)
                )
    return Dag.from_edges(p, edges)


@given(random_dags())
@settings(max_examples=60, deadline=None)
def test_topological_order_respects_edges(graph):
    order = validate_dag(graph)
    for i, j in graph.edges:
        assert order.position(i) < order.position(j)


@given(random_dags())
@settings(max_examples=40, deadline=None)
def test_induced_order_is_consistent(graph):
    order = validate_dag(graph)
    subset = [v for v in range(graph.num_vertices) if v % 2 == 0]
    induced = order.induced(subset)
    ranks = [order.position(v) for v in subset]
    assert list(np.argsort(np.argsort(ranks))) == list(induced.positions)
