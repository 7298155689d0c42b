import itertools

import numpy as np
import pytest

from graph_dtn.graph import (
    Graph,
    GraphError,
    GraphWithBoundary,
    WeightedGraph,
    WeightSpec,
    boundary_structure,
    enumerate_cliques,
    induced_weight,
    sort_with_sign,
    subgraph_tilde,
)
from graph_dtn.lattice import LatticeSpec, build_lattice
from graph_dtn.verify import random_graph

from conftest import star


def brute_cliques(g: Graph, k: int):
    return sorted(c for c in itertools.combinations(sorted(g.vertices), k) if g.is_clique(c))


def test_graph_rejects_loops_duplicates_and_unknown_endpoints():
    with pytest.raises(GraphError, match=r"\[1, 1\]"):
        Graph.from_edges([0, 1], [(1, 1)])
    with pytest.raises(GraphError, match=r"duplicate edge \[1, 0\]"):
        Graph.from_edges([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges([0, 1], [(0, 2)])
    with pytest.raises(GraphError):
        Graph.from_edges([0, 0], [])


def test_sort_with_sign():
    assert sort_with_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert sort_with_sign((1, 0)) == ((0, 1), -1)
    assert sort_with_sign((1, 1))[1] == 0


def test_clique_examples():
    k3 = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    assert enumerate_cliques(k3, 3) == [(0, 1, 2)]
    c4 = Graph.from_edges(range(4), [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert enumerate_cliques(c4, 3) == []


def test_tessellation_unit_square_cliques():
    # o, e1, e2, e1+e2 under the standard tessellation: e1 and e2 are not adjacent.
    pts = [(0, 0), (0, 1), (1, 0), (1, 1)]
    from graph_dtn.lattice import adjacent

    edges = [(i, j) for i, j in itertools.combinations(range(4), 2) if adjacent(pts[i], pts[j], "tessellation")]
    g = Graph.from_edges(range(4), edges)
    assert len(enumerate_cliques(g, 3)) == 2
    assert enumerate_cliques(g, 4) == []


@pytest.mark.parametrize("seed", range(15))
def test_clique_enumeration_matches_brute_force(seed):
    g = random_graph(np.random.default_rng(seed), 10)
    for k in range(1, 6):
        assert enumerate_cliques(g, k) == brute_cliques(g, k)
    assert len(enumerate_cliques(g, 1)) == len(g.vertices)
    assert len(enumerate_cliques(g, 2)) == len(g.edges)


def test_normalized_weights_on_star_and_triangle():
    g = star(4)
    w0 = induced_weight(g, WeightSpec.unit_edges(g), 1)
    assert w0[(0,)] == 4 and all(w0[(i,)] == 1 for i in range(1, 5))
    assert set(induced_weight(g, WeightSpec.unit_edges(g), 2).values()) == {1.0}
    k3 = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    assert induced_weight(k3, WeightSpec.unit_edges(k3), 3) == {(0, 1, 2): 3.0}
    assert set(induced_weight(k3, WeightSpec(), 3).values()) == {1.0}


def test_normalized_weights_follow_edge_weights(rng):
    g = random_graph(rng, 9)
    spec = WeightSpec("normalized", {e: float(rng.uniform(0.5, 2)) for e in g.edges})
    w0 = induced_weight(g, spec, 1)
    for v in g.vertices:
        if g.adjacency[v]:
            assert w0[(v,)] == pytest.approx(sum(spec.edge_weight(v, u) for u in g.adjacency[v]))
    for e, w in induced_weight(g, spec, 2).items():
        assert w == pytest.approx(spec.edge_weights[e])


def test_explicit_weight_missing_and_nonpositive():
    k3 = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(GraphError, match="missing explicit weight"):
        induced_weight(k3, WeightSpec("explicit", None, {(0,): 1.0}), 1)
    with pytest.raises(GraphError):
        WeightSpec("explicit", None, {(0,): 0.0})


def test_boundary_structure_path():
    g = Graph.from_edges(range(3), [(0, 1), (1, 2)])
    bs = boundary_structure(g, [1])
    assert bs.boundary == frozenset({0, 2})
    gb = GraphWithBoundary.from_interior(g, [1])
    assert set(gb.boundary_basis(1)) == {(0, 1), (2, 1)}
    with pytest.raises(GraphError):
        boundary_structure(g, [])


def test_subgraph_tilde_drops_boundary_edges():
    tri = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    g, bs = subgraph_tilde(tri, [0])
    assert g.edges == frozenset({(0, 1), (0, 2)})
    assert bs.boundary == frozenset({1, 2})


def test_lattice_star_and_tessellation_neighbours():
    dom = build_lattice(LatticeSpec.of(2, "lattice", [(0, 0)]))
    assert len(dom.gb.bs.boundary) == 4 and len(dom.graph.edges) == 4
    tess = build_lattice(LatticeSpec.of(2, "tessellation", [(0, 0)]))
    assert len(tess.gb.bs.boundary) == 6
    assert enumerate_cliques(tess.graph, 3) == []
    two = build_lattice(LatticeSpec.of(2, "tessellation", [(0, 0), (1, 0)]))
    assert len(two.graph.vertices) == 10


@pytest.mark.parametrize("seed", range(10))
def test_boundary_cliques_have_one_boundary_vertex(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 12)
    interior = [v for v in g.vertices if rng.random() < 0.5] or [0]
    try:
        gb = GraphWithBoundary.from_interior(g, interior)
    except GraphError:
        pytest.skip("interior without neighbours")
    for k in range(4):
        for c in gb.boundary_basis(k):
            assert c[0] in gb.bs.boundary
            assert all(v in gb.bs.interior for v in c[1:])
            assert list(c[1:]) == sorted(c[1:])
        n_bdry = sum(1 for c in gb.wg.basis(k) if any(v in gb.bs.boundary for v in c))
        assert n_bdry == len(gb.boundary_basis(k))


def test_coboundary_signs():
    k3 = Graph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    wg = WeightedGraph(k3, WeightSpec())
    d1 = wg.coboundary(1).toarray()
    # d on (0,1,2): α(1,2) − α(0,2) + α(0,1)
    assert d1.tolist() == [[1, -1, 1]]
