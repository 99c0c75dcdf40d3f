from __future__ import annotations

import numpy as np
import pytest

from gibbs_lattice.graph import (
    BoundaryCondition, EdgeConfig, Graph, GraphError, SpinConfig, apply_boundary_condition,
    attach_ghost, build_box, build_torus, complete_graph, connected_components, cycle_graph,
    cycle_space_dimension, drop_ghost, even_subgraphs, fundamental_cycle_basis, grid_graph,
    incidence_matrix, is_even, named_graph, path_graph, spanning_forest,
)


def test_edge_config_roundtrip_and_algebra():
    a = EdgeConfig.from_edges([0, 2], 4)
    b = EdgeConfig.from_array([1, 1, 0, 0])
    assert a.hex() == "5"
    assert EdgeConfig.from_hex("5", 4) == a
    assert (a | b).open_edges() == [0, 1, 2]
    assert (a & b).open_edges() == [0]
    assert (a ^ b).open_edges() == [1, 2]
    assert a.n_open == 2 and a.n_closed == 2
    assert np.array_equal(a.to_array(), [1, 0, 1, 0])
    assert EdgeConfig.from_edges([0], 4).issubset(a)
    with pytest.raises(GraphError):
        EdgeConfig(16, 4)
    with pytest.raises(GraphError):
        a | EdgeConfig(0, 5)


def test_spin_config_pins_ghost():
    SpinConfig((1, -1, 1), ghost=2)
    with pytest.raises(GraphError):
        SpinConfig((1, 1, -1), ghost=2)
    with pytest.raises(GraphError):
        SpinConfig((0, 1))


def test_graph_validation():
    with pytest.raises(GraphError):
        Graph(2, ((0, 2),))
    with pytest.raises(GraphError):
        Graph(2, ((1, 1),))
    Graph(2, ((1, 1),), allow_loops=True)


def test_box_shape():
    g = build_box(2, 2)
    assert g.n_vertices == 25
    assert g.n_edges == 2 * 5 * 4
    assert len(g.boundary) == 16
    assert g.vertex((0, 0)) == 12
    assert g.dimension == 2
    assert build_box(2, 0).n_vertices == 1 and build_box(2, 0).boundary == {0}


def test_torus_shape():
    g = build_torus(2, 2)
    assert g.n_vertices == 16 and g.n_edges == 32
    assert all(g.degree(v) == 4 for v in range(16))
    assert g.periods == (4, 4)
    with pytest.raises(GraphError):
        build_torus(2, 1)


def test_ghost_attach_and_drop():
    g = cycle_graph(4)
    gg = attach_ghost(g)
    assert gg.ghost == 4 and gg.n_internal_edges == 4 and gg.n_edges == 8
    assert list(gg.ghost_edges) == [4, 5, 6, 7]
    assert list(gg.real_vertices) == [0, 1, 2, 3]
    assert drop_ghost(gg) == g
    with pytest.raises(GraphError):
        attach_ghost(gg)


def test_wired_boundary_keeps_edge_indices():
    g = build_box(1, 2)  # path -2..2, boundary {-2, 2}
    h, mapping = apply_boundary_condition(g, BoundaryCondition.wired(g))
    assert h.n_vertices == 4
    assert h.n_edges == g.n_edges
    assert mapping[0] == mapping[4]
    with pytest.raises(GraphError):
        apply_boundary_condition(g, BoundaryCondition.of([[0]]))


def test_components_and_cycle_space():
    g = complete_graph(4)
    assert connected_components(g).count == 1
    assert connected_components(g, EdgeConfig.empty(6)).count == 4
    assert cycle_space_dimension(g) == 3
    evens = even_subgraphs(g)
    assert len(evens) == 8
    assert all(is_even(g, e) for e in evens)
    # brute force: the even subsets of K4 edges are exactly these
    brute = {m for m in range(64) if is_even(g, EdgeConfig(m, 6))}
    assert brute == {e.mask for e in evens}


def test_fundamental_cycles_are_cycles():
    g = grid_graph(3, 3)
    forest = spanning_forest(g)
    assert forest.n_open == g.n_vertices - 1
    basis = fundamental_cycle_basis(g, forest)
    assert len(basis) == g.n_edges - g.n_vertices + 1
    assert all(is_even(g, c) for c in basis)


def test_incidence_matrix_rows_sum_to_two():
    g = grid_graph(3, 2)
    assert (incidence_matrix(g).sum(axis=1) == 2).all()


def test_named_graphs_and_json(tmp_path):
    for name in ("cycle4", "path6", "K4", "grid3x2", "box2:1", "torus2:2", "cycle4+ghost"):
        g = named_graph(name)
        g.save(tmp_path / "g.json")
        assert Graph.load(tmp_path / "g.json") == g
        assert Graph.load(tmp_path / "g.json").key == g.key
    assert named_graph("path6").n_vertices == 6
    with pytest.raises(GraphError):
        named_graph("dodecahedron")


def test_vertex_lookup():
    g = build_box(2, 1)
    assert g.embedding[g.vertex((1, -1))] == (1, -1)
    with pytest.raises(GraphError):
        g.vertex((5, 5))
    with pytest.raises(GraphError):
        g.vertex(99)
