from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

from strategies import random_graphs
from gradedjw.graph_model import (
    Edge,
    GraphError,
    MappingGraph,
    cycle_basis,
    cycle_graph,
    gf2_rank,
    load_graph,
    path_graph,
    route,
    torus_graph,
    walk,
)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_cycle_preset(n):
    g = cycle_graph(n)
    assert g.circuit_rank() == 1
    assert all(g.degree(v) == 2 for v in g.vertices)
    assert g.vertex_order[0] == (n - 1, 0)


@pytest.mark.parametrize("lx,ly", [(2, 2), (3, 3), (2, 3)])
def test_torus_preset(lx, ly):
    g = torus_graph(lx, ly)
    assert g.n_edges == 2 * lx * ly
    assert g.circuit_rank() == lx * ly + 1
    assert g.slot_labels[0] == ("down", "left", "up", "right")
    basis = cycle_basis(g)
    assert basis.labels[-2:] == ("H", "V")
    assert len(basis.cycles) == basis.rank == g.circuit_rank()


def test_torus_slot_start_is_configurable():
    g = torus_graph(2, 2, start="up")
    assert g.slot_labels[0] == ("up", "right", "down", "left")
    with pytest.raises(GraphError):
        torus_graph(2, 2, start="north")


@pytest.mark.parametrize(
    "build",
    [
        lambda: MappingGraph((0,), (Edge(0, 0, 0),), {0: (0, 0)}),
        lambda: MappingGraph((0, 1), (Edge(1, 0, 1),), {0: (1,), 1: (1,)}),
        lambda: MappingGraph((0, 1), (Edge(0, 0, 1),), {0: (0,), 1: ()}),
        lambda: MappingGraph((0, 1, 2), (Edge(0, 0, 1),), {0: (0,), 1: (0,), 2: ()}),
        lambda: MappingGraph((0, 1), (Edge(0, 0, 1),), {0: (0,), 1: (0, 0)}),
        lambda: cycle_graph(1),
    ],
)
def test_invalid_graphs_rejected(build):
    with pytest.raises(GraphError):
        build()


def test_path_graph_has_no_cycles():
    g = path_graph(4)
    assert g.circuit_rank() == 0
    assert cycle_basis(g).cycles == ()


def test_load_graph_roundtrip(tmp_path):
    doc = {
        "vertices": ["a", "b", "c"],
        "edges": [
            {"id": 0, "tail": "a", "head": "b"},
            {"id": 1, "tail": "b", "head": "c"},
            {"id": 2, "tail": "c", "head": "a"},
            {"id": 3, "tail": "a", "head": "c"},
        ],
        "vertex_order": {"a": [2, 0, 3], "b": [0, 1], "c": [1, 2, 3]},
    }
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc))
    g = load_graph(path)
    assert g.vertices == ("a", "b", "c")
    assert g.circuit_rank() == 2
    assert g.slot("a", 3) == 3


def test_load_graph_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"vertices": [0, 1]}))
    with pytest.raises(GraphError):
        load_graph(path)


def test_route_prefers_arrows_and_low_ids():
    g = cycle_graph(4)
    assert route(g, 0, 1) == [0]
    assert route(g, 1, 3) == [1, 2]
    assert walk(g, 1, [1, 2]) == [1, 2, 3]


@given(random_graphs())
@settings(max_examples=60, deadline=None)
def test_cycle_basis_rank_equals_circuit_rank(g):
    basis = cycle_basis(g)
    assert basis.rank == g.n_edges - g.n_vertices + 1 == g.circuit_rank()
    assert gf2_rank(basis.cycles) == basis.rank
    for eids in basis.edge_sets():
        for v in g.vertices:
            touching = sum(1 for e in eids if v in (g.edge(e).tail, g.edge(e).head))
            assert touching % 2 == 0


@given(random_graphs())
@settings(max_examples=40, deadline=None)
def test_routes_connect_their_endpoints(g):
    u, v = g.vertices[0], g.vertices[-1]
    assert walk(g, u, route(g, u, v))[-1] == v
