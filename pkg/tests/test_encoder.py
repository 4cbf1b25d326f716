from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings

from strategies import random_graphs
from gradedjw.algebra import (
    ExactMatrix,
    FermionMonomial,
    PauliString,
    fermion_matrix,
    fermion_parity_matrix,
    monomial,
    pauli_commutes,
    pauli_matrix,
)
from gradedjw.encoder import (
    BoundaryCondition,
    DefectPlacement,
    NetworkError,
    RuleTables,
    assemble,
    charge_sector,
    gauge_constraints,
    generators,
    kw_compose,
    kw_partner,
    kw_twist,
    loop_operators,
    map_expression,
    map_operator,
    override_rules,
    twist,
    unified_boundary,
    unified_unitary,
    weight_bound,
)
from gradedjw.graph_model import cycle_graph, path_graph, torus_graph
from gradedjw.oracle import realize, verify_intertwiner, verify_unitary


def _spins(net, mapping, phase=0):
    return PauliString.from_map(net.spins, mapping, phase)


# -- boundary conditions and assembly ---------------------------------------


@pytest.mark.parametrize(
    "text,dim,ascii_",
    [
        ("I", 1, "I"),
        ("Z̃X̃", 1, "ZX"),
        ("~X", 1, "X"),
        ("ZV ZH", 2, "ZHZV"),
        ("Z_H X", 2, "ZHX"),
    ],
)
def test_boundary_condition_parse(text, dim, ascii_):
    assert BoundaryCondition.parse(text, dim).ascii() == ascii_


@pytest.mark.parametrize("text,dim", [("Y", 1), ("ZHZH", 2), ("ZQ", 2), ("", 2)])
def test_boundary_condition_parse_errors(text, dim):
    with pytest.raises(NetworkError):
        BoundaryCondition.parse(text, dim)


def test_assemble_rejects_inconsistent_requests():
    with pytest.raises(NetworkError):
        assemble(cycle_graph(4), "X", True)
    with pytest.raises(NetworkError):
        assemble(torus_graph(2, 2), "I", DefectPlacement(1, "r", True))
    with pytest.raises(NetworkError):
        assemble(path_graph(3), "Z")


def test_parity_follows_x_insertion():
    assert not assemble(cycle_graph(4), "Z").odd
    assert assemble(cycle_graph(4), "ZX").odd
    assert assemble(torus_graph(2, 2), "ZHX").odd


# -- worked examples on the chain --------------------------------------------


@pytest.mark.parametrize("n", [4, 5, 6])
def test_onsite_parity_maps_to_zz(n):
    net = assemble(cycle_graph(n), "Z")
    for i in range(n):
        m = monomial([(i, "Z")], net.graph.vertex_order)
        assert map_operator(net, m) == _spins(net, {(i - 1) % n: "Z", i: "Z"})


@pytest.mark.parametrize("n", [4, 5, 6])
def test_next_nearest_hopping_bulk_image(n):
    net = assemble(cycle_graph(n), "Z")
    order = net.graph.vertex_order
    for i in range(2, n - 1):
        m = monomial([(i - 1, "X"), (i + 1, "X")], order)
        # Z on the left edge, X in the middle and XZ = -iY on the right edge
        expected = _spins(net, {i - 2: "Z", i - 1: "X", i: "Y"}, phase=3)
        assert map_operator(net, m) == expected


def test_odd_operator_requires_defect():
    net = assemble(cycle_graph(4), "I")
    with pytest.raises(NetworkError):
        map_operator(net, monomial([(0, "X")], net.graph.vertex_order))


def test_ladder_expressions_intertwine():
    net = assemble(cycle_graph(4), "Z")
    order = net.graph.vertex_order
    u = realize(net).matrix.to_dense()
    for text in ["a†[0] a[1]", "a†[2] a[2]", "a[3] a†[0]"]:
        m = FermionMonomial.parse(text, order)
        spin = sum(c * pauli_matrix(p).to_dense() for c, p in map_expression(net, m))
        assert np.allclose(fermion_matrix(m, order).to_dense() @ u, u @ spin)


# -- gauge constraints and sectors ------------------------------------------


@pytest.mark.parametrize(
    "graph,bc",
    [(cycle_graph(4), "I"), (cycle_graph(5), "ZX"), (torus_graph(2, 2), "ZV"), (torus_graph(3, 2), "I")],
)
def test_gauge_constraints_count_and_commute(graph, bc):
    net = assemble(graph, bc)
    gauges = gauge_constraints(net)
    assert len(gauges) == graph.circuit_rank()
    images = [map_operator(net, m) for m in generators(net)]
    assert all(pauli_commutes(gs, p) for gs in gauges for p in images)


@pytest.mark.parametrize(
    "bc,parity,loop",
    [("I", 1, -1), ("Z", 1, 1), ("X", -1, 1), ("ZX", -1, -1)],
)
def test_chain_sectors(bc, parity, loop):
    rec = charge_sector(assemble(cycle_graph(5), bc))
    assert rec.fermion_parity == parity
    assert rec.spin_eigenvalues == {"loop": loop}


@pytest.mark.parametrize(
    "bc,parity,xh,xv",
    [
        ("I", 1, -1, -1),
        ("ZH", 1, -1, 1),
        ("ZV", 1, 1, -1),
        ("ZHZV", 1, 1, 1),
        ("X", -1, 1, 1),
        ("ZHX", -1, 1, -1),
        ("ZVX", -1, -1, 1),
        ("ZHZVX", -1, -1, -1),
    ],
)
def test_torus_sectors(bc, parity, xh, xv):
    rec = charge_sector(assemble(torus_graph(2, 2), bc), twists=False)
    assert (rec.fermion_parity, rec.spin_eigenvalues["H"], rec.spin_eigenvalues["V"]) == (parity, xh, xv)


@pytest.mark.parametrize("bc", ["I", "ZH", "ZV", "ZHZV"])
def test_avoiding_loops_make_odd_rows_match_even_rows(bc):
    g = torus_graph(2, 2)
    even = charge_sector(assemble(g, bc), "avoid", twists=False).spin_eigenvalues
    odd_bc = bc + "X" if bc != "I" else "X"
    odd = charge_sector(assemble(g, odd_bc), "avoid", twists=False).spin_eigenvalues
    assert even == odd


def test_loop_operator_shapes():
    net = assemble(torus_graph(2, 2), "I")
    loops = dict(loop_operators(net))
    assert str(loops["H"]) == "-XZXZIIII"
    assert str(loops["V"]) == "-IXZIIXZI"


# -- twists -----------------------------------------------------------------


@pytest.mark.parametrize(
    "bc,fermion,spin",
    [("I", "I", "I"), ("Z", "Z̃", "I"), ("X", "I", "X"), ("ZX", "Z̃", "X")],
)
def test_chain_twists(bc, fermion, spin):
    t = twist(assemble(cycle_graph(4), bc))
    assert (t.fermion_label, t.spin_label) == (fermion, spin)


def test_chain_z_twist_sits_on_the_crossed_vertex():
    t = twist(assemble(cycle_graph(5), "Z"))
    assert t.fermion_sites == (0,)


@pytest.mark.parametrize("direction,label", [("H", "Z_vX_h"), ("V", "Z_hX_v")])
def test_torus_odd_twist_is_one_unit_cell(direction, label):
    t = twist(assemble(torus_graph(2, 2), "X"), direction)
    assert t.spin_label == label
    assert t.spin.weight == 2


def test_twist_direction_errors():
    with pytest.raises(NetworkError):
        twist(assemble(cycle_graph(3), "I"), "H")
    with pytest.raises(NetworkError):
        twist(assemble(torus_graph(2, 2), "I"), "x")


# -- Kramers-Wannier composition and unified boundaries ---------------------

MATCHED = {"I": ("Z", "even"), "Z": ("I", "even"), "X": ("X", "odd"), "ZX": ("ZX", "odd")}
CHARGE_MISMATCH = {
    ("I", "I"), ("I", "X"), ("Z", "Z"), ("Z", "ZX"),
    ("X", "Z"), ("X", "ZX"), ("ZX", "I"), ("ZX", "X"),
}


@pytest.mark.parametrize("bc1", ["I", "Z", "X", "ZX"])
@pytest.mark.parametrize("bc2", ["I", "Z", "X", "ZX"])
def test_kw_composition(bc1, bc2):
    comp = kw_compose(assemble(cycle_graph(4), bc1), bc2)
    if (bc1, bc2) in CHARGE_MISMATCH:
        assert comp.zero and comp.matrix.is_zero()
    elif MATCHED[bc1][0] == bc2:
        assert comp.sector == MATCHED[bc1][1]
    else:
        assert not comp.zero and comp.sector is None


@pytest.mark.parametrize("bc1", ["I", "Z", "X", "ZX"])
def test_kw_partner(bc1):
    assert kw_partner(assemble(cycle_graph(4), bc1)) == MATCHED[bc1][0]


@pytest.mark.parametrize("bc2,expected", [("I", ("I", "I")), ("Z", ("I", "Z")), ("X", ("X", "I")), ("ZX", ("X", "Z"))])
def test_kw_twists(bc2, expected):
    assert kw_twist(5, bc2) == expected


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_unified_boundary_is_unitary_and_decomposes(n):
    g = cycle_graph(n)
    ub = unified_boundary(assemble(g, "I"))
    u = realize(ub.network).matrix
    assert verify_unitary(u)
    parts = {bc: realize(assemble(g, bc)).matrix for bc in ("I", "Z", "X", "ZX")}
    assert u.scale(2) == parts["I"] + parts["Z"] + parts["X"] - parts["ZX"]
    even = ExactMatrix.identity(1 << n) + fermion_parity_matrix(g.vertex_order)
    assert even @ u == parts["I"] + parts["Z"]


def test_unified_operator_on_chain():
    g = cycle_graph(4)
    w = unified_unitary(g)
    assert w.matrix.shape == (32, 16)
    assert w.matrix.H @ w.matrix == ExactMatrix.identity(16).scale(w.scale)
    for bits, bc in w.blocks.items():
        assert w.block(bits) == realize(assemble(g, bc)).matrix


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_unified_operator_on_torus(parity):
    g = torus_graph(2, 2)
    w = unified_unitary(g, 2, parity)
    m = w.matrix
    assert m.shape == (64, 256) and w.scale == 32
    proj = ExactMatrix.identity(16) + fermion_parity_matrix(g.vertex_order).scale(1 if parity == "even" else -1)
    assert m @ m.H == ExactMatrix.identity(4).kron(proj).scale(16)
    gram = m.H @ m
    assert gram @ gram == gram.scale(32)
    for bits, bc in w.blocks.items():
        assert w.block(bits) == realize(assemble(g, bc)).matrix


# -- rule tables and general graphs -----------------------------------------


class _FlippedPush(RuleTables):
    @staticmethod
    def push(d, op, target):
        word, sign = RuleTables.push(d, op, target)
        return word, -sign if op == "Z" else sign


def test_corrupted_rules_are_caught_by_the_oracle():
    net = assemble(cycle_graph(4), "Z")
    m = monomial([(1, "Z")], net.graph.vertex_order)
    override_rules(_FlippedPush())
    try:
        bad = map_operator(net, m)
    finally:
        override_rules(None)
    assert not verify_intertwiner(net, m, bad)
    assert verify_intertwiner(net, m, map_operator(net, m))


@given(random_graphs(max_vertices=5, max_extra=3))
@settings(max_examples=25, deadline=None)
def test_random_graph_images_intertwine_within_weight_bound(g):
    net = assemble(g, "I", True)
    u = realize(net)
    bound = weight_bound(g)
    for m in generators(net):
        p = map_operator(net, m)
        assert verify_intertwiner(net, m, p, u)
        assert sum(1 for s, c in zip(p.sites, p.letters) if c != "I" and s != "d") <= bound
