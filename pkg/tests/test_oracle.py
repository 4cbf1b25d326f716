from __future__ import annotations

import pytest

from gradedjw.algebra import ExactMatrix, monomial
from gradedjw.encoder import assemble, charge_sector, generators, map_operator, preset_bcs
from gradedjw.graph_model import cycle_graph, path_graph, torus_graph
from gradedjw.oracle import (
    BudgetExceeded,
    is_isometry_on_range,
    pauli_components,
    realize,
    realize_by_contraction,
    solve_image,
    stabilizer_on_support,
    table_row,
    verification_report,
    verify_intertwiner,
    verify_sector,
    verify_unitary,
)

CASES = [(cycle_graph(n), bc, d) for n in (2, 3, 4) for bc in preset_bcs(cycle_graph(n)) for d in (False, True)]
CASES += [(torus_graph(2, 2), bc, False) for bc in ("I", "ZH", "ZV", "X", "ZHZVX")]
CASES += [(torus_graph(2, 2), "ZH", True), (path_graph(3), "I", True)]
CASES = [c for c in CASES if not (c[2] and "X" in c[1])]


@pytest.mark.parametrize("graph,bc,defect", CASES)
def test_two_realizations_agree(graph, bc, defect):
    net = assemble(graph, bc, defect)
    assert realize(net).matrix == realize_by_contraction(net).matrix


@pytest.mark.parametrize("bc", preset_bcs(cycle_graph(3)))
def test_matrix_layout(bc):
    net = assemble(cycle_graph(3), bc)
    u = realize(net)
    assert u.shape == (8, 8)
    # every spin configuration is sent to at most one fermion basis state
    assert (abs(u.matrix.to_dense()) > 0).sum(axis=0).max() <= 1


@pytest.mark.parametrize("graph,bc", [(cycle_graph(4), b) for b in preset_bcs(cycle_graph(4))]
                         + [(torus_graph(2, 2), b) for b in preset_bcs(torus_graph(2, 2))])
@pytest.mark.parametrize("loops", ["intersect", "avoid"])
def test_oracle_sector_matches_symbolic(graph, bc, loops):
    net = assemble(graph, bc)
    sym = charge_sector(net, loops, twists=False)
    orc = verify_sector(net, loops)
    assert (orc.fermion_parity, orc.spin_eigenvalues) == (sym.fermion_parity, sym.spin_eigenvalues)


def test_defect_network_mixes_parities():
    assert verify_sector(assemble(cycle_graph(4), "Z", True)).fermion_parity == 0


@pytest.mark.parametrize("graph,bc,defect", CASES)
def test_projection_recovers_symbolic_images(graph, bc, defect):
    net = assemble(graph, bc, defect)
    u = realize(net)
    for m in generators(net):
        assert solve_image(net, m, u=u) == map_operator(net, m)


def test_gauge_coset_contains_image():
    net = assemble(cycle_graph(3), "Z")
    m = monomial([(0, "X"), (1, "X")], net.graph.vertex_order)
    coset = pauli_components(net, m)
    assert map_operator(net, m) in coset
    assert len(coset) == 2


def test_intertwiner_rejects_wrong_sign():
    net = assemble(cycle_graph(4), "Z")
    m = monomial([(2, "Z")], net.graph.vertex_order)
    p = map_operator(net, m)
    assert verify_intertwiner(net, m, p)
    assert not verify_intertwiner(net, m, -p)


def test_unitarity_checks():
    assert verify_unitary(ExactMatrix.identity(4))
    assert not verify_unitary(ExactMatrix.zeros(2, 4))
    u = realize(assemble(cycle_graph(3), "Z"))
    assert not verify_unitary(u)
    assert is_isometry_on_range(u, 2)


def test_stabilizer_on_support_of_full_loop():
    net = assemble(cycle_graph(4), "I")
    assert str(stabilizer_on_support(net, [0, 1, 2, 3])) == "-XXXX"


def test_budget(monkeypatch):
    with pytest.raises(BudgetExceeded):
        realize(assemble(cycle_graph(6), "I"), budget=4)
    monkeypatch.setenv("GRADEDJW_BUDGET", "3")
    with pytest.raises(BudgetExceeded):
        realize(assemble(cycle_graph(4), "I"))


def test_report_certifies_table_rows():
    net = assemble(torus_graph(2, 2), "ZV")
    report = verification_report(net)
    assert all(c.passed for c in report)
    assert {c.certifies for c in report} == {"torus sector table row 3"}
    assert table_row(assemble(cycle_graph(4), "X")) == "1D sector table row 3"
