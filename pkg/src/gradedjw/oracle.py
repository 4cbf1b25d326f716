"""Brute-force realization of mapping networks and the checks built on it.

:func:`realize` evaluates the Fock word of a network for every spin
configuration at once. The virtual occupations are fixed by the spin
configuration (each GHZ bra must annihilate exactly what the vertex states
created), so a single pass over ``2**n_spins`` basis states suffices.
:func:`realize_by_contraction` computes the same matrix a second way, by
contracting graded tensors leg by leg, and serves as its cross-check.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import graded_tensor as gt
from .algebra import (
    ExactMatrix,
    FermionMonomial,
    PauliString,
    fermion_matrix,
    fermion_parity_matrix,
    pauli_matrix,
)
from .encoder import DEFECT_SPIN, MappingNetwork, NetworkError

__all__ = [
    "BudgetExceeded",
    "Check",
    "NetworkMatrix",
    "is_isometry_on_range",
    "pauli_components",
    "realize",
    "realize_by_contraction",
    "solve_image",
    "spin_budget",
    "stabilizer_on_support",
    "table_row",
    "verification_report",
    "verify_intertwiner",
    "verify_sector",
    "verify_unitary",
]

DEFAULT_MAX_SPINS = 20
BUDGET_ENV = "GRADEDJW_BUDGET"


class BudgetExceeded(RuntimeError):
    """The network is too large for explicit realization."""


def spin_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_MAX_SPINS


@dataclass(frozen=True)
class NetworkMatrix:
    """Explicit matrix ``U = sum_s |psi_s)<s|`` of a network.

    Rows index the physical Fock basis (vertex order, most significant bit
    first) and columns index spin configurations in ``spins`` order.
    """

    matrix: ExactMatrix
    modes: tuple
    spins: tuple
    annotations: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


# --------------------------------------------------------------------------
# Fock-word realization
# --------------------------------------------------------------------------


class _Fock:
    """Vectorized action of single-mode operators on bitmask basis states."""

    def __init__(self, order: Sequence, n_states: int):
        self.pos = {m: i for i, m in enumerate(order)}
        self.n = len(order)
        if self.n > 62:
            raise BudgetExceeded("more than 62 modes")
        self.states = np.zeros(n_states, dtype=np.int64)
        self.phase = np.zeros(n_states, dtype=np.int64)
        self.alive = np.ones(n_states, dtype=bool)

    def _bitpos(self, mode) -> int:
        return self.n - 1 - self.pos[mode]

    def occ(self, mode) -> np.ndarray:
        return (self.states >> self._bitpos(mode)) & 1

    def z(self, mode, where=None) -> None:
        occ = self.occ(mode)
        self.phase += 2 * (occ if where is None else occ * where)

    def flip(self, mode, where=None, kind="X") -> None:
        """Apply ``X`` (or ``+``/``-``) where ``where`` is true."""
        bit = self._bitpos(mode)
        where = np.ones_like(self.alive) if where is None else where.astype(bool)
        occ = self.occ(mode)
        above = self.states >> (bit + 1)
        string = np.bitwise_count(above).astype(np.int64)
        if kind == "+":
            self.alive &= ~where | (occ == 0)
        elif kind == "-":
            self.alive &= ~where | (occ == 1)
        self.phase += 2 * string * where
        self.states ^= where.astype(np.int64) << bit


def _spin_bits(n_spins: int) -> np.ndarray:
    cols = np.arange(1 << n_spins, dtype=np.int64)
    shifts = np.arange(n_spins - 1, -1, -1, dtype=np.int64)
    return (cols[:, None] >> shifts[None, :]) & 1


def realize(net: MappingNetwork, budget: int | None = None) -> NetworkMatrix:
    """Exact matrix of ``net`` via its Fock word.

    Raises:
        BudgetExceeded: if the network has more spins than the budget allows.
    """
    limit = spin_budget(budget)
    ns = len(net.spins)
    if ns > limit:
        raise BudgetExceeded(f"{ns} spins exceed the budget of {limit}")
    g = net.graph
    virt = [(v, k) for v in g.vertices for k in range(1, g.degree(v) + 1)]
    order = list(g.vertices) + virt
    bits = _spin_bits(ns)
    spin_col = {lab: bits[:, i] for i, lab in enumerate(net.spins)}

    # occupation each virtual mode must have right after K
    flips = {m: np.zeros(len(bits), dtype=np.int64) for m in virt}
    for item in net.sigma:
        if item.kind == "X":
            flips[item.mode] ^= 1
        elif item.kind == "CX":
            flips[item.mode] ^= spin_col[item.control]
    occ_k = {}
    for m in virt:
        eid, _ = net.mode_edge(m)
        occ_k[m] = spin_col[eid] ^ flips[m]

    fock = _Fock(order, len(bits))
    for v in reversed(g.vertices):
        a0 = np.zeros(len(bits), dtype=np.int64)
        for k in range(1, g.degree(v) + 1):
            a0 ^= occ_k[(v, k)]
        fock.flip(v, a0, "+")
        for k in range(1, g.degree(v) + 1):
            fock.flip((v, k), occ_k[(v, k)], "+")
    for item in reversed(net.sigma):
        if item.kind == "Z":
            fock.z(item.mode)
        elif item.kind == "X":
            fock.flip(item.mode)
        elif item.kind == "CX":
            fock.flip(item.mode, spin_col[item.control])
        else:  # pragma: no cover - assemble never produces other kinds
            raise NetworkError(f"unknown sigma item {item.kind}")
    for e in reversed(g.edges):
        s = spin_col[e.id]
        fock.flip(net.leg_mode(e.id, "r"), s, "-")
        fock.flip(net.leg_mode(e.id, "l"), s, "-")

    n_phys = g.n_vertices
    virt_mask = (1 << len(virt)) - 1
    if np.any(fock.alive & ((fock.states & virt_mask) != 0)):
        raise AssertionError("virtual modes not emptied")  # pragma: no cover
    rows = fock.states >> len(virt)
    cols = np.arange(len(bits), dtype=np.int64)
    a = fock.alive
    mat = ExactMatrix.from_entries(rows[a], cols[a], fock.phase[a], (1 << n_phys, len(bits)))
    return NetworkMatrix(mat, tuple(g.vertices), tuple(net.spins), {"network": net.describe()})


# --------------------------------------------------------------------------
# independent realization by graded contraction
# --------------------------------------------------------------------------


def realize_by_contraction(net: MappingNetwork) -> NetworkMatrix:
    """Contract GHZ and vertex tensors with the graded sign rules.

    Slow; intended for networks with at most a dozen spins. The defect spin is
    handled by evaluating both of its values separately.
    """
    g = net.graph
    defect_values = (0, 1) if net.has_defect else (None,)
    n_cols = 1 << len(net.spins)
    dense = np.zeros((1 << g.n_vertices, n_cols), dtype=complex)
    for dval in defect_values:
        t = gt.GradedTensor((), {(): 1})
        for e in g.edges:
            t = gt.outer(t, gt.ghz_tensor(("s", e.id), ("l", e.id), ("r", e.id)))
        for v in g.vertices:
            d = g.degree(v)
            names = [(v, k) for k in range(d, 0, -1)] + [("p", v)]
            vt = gt.vertex_tensor(d, names)
            word = []
            for item in net.sigma:
                if item.mode[0] != v:
                    continue
                if item.kind == "CX":
                    if dval:
                        word.append((item.mode, "X"))
                else:
                    word.append((item.mode, item.kind))
            vt = gt.apply_leg_word(vt, word)
            t = gt.outer(t, vt)
            for k in range(1, d + 1):
                eid = g.slot_edge(v, k)
                side = g.edge(eid).side(v)
                t = gt.contract_self(t, (side, eid), (v, k))
        spin_pos = [t.position(("s", e.id)) for e in g.edges]
        phys_pos = [t.position(("p", v)) for v in g.vertices]
        for idx, val in t.data.items():
            row = 0
            for p in phys_pos:
                row = (row << 1) | idx[p]
            col = 0
            for p in spin_pos:
                col = (col << 1) | idx[p]
            if dval is not None:
                col = (col << 1) | dval
            dense[row, col] += val
    return NetworkMatrix(
        ExactMatrix.from_dense(dense), tuple(g.vertices), tuple(net.spins), {"method": "contraction"}
    )


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------


def _as_matrix(u) -> ExactMatrix:
    return u.matrix if isinstance(u, NetworkMatrix) else u


def _on_spins(net: MappingNetwork, p: PauliString) -> PauliString:
    if tuple(p.sites) != tuple(net.spins):
        missing = [s for s in p.sites if s not in net.spins]
        if missing:
            raise NetworkError(f"spin sites {missing} are not in the network")
        p = PauliString.from_map(net.spins, p.as_map(), p.phase)
    return p


def verify_intertwiner(net: MappingNetwork, m: FermionMonomial, p: PauliString, u=None) -> bool:
    """Exact check of ``fermion_matrix(m) U == U pauli_matrix(p)``."""
    u = _as_matrix(u if u is not None else realize(net))
    f = fermion_matrix(m, net.modes)
    s = pauli_matrix(_on_spins(net, p))
    return f @ u == u @ s


def verify_unitary(u) -> bool:
    """Exact ``U^dag U = U U^dag = 1``; non-square input is never unitary."""
    m = _as_matrix(u)
    rows, cols = m.shape
    if rows != cols:
        return False
    eye = ExactMatrix.identity(rows)
    return m.H @ m == eye and m @ m.H == eye


def is_isometry_on_range(u, scale: int | None = None) -> bool:
    """True when ``U U^dag`` is ``scale`` times a projector (exact)."""
    m = _as_matrix(u)
    gram = m @ m.H
    if gram.is_zero():
        return False
    if scale is None:
        diag = gram.re.diagonal()
        scale = int(diag[diag != 0][0])
    return gram @ gram == gram.scale(scale)


# --------------------------------------------------------------------------
# image reconstruction by projection onto the Pauli basis
# --------------------------------------------------------------------------


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    h = 1
    while h < len(v):
        v = v.reshape(-1, 2, h)
        v = np.stack((v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]), axis=1).reshape(-1)
        h *= 2
    return v


def _column_form(m: ExactMatrix) -> tuple[np.ndarray, np.ndarray] | None:
    """``(row, value)`` per column when every column has at most one entry."""
    re, im = m.re.tocsc(), m.im.tocsc()
    if np.any(np.diff(re.indptr) > 1) or np.any(np.diff(im.indptr) > 1):
        return None
    n = m.shape[1]
    rows = np.full(n, -1, dtype=np.int64)
    vals = np.zeros(n, dtype=complex)
    for part, unit in ((re, 1), (im, 1j)):
        cols = np.repeat(np.arange(n), np.diff(part.indptr))
        rows[cols] = part.indices
        vals[cols] += unit * part.data
    return rows, vals


def _xdiag(um: ExactMatrix, f: ExactMatrix, x: int) -> np.ndarray:
    """Vector ``j -> (U^dag F U)[j ^ x, j]``."""
    n = um.shape[1]
    j = np.arange(n)
    cu, cf = _column_form(um), _column_form(f)
    if cu is None or cf is None:
        mat = um.H @ f @ um
        return np.asarray(mat.re[j ^ x, j]).ravel() + 1j * np.asarray(mat.im[j ^ x, j]).ravel()
    urow, uval = cu
    frow, fval = cf
    ok = urow >= 0
    image = np.where(ok, frow[np.where(ok, urow, 0)], -2)
    coeff = np.where(ok, fval[np.where(ok, urow, 0)], 0) * uval
    partner = j ^ x
    match = (urow[partner] == image) & ok & (urow[partner] >= 0)
    return np.where(match, np.conj(uval[partner]) * coeff, 0)


def expected_x_support(net: MappingNetwork, m: FermionMonomial, route=None) -> frozenset:
    """Spins whose image letter must be X or Y, from routing alone.

    Each routed pair of odd factors flips every edge along its route; an
    unpaired factor is routed to the defect and flips the defect spin.
    """
    from .encoder import odd_routes

    sup: set = set()
    for path, to_defect in odd_routes(net, m, route):
        sup ^= set(path)
        if to_defect:
            sup ^= {DEFECT_SPIN}
    return frozenset(sup)


def solve_image(
    net: MappingNetwork,
    m: FermionMonomial,
    route=None,
    u: NetworkMatrix | None = None,
) -> PauliString:
    """Find ``p`` with ``fermion_matrix(m) U = U pauli_matrix(p)`` by projection.

    ``U^dag O U`` is expanded on the Pauli strings whose X-part is fixed by the
    routing; exactly one component must survive.

    Raises:
        NetworkError: if no or several Pauli components survive, or the
            surviving candidate fails the exact intertwining check.
    """
    um = _as_matrix(u if u is not None else realize(net))
    f = fermion_matrix(m, net.modes)
    ns = len(net.spins)
    xs = expected_x_support(net, m, route)
    x = 0
    for lab in xs:
        x |= 1 << (ns - 1 - net.spin_index(lab))
    coeffs = _walsh_hadamard(_xdiag(um, f, x))
    nz = np.flatnonzero(np.abs(coeffs) > 1e-9)
    if len(nz) != 1:
        raise NetworkError(f"projection left {len(nz)} Pauli components; expected one")
    z = int(nz[0])
    letters = []
    for i in range(ns):
        xb = (x >> (ns - 1 - i)) & 1
        zb = (z >> (ns - 1 - i)) & 1
        letters.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[xb, zb])
    bare = PauliString(tuple(net.spins), "".join(letters), 0)
    lhs = f @ um
    for k in range(4):
        cand = bare.with_phase(k)
        if lhs == um @ pauli_matrix(cand):
            return cand
    raise NetworkError("no phase makes the projected string an intertwiner")


def pauli_components(net: MappingNetwork, m: FermionMonomial, u=None) -> list[PauliString]:
    """Every Pauli string in the gauge coset of the image (small networks only)."""
    um = _as_matrix(u if u is not None else realize(net))
    f = fermion_matrix(m, net.modes)
    ns = len(net.spins)
    lhs = f @ um
    out = []
    for x in range(1 << ns):
        coeffs = _walsh_hadamard(_xdiag(um, f, x))
        for z in np.flatnonzero(np.abs(coeffs) > 1e-9):
            letters = "".join(
                "IXZY"[((x >> (ns - 1 - i)) & 1) + 2 * ((int(z) >> (ns - 1 - i)) & 1)]
                for i in range(ns)
            )
            bare = PauliString(tuple(net.spins), letters, 0)
            for k in range(4):
                if lhs == um @ pauli_matrix(bare.with_phase(k)):
                    out.append(bare.with_phase(k))
                    break
    return out


# --------------------------------------------------------------------------
# sectors and the verification report
# --------------------------------------------------------------------------


def _support_mask(net: MappingNetwork, support) -> int:
    ns = len(net.spins)
    x = 0
    for lab in support:
        x |= 1 << (ns - 1 - net.spin_index(lab))
    return x


def stabilizer_on_support(net: MappingNetwork, support, u=None) -> PauliString:
    """The signed string ``G`` with X-part on ``support`` and ``U G = U``.

    Raises:
        NetworkError: if the support carries no such string or several.
    """
    um = _as_matrix(u if u is not None else realize(net))
    ns = len(net.spins)
    x = _support_mask(net, support)
    eye = ExactMatrix.identity(um.shape[0])
    coeffs = _walsh_hadamard(_xdiag(um, eye, x))
    nz = np.flatnonzero(np.abs(coeffs) > 1e-9)
    if len(nz) != 1:
        raise NetworkError(f"support {sorted(map(str, support))} carries {len(nz)} stabilizers")
    z = int(nz[0])
    letters = "".join(
        "IXZY"[((x >> (ns - 1 - i)) & 1) + 2 * ((z >> (ns - 1 - i)) & 1)] for i in range(ns)
    )
    bare = PauliString(tuple(net.spins), letters, 0)
    for k in range(4):
        cand = bare.with_phase(k)
        if um @ pauli_matrix(cand) == um:
            return cand
    raise NetworkError("no phase makes the string a stabilizer")  # pragma: no cover


def verify_sector(net: MappingNetwork, loops: str = "intersect", u=None):
    """Parity and loop charges read directly from the explicit matrix.

    The fermion parity is ``p`` in ``P U = p U`` (``0`` when ``U`` mixes
    parities, as with a defect). For each loop, the string with that X-support
    stabilizing ``U`` is found by projection; its sign is the charge. On
    graphs that are not presets the fundamental cycles play the role of the
    loops. Twist fields are left empty.
    """
    from .encoder import SectorRecord, loop_representatives
    from .graph_model import cycle_basis

    um = _as_matrix(u if u is not None else realize(net))
    par = fermion_parity_matrix(net.graph.vertex_order) @ um
    parity = 1 if par == um else (-1 if par == -um else 0)
    g = net.graph
    if g.kind in ("cycle", "torus"):
        supports = loop_representatives(g, loops, net.origin)
    else:
        basis = cycle_basis(g)
        supports = dict(zip(basis.labels, basis.edge_sets()))
    eig = {}
    for name, eids in supports.items():
        s = stabilizer_on_support(net, eids, um)
        if s.phase % 2:
            raise NetworkError("loop stabilizer has an imaginary sign")  # pragma: no cover
        eig[name] = 1 if s.phase == 0 else -1
    return SectorRecord(parity, {}, net.bc, eig, {})


@dataclass(frozen=True)
class Check:
    """One line of a verification report."""

    name: str
    expected: str
    actual: str
    passed: bool
    certifies: str = ""

    def as_dict(self) -> dict:
        return {
            "check": self.name,
            "expected": self.expected,
            "actual": self.actual,
            "passed": self.passed,
            "certifies": self.certifies,
        }


def table_row(net: MappingNetwork) -> str:
    """Human label of the sector-table row a fixed network corresponds to."""
    from .encoder import preset_bcs

    g = net.graph
    if g.kind not in ("cycle", "torus") or net.has_defect:
        return ""
    name = "1D sector table" if g.kind == "cycle" else "torus sector table"
    return f"{name} row {preset_bcs(g).index(net.bc.ascii()) + 1}"


def verification_report(net: MappingNetwork, loops: str = "intersect") -> list[Check]:
    """Run every oracle check that applies to ``net``.

    The report covers the two realizations against each other, each
    generator image (intertwining, agreement with projection, weight bound),
    every gauge constraint, and the sector record.
    """
    from .encoder import (
        charge_sector,
        gauge_constraints,
        generators,
        map_operator,
        weight_bound,
    )

    row = table_row(net)
    checks: list[Check] = []
    u = realize(net)
    if len(net.spins) <= 12:
        same = realize_by_contraction(net).matrix == u.matrix
        checks.append(Check("realizations agree", "equal", "equal" if same else "different", same, row))
    bound = weight_bound(net.graph)
    for m in generators(net):
        label = str(m)
        try:
            p = map_operator(net, m)
        except NetworkError as exc:
            checks.append(Check(f"image of {label}", "a Pauli string", f"error: {exc}", False, row))
            continue
        ok = verify_intertwiner(net, m, p, u)
        checks.append(Check(f"intertwiner {label}", "holds", f"{p} " + ("holds" if ok else "fails"), ok, row))
        try:
            q = solve_image(net, m, u=u)
            same = q == p
            actual = str(q)
        except NetworkError as exc:
            same, actual = False, f"error: {exc}"
        checks.append(Check(f"projection {label}", str(p), actual, same, row))
        w = sum(1 for s, c in zip(p.sites, p.letters) if c != "I" and s != "d")
        checks.append(Check(f"weight {label}", f"<= {bound}", str(w), w <= bound, row))
    for i, gs in enumerate(gauge_constraints(net, loops)):
        ok = u.matrix @ pauli_matrix(gs) == u.matrix
        checks.append(Check(f"gauge constraint {i}", "U G = U", f"{gs} " + ("holds" if ok else "fails"), ok, row))
    if not net.has_defect:
        sym = charge_sector(net, loops, twists=False)
        orc = verify_sector(net, loops, u)
        exp = f"parity {sym.fermion_parity:+d} loops {_fmt_eigs(sym.spin_eigenvalues)}"
        act = f"parity {orc.fermion_parity:+d} loops {_fmt_eigs(orc.spin_eigenvalues)}"
        checks.append(Check("sector", exp, act, exp == act, row))
    return checks


def _fmt_eigs(eig: dict) -> str:
    return ",".join(f"{k}={v:+d}" for k, v in eig.items())
