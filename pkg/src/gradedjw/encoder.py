"""Network assembly and the symbolic fermion-to-spin compiler.

A :class:`MappingNetwork` is read as the operator word ``<s| B S K`` on a Fock
space of physical and virtual modes:

* ``K`` creates, vertex by vertex, the even-parity vertex states
  ``(c_{v,d}^+)^{a_d} ... (c_{v,1}^+)^{a_1} (c_{p_v}^+)^{a_0}``;
* ``S`` holds the boundary-condition and defect operators on virtual modes,
  Z-type insertions to the left of X-type ones;
* ``B`` applies, for every edge, ``c_l^{s_e} c_r^{s_e}``, which is the GHZ
  bra ``(s_e|_l (s_e|_r`` read in Fock language.

Virtual modes are named ``(v, k)``: slot ``k`` of vertex ``v``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable

import numpy as np

from . import graded_tensor as gt
from .algebra import (
    ExactMatrix,
    FermionMonomial,
    PauliString,
    fermion_canonicalize,
    monomial,
)
from .graph_model import (
    CycleBasis,
    GraphError,
    MappingGraph,
    cycle_basis,
    torus_loops,
    walk,
)
from .graph_model import route as shortest_route

__all__ = [
    "BoundaryCondition",
    "DefectPlacement",
    "KWComposition",
    "MappingNetwork",
    "NetworkError",
    "RuleTables",
    "SectorRecord",
    "SigmaItem",
    "Twist",
    "UnifiedBoundary",
    "UnifiedOperator",
    "assemble",
    "charge_sector",
    "expand_ladders",
    "export_table",
    "gauge_constraints",
    "generators",
    "kw_compose",
    "kw_matrix",
    "kw_partner",
    "kw_twist",
    "loop_eigenvalue",
    "loop_operators",
    "loop_representatives",
    "map_expression",
    "map_operator",
    "odd_routes",
    "override_rules",
    "preset_bcs",
    "rule_tables",
    "sector_table",
    "twist",
    "unified_boundary",
    "unified_unitary",
    "weight_bound",
]

DEFECT_SPIN = "d"


class NetworkError(ValueError):
    """Inconsistent network specification or unmappable operator."""


# --------------------------------------------------------------------------
# boundary conditions and defects
# --------------------------------------------------------------------------

_BC_1D = {"I": (), "Z": ("Z",), "X": ("X",), "ZX": ("Z", "X")}
_BC_TOKEN = re.compile(r"ZH|ZV|X|I")


@dataclass(frozen=True)
class BoundaryCondition:
    """Operators inserted on virtual legs along non-contractible cycles.

    ``loop_insertions`` holds ``(cycle, op)`` pairs. On the cycle the only
    cycle name is ``"loop"``; on the torus ``"H"`` and ``"V"`` carry Z-strings
    and the X insertion sits at the defect location under the name
    ``"defect"``.
    """

    loop_insertions: tuple[tuple[str, str], ...] = ()
    convention: str = "left-of-vertex"

    @classmethod
    def parse(cls, text: str, dim: int = 1) -> "BoundaryCondition":
        """Parse ``I``, ``Z``, ``X``, ``ZX`` (1D) or tokens ``ZH``, ``ZV``, ``X`` (2D).

        Tilde or unicode decorations are ignored, so ``"Z̃X̃"`` is accepted.
        """
        clean = text.replace("̃", "").replace("~", "").replace(" ", "").replace("+", "")
        clean = clean.replace("_", "").upper()
        if dim == 1:
            if clean not in _BC_1D:
                raise NetworkError(f"unknown 1D boundary condition {text!r}")
            return cls(tuple(("loop", op) for op in _BC_1D[clean]))
        tokens = _BC_TOKEN.findall(clean)
        if "".join(tokens) != clean or not tokens:
            raise NetworkError(f"unknown 2D boundary condition {text!r}")
        tokens = [t for t in tokens if t != "I"]
        if len(set(tokens)) != len(tokens):
            raise NetworkError(f"repeated token in boundary condition {text!r}")
        ins = []
        for name in ("ZH", "ZV"):
            if name in tokens:
                ins.append((name[1], "Z"))
        if "X" in tokens:
            ins.append(("defect", "X"))
        return cls(tuple(ins))

    @property
    def has_x(self) -> bool:
        return any(op == "X" for _, op in self.loop_insertions)

    def has_z(self, cycle: str) -> bool:
        return (cycle, "Z") in self.loop_insertions

    def label(self) -> str:
        """Table spelling, e.g. ``Z̃X̃`` or ``Z̃_H Z̃_V X̃``."""
        if not self.loop_insertions:
            return "I"
        parts = []
        for cyc, op in self.loop_insertions:
            sym = op + "̃"
            parts.append(sym if cyc in ("loop", "defect") else f"{sym}_{cyc}")
        sep = "" if all(c in ("loop",) for c, _ in self.loop_insertions) else " "
        return sep.join(parts)

    def ascii(self) -> str:
        if not self.loop_insertions:
            return "I"
        out = []
        for cyc, op in self.loop_insertions:
            out.append(op if cyc in ("loop", "defect") else op + cyc)
        return "".join(out)


@dataclass(frozen=True)
class DefectPlacement:
    """Location of the controlled-X defect, ``sum |a+c)(a| <c|``.

    ``side`` names the GHZ leg of ``edge`` whose virtual mode carries the
    coupling; the control is an extra spin labelled ``"d"``.
    """

    edge: int | None = None
    side: str = "r"
    present: bool = False

    @classmethod
    def none(cls) -> "DefectPlacement":
        return cls(None, "r", False)


@dataclass(frozen=True)
class SigmaItem:
    """One operator of the word ``S``: ``Z``, ``X`` or ``CX`` on a virtual mode."""

    kind: str
    mode: tuple
    control: Hashable = None


@dataclass(frozen=True)
class MappingNetwork:
    graph: MappingGraph
    bc: BoundaryCondition
    defect: DefectPlacement
    sigma: tuple[SigmaItem, ...]
    spins: tuple
    origin: tuple[int, ...] = (0, 0)

    @property
    def modes(self) -> tuple:
        return self.graph.vertices

    @property
    def odd(self) -> bool:
        """True when the network intertwines the odd fermionic sector."""
        return self.bc.has_x

    @property
    def has_defect(self) -> bool:
        return self.defect.present

    def leg_mode(self, eid: int, side: str) -> tuple:
        """Virtual mode ``(v, k)`` holding GHZ leg ``side`` of edge ``eid``."""
        e = self.graph.edge(eid)
        v = e.tail if side == "l" else e.head
        return (v, self.graph.slot(v, eid))

    def mode_edge(self, mode: tuple) -> tuple[int, str]:
        v, k = mode
        eid = self.graph.slot_edge(v, k)
        return eid, self.graph.edge(eid).side(v)

    def spin_index(self, label) -> int:
        return self.spins.index(label)

    def describe(self) -> str:
        g = self.graph
        shape = "x".join(map(str, g.dims)) if g.dims else f"{g.n_vertices}v"
        d = f" defect={g.edge_label(self.defect.edge)}{self.defect.side}" if self.has_defect else ""
        return f"{g.kind or 'graph'}({shape}) bc={self.bc.ascii()}{d}"


def default_defect_edge(graph: MappingGraph, origin=(0, 0)) -> int:
    """Edge whose ``r`` leg sits in slot ``a_1``-side left of the origin vertex."""
    if graph.kind == "cycle":
        n = graph.dims[0]
        return (origin[0] - 1) % n
    if graph.kind == "torus":
        x0, y0 = origin
        return graph.h_edge(x0 - 1, y0)
    return graph.edges[0].id


def assemble(
    graph: MappingGraph,
    bc: BoundaryCondition | str = "I",
    defect: DefectPlacement | bool | None = None,
    origin: tuple[int, ...] | None = None,
) -> MappingNetwork:
    """Place boundary-condition strings and the optional defect on ``graph``.

    Args:
        graph: A preset cycle or torus, or any graph without Z-string
            insertions.
        bc: Boundary condition, as an object or in text form.
        defect: ``True`` for the preset location, a :class:`DefectPlacement`,
            or ``None``/``False`` for none.
        origin: Vertex coordinates where strings cross; ``(v0,)`` on cycles
            and ``(x0, y0)`` on tori.

    Returns:
        The assembled network. Its parity is odd iff an X insertion is present.
    """
    dim = 2 if graph.kind == "torus" else 1
    if isinstance(bc, str):
        bc = BoundaryCondition.parse(bc, dim)
    if origin is None:
        origin = (0, 0) if dim == 2 else (0,)
    if isinstance(defect, bool) or defect is None:
        defect = (
            DefectPlacement(default_defect_edge(graph, origin), "r", True)
            if defect
            else DefectPlacement.none()
        )
    if defect.present:
        if defect.edge is None or not 0 <= defect.edge < graph.n_edges:
            raise NetworkError("defect edge does not exist")
        if defect.side not in ("l", "r"):
            raise NetworkError("defect side must be 'l' or 'r'")
        if graph.kind == "torus" and (defect.edge % 2 == 1 or defect.side != "r"):
            raise NetworkError("on tori the defect sits on the right leg of a horizontal edge")
    if bc.has_x and defect.present:
        raise NetworkError("a fixed X boundary and a controlled defect cannot coexist")
    ops = [op for _, op in bc.loop_insertions]
    if ops.count("X") > 1:
        raise NetworkError("at most one X insertion is allowed")

    def mode_of(eid, side):
        e = graph.edge(eid)
        v = e.tail if side == "l" else e.head
        return (v, graph.slot(v, eid))

    z_modes: list[tuple] = []
    x_mode = None
    if bc.loop_insertions and graph.kind not in ("cycle", "torus"):
        raise NetworkError("boundary insertions require a preset graph")
    if graph.kind == "cycle":
        if any(c != "loop" for c, _ in bc.loop_insertions):
            raise NetworkError("1D boundary conditions use the single 'loop' cycle")
        seam = mode_of(default_defect_edge(graph, origin), "r")
        for _, op in bc.loop_insertions:
            if op == "Z":
                z_modes.append(seam)
            elif op == "X":
                x_mode = seam
    elif graph.kind == "torus":
        lx, ly = graph.dims
        x0, y0 = origin
        for cyc, op in bc.loop_insertions:
            if cyc == "V" and op == "Z":
                z_modes += [mode_of(graph.h_edge(x0 - 1, y), "r") for y in range(ly)]
            elif cyc == "H" and op == "Z":
                z_modes += [mode_of(graph.v_edge(x, y0 - 1), "r") for x in range(lx)]
            elif cyc == "defect" and op == "X":
                x_mode = mode_of(default_defect_edge(graph, origin), "r")
            else:
                raise NetworkError(f"unsupported insertion {(cyc, op)}")
    sigma = [SigmaItem("Z", m) for m in sorted(z_modes)]
    if x_mode is not None:
        sigma.append(SigmaItem("X", x_mode))
    spins: tuple = tuple(e.id for e in graph.edges)
    if defect.present:
        sigma.append(SigmaItem("CX", mode_of(defect.edge, defect.side), DEFECT_SPIN))
        spins = spins + (DEFECT_SPIN,)
    return MappingNetwork(graph, bc, defect, tuple(sigma), spins, tuple(origin))


# --------------------------------------------------------------------------
# frozen rule tables, derived once from graded_tensor enumeration
# --------------------------------------------------------------------------


_NAME_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "ZX": (1, 1)}
_BITS_NAME = {v: k for k, v in _NAME_BITS.items()}


class RuleTables:
    """Read-only cache of push-through and absorption rules.

    Every entry is computed on first use by brute-force enumeration over the
    graded tensors and never changes afterwards. Tests may install a
    corrupted copy through :func:`override_rules` to check that verification
    catches bad rules.
    """

    def __init__(self):
        self._ghz: dict = {}

    @staticmethod
    @lru_cache(maxsize=None)
    def push(d: int, op: str, target: int) -> tuple[tuple[tuple[int, int, int], ...], int]:
        rule = gt.vertex_symmetry_push(d, op, target)
        word = tuple((k,) + _NAME_BITS[name] for k, name in rule.ops)
        return word, rule.sign

    @staticmethod
    @lru_cache(maxsize=None)
    def pass_through(d: int, j: int, k: int) -> tuple[tuple[tuple[int, int, int], ...], int]:
        """Identity word carrying X on slots ``j`` and ``k`` (``X_j X_k ... T = T``)."""
        if j == k:
            return ((j, 1, 0), (j, 1, 0)), 1
        z_legs, sign = gt.vertex_symmetry(d, {j, k})
        word = gt._vertex_word(d, {j, k}, set(z_legs))
        return tuple((int(n[1:]),) + _NAME_BITS[o] for n, o in word), sign

    def ghz(self, l_bits: tuple[int, int], r_bits: tuple[int, int]) -> tuple[str, int]:
        key = (l_bits, r_bits)
        if key not in self._ghz:
            self._ghz[key] = gt.ghz_rule(_BITS_NAME[l_bits], _BITS_NAME[r_bits])
        return self._ghz[key]


_RULES = RuleTables()


def rule_tables() -> RuleTables:
    return _RULES


def override_rules(tables: RuleTables | None) -> None:
    """Install replacement rule tables (``None`` restores the derived ones)."""
    global _RULES
    _RULES = tables if tables is not None else RuleTables()


# --------------------------------------------------------------------------
# the symbolic word engine
# --------------------------------------------------------------------------


@dataclass
class _Word:
    """``sign * spin_ops`` times virtual items ``[(mode, x, z), ...]``.

    Items are written left to right; an item ``(m, x, z)`` stands for
    ``Z_m^z X_m^x``.
    """

    net: MappingNetwork
    items: list = field(default_factory=list)
    phase: int = 0  # power of i
    z_pre: int = 0  # Z on the defect spin, left of x_d
    x_d: int = 0  # X on the defect spin from absorbing an X into CX
    z_d: int = 0  # Z on the defect spin, right of x_d

    def flip(self, cond: int | bool = True) -> None:
        if cond:
            self.phase = (self.phase + 2) % 4

    @staticmethod
    def parity(items) -> int:
        return sum(x for _, x, _ in items) % 2


def odd_routes(net: MappingNetwork, m: FermionMonomial, route=None) -> list[tuple[list[int], bool]]:
    """Routing plan for the odd factors of ``m``.

    Odd factors are paired in monomial order; each pair is joined by a path
    and an unpaired factor is joined to the head of the defect edge. ``route``
    overrides the paths: a flat list of edge ids for a single path or a list
    of such lists, one per path.

    Returns:
        ``(edge path, ends_at_defect)`` for every path, in pairing order.
    """
    g = net.graph
    odd = [mode for mode, op in m.factors if op in ("X", "+", "-")]
    ends = [(odd[i], odd[i + 1], False) for i in range(0, len(odd) - 1, 2)]
    if len(odd) % 2:
        if not net.has_defect:
            raise NetworkError("odd operators need a network with a defect")
        ends.append((odd[-1], g.edge(net.defect.edge).head if net.defect.side == "r"
                     else g.edge(net.defect.edge).tail, True))
    if route is not None:
        paths = [list(route)] if route and not isinstance(route[0], (list, tuple)) else [list(r) for r in route]
        if not route:
            paths = [[]]
        if len(paths) != len(ends):
            raise NetworkError(f"expected {len(ends)} routes, got {len(paths)}")
    else:
        paths = [shortest_route(g, u, v) for u, v, _ in ends]
    for (u, v, _), path in zip(ends, paths):
        try:
            end = walk(g, u, path)[-1]
        except GraphError as exc:
            raise NetworkError(f"route {path} is not a walk from {u!r}") from exc
        if end != v:
            raise NetworkError(f"route {path} from {u!r} ends at {end!r}, not {v!r}")
    return [(path, flag) for path, (_, _, flag) in zip(paths, ends)]


def _vertex_items(v, word) -> list:
    return [((v, k), x, z) for k, x, z in word]


def _merge(a, b):
    """Product of two items on one mode: ``Z^z1 X^x1 Z^z2 X^x2``."""
    (m, x1, z1), (_, x2, z2) = a, b
    return (m, x1 ^ x2, z1 ^ z2), (x1 & z2)


def _sort_items(word: _Word, key) -> None:
    """Stable insertion sort with the graded exchange sign; merges equal modes."""
    items = list(word.items)
    for i in range(1, len(items)):
        j = i
        while j > 0 and key(items[j - 1]) > key(items[j]):
            word.flip(items[j - 1][1] & items[j][1])
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    merged: list = []
    for it in items:
        if merged and merged[-1][0] == it[0]:
            new, neg = _merge(merged[-1], it)
            word.flip(neg)
            merged[-1] = new
        else:
            merged.append(it)
    word.items = [it for it in merged if it[1] or it[2]]


def _pass_sigma(word: _Word, start: int = 0) -> None:
    """Move ``items[start:]`` left past every item of the network's S word."""
    for sig in reversed(word.net.sigma):
        for mode, x, z in word.items[start:]:
            same = mode == sig.mode
            if sig.kind == "Z":
                word.flip(x if same else 0)
            elif sig.kind == "X":
                word.flip(z if same else x)
            elif sig.kind == "CX":
                word.z_d ^= z if same else x


def _absorb_defect(word: _Word) -> None:
    """Move one X on the defect mode next to CX and absorb it as ``X_d``."""
    net = word.net
    dmode = net.leg_mode(net.defect.edge, net.defect.side)
    idx = next((i for i, it in enumerate(word.items) if it[0] == dmode and it[1]), None)
    if idx is None:
        raise NetworkError("no X operator reached the defect")
    mode, x, z = word.items[idx]
    for other in word.items[:idx]:
        word.flip(other[1] & x)
    # Z^z X = (-1)^z X Z^z
    word.flip(z)
    rest = word.items[:idx] + word.items[idx + 1:]
    word.items = ([(mode, 0, z)] if z else []) + rest
    # CX . X_m = X_d . CX ; later Z_d factors are evaluated right of X_d
    word.x_d ^= 1




def _plan_targets(net: MappingNetwork, m: FermionMonomial, plan) -> tuple[dict, list]:
    """Slot receiving each odd factor, plus pass-through insertions ``(w, j, k)``."""
    g = net.graph
    odd_idx = [i for i, (_, op) in enumerate(m.factors) if op == "X"]
    targets: dict[int, int] = {}
    inserts: list[tuple] = []

    def bridge(verts, path):
        for i in range(1, len(path)):
            w = verts[i]
            inserts.append((w, g.slot(w, path[i - 1]), g.slot(w, path[i])))

    for p, (path, to_defect) in enumerate(plan):
        if not to_defect:
            a, b = odd_idx[2 * p], odd_idx[2 * p + 1]
            u, v = m.factors[a][0], m.factors[b][0]
            if not path:
                targets[a] = targets[b] = 1
                continue
            verts = walk(g, u, path)
            targets[a] = g.slot(u, path[0])
            targets[b] = g.slot(v, path[-1])
            bridge(verts, path)
        else:
            a = odd_idx[-1]
            u = m.factors[a][0]
            w, dslot = net.leg_mode(net.defect.edge, net.defect.side)
            if not path:
                targets[a] = dslot
                continue
            verts = walk(g, u, path)
            targets[a] = g.slot(u, path[0])
            bridge(verts, path)
            inserts.append((w, g.slot(w, path[-1]), dslot))
    return targets, inserts


def push_monomial(net: MappingNetwork, m: FermionMonomial, route=None) -> _Word:
    """Rewrite ``m U`` as a signed word of virtual items sitting right of ``B``.

    On return the items have passed ``S``, are sorted by edge and merged per
    mode, and the defect spin operators generated on the way are recorded.
    """
    g = net.graph
    rules = rule_tables()
    word = _Word(net)
    word.flip(m.sign < 0)
    plan = odd_routes(net, m, route)
    targets, inserts = _plan_targets(net, m, plan)
    # the physical operator first moves right past S
    for sig in net.sigma:
        if sig.kind == "X":
            word.flip(m.parity)
        elif sig.kind == "CX":
            word.z_pre ^= m.parity
    # then through the vertex tensors, rightmost factor first
    for i in reversed(range(len(m.factors))):
        v, op = m.factors[i]
        odd = op == "X"
        new, sign = rules.push(g.degree(v), op, targets.get(i, 1))
        word.flip(odd and _Word.parity(word.items))
        word.flip(sign < 0)
        word.items = word.items + _vertex_items(v, new)
    for w, j, k in inserts:
        new, sign = rules.pass_through(g.degree(w), j, k)
        word.flip(sign < 0)
        word.items = word.items + _vertex_items(w, new)
    if any(flag for _, flag in plan):
        _absorb_defect(word)
    _pass_sigma(word)

    def key(item):
        eid, side = net.mode_edge(item[0])
        return (eid, side == "r")

    _sort_items(word, key)
    return word


def _bra_string(net: MappingNetwork, word: _Word) -> PauliString:
    """Spin operator ``P`` with ``<s| B R = <s| P B`` (acting on spin bras)."""
    rules = rule_tables()
    per_edge: dict[int, dict[str, tuple[int, int]]] = {}
    for mode, x, z in word.items:
        eid, side = net.mode_edge(mode)
        per_edge.setdefault(eid, {})[side] = (x, z)
    letters = {}
    phase = word.phase
    for eid, legs in per_edge.items():
        lb, rb = legs.get("l", (0, 0)), legs.get("r", (0, 0))
        if lb[0] != rb[0]:
            raise NetworkError(f"unpaired X on edge {eid}; the operator does not map")
        letter, k = rules.ghz(lb, rb)
        phase += k
        if letter != "I":
            letters[eid] = letter
    # bra-side defect string Z^pre X^x Z^post acts on kets as Z^post X^x Z^pre
    if word.z_d and word.x_d:
        phase += 2
    z_total = word.z_pre ^ word.z_d
    if word.x_d or z_total:
        if not net.has_defect:
            raise NetworkError("defect operators generated without a defect")  # pragma: no cover
        if word.x_d and z_total:
            letters[DEFECT_SPIN] = "Y"  # X Z = -i Y
            phase += 3
        else:
            letters[DEFECT_SPIN] = "X" if word.x_d else "Z"
    return PauliString.from_map(net.spins, letters, phase % 4)


def _check_operator(net: MappingNetwork, m: FermionMonomial) -> None:
    unknown = [mode for mode, _ in m.factors if mode not in net.modes]
    if unknown:
        raise NetworkError(f"operator touches modes {unknown} that are not in the graph")
    if m.parity and not net.has_defect:
        raise NetworkError("odd operator on a network without a defect")


def map_operator(net: MappingNetwork, m: FermionMonomial, route=None) -> PauliString:
    """Spin image ``p`` of a Pauli-type fermion monomial.

    The result satisfies ``fermion_matrix(m) U = U pauli_matrix(p)`` for the
    network matrix ``U``. Images are defined up to gauge; the representative
    returned is the one whose X-part follows ``route`` (default: shortest
    paths, see :func:`odd_routes`).

    Raises:
        NetworkError: odd operator without defect, unknown modes, or ladder
            operators (use :func:`map_expression` for those).
    """
    if not m.is_pauli_type:
        raise NetworkError("ladder operators expand to sums; use map_expression")
    _check_operator(net, m)
    word = push_monomial(net, m, route)
    return _bra_string(net, word)


def expand_ladders(m: FermionMonomial) -> list[tuple[complex, FermionMonomial]]:
    """Write ``m`` as a sum of Pauli-type monomials.

    Uses ``c^+ = (X + X Z)/2`` and ``c = (X - X Z)/2``.
    """
    terms: list[tuple[complex, tuple]] = [(complex(m.sign), ())]
    for mode, op in m.factors:
        nxt = []
        for coeff, facs in terms:
            if op in ("X", "Z"):
                nxt.append((coeff, facs + ((mode, op),)))
            else:
                sgn = 1 if op == "+" else -1
                nxt.append((coeff / 2, facs + ((mode, "X"),)))
                nxt.append((coeff * sgn / 2, facs + ((mode, "X"), (mode, "Z"))))
        terms = nxt
    return [(c, FermionMonomial(f, m.modes, 1)) for c, f in terms]


def map_expression(net: MappingNetwork, m: FermionMonomial, route=None) -> list[tuple[complex, PauliString]]:
    """Image of a monomial with ladder operators as ``[(coefficient, string)]``.

    Strings are returned with phase ``+1``; the phase is folded into the
    coefficient. Equal strings are combined and zero terms dropped.
    """
    _check_operator(net, m)
    acc: dict[str, tuple[complex, PauliString]] = {}
    for coeff, term in expand_ladders(m):
        p = map_operator(net, term, route)
        bare = p.with_phase(0)
        total = coeff * p.coefficient
        prev = acc.get(bare.letters, (0, bare))[0]
        acc[bare.letters] = (prev + total, bare)
    return [(c, p) for c, p in acc.values() if c != 0]


# --------------------------------------------------------------------------
# gauge constraints and loop operators
# --------------------------------------------------------------------------



def closed_walk(g: MappingGraph, eids) -> tuple[object, list[int]]:
    """Order the edges of a simple cycle into a closed walk ``(start, path)``."""
    remaining = list(eids)
    if not remaining:
        raise NetworkError("empty cycle")
    first = g.edge(remaining.pop(0))
    start, cur = first.tail, first.head
    path = [first.id]
    while remaining:
        nxt = next((e for e in remaining if cur in (g.edge(e).tail, g.edge(e).head)), None)
        if nxt is None:
            raise NetworkError(f"edges {list(eids)} do not form a closed walk")
        remaining.remove(nxt)
        path.append(nxt)
        cur = g.edge(nxt).other(cur)
    if cur != start:
        raise NetworkError(f"edges {list(eids)} do not form a closed walk")
    return start, path


def loop_stabilizer(net: MappingNetwork, start, path) -> PauliString:
    """Signed spin string ``G`` with ``U G = U`` carried by a closed walk.

    The identity is rewritten at every vertex of the walk as the vertex
    symmetry carrying X through that vertex, and the resulting virtual word is
    pushed up to the spins.
    """
    g = net.graph
    rules = rule_tables()
    word = _Word(net)
    verts = walk(g, start, path)
    if verts[-1] != start:
        raise NetworkError("walk is not closed")
    for i, w in enumerate(verts[:-1]):
        j = g.slot(w, path[i - 1])
        k = g.slot(w, path[i])
        new, sign = rules.pass_through(g.degree(w), j, k)
        word.flip(sign < 0)
        word.items = word.items + _vertex_items(w, new)
    _pass_sigma(word)

    def key(item):
        eid, side = net.mode_edge(item[0])
        return (eid, side == "r")

    _sort_items(word, key)
    return _bra_string(net, word)


def gauge_constraints(net: MappingNetwork, loops: str = "intersect") -> list[PauliString]:
    """One signed constraint per independent cycle, ``U G = U`` for each.

    On tori the list holds the ``Lx*Ly - 1`` plaquettes followed by the
    horizontal and vertical loops (see :func:`loop_operators`).
    """
    g = net.graph
    basis: CycleBasis = cycle_basis(g)
    out = []
    for label, eids in zip(basis.labels, basis.edge_sets()):
        if g.kind == "torus" and label in ("H", "V"):
            continue
        start, path = closed_walk(g, eids)
        out.append(loop_stabilizer(net, start, path))
    if g.kind == "torus":
        out.extend(s for _, s in loop_operators(net, loops))
    return out


def loop_representatives(g: MappingGraph, loops: str = "intersect", origin=(0, 0)) -> dict[str, list[int]]:
    """Edge sets of the non-contractible loops used as charge operators.

    ``"intersect"`` picks the row and column through the origin, which meet
    the defect location; ``"avoid"`` shifts both by one lattice unit.
    """
    if loops not in ("intersect", "avoid"):
        raise NetworkError("loops must be 'intersect' or 'avoid'")
    if g.kind == "cycle":
        return {"loop": [e.id for e in g.edges]}
    if g.kind != "torus":
        raise NetworkError("loop representatives are defined for presets only")
    shift = 0 if loops == "intersect" else 1
    return torus_loops(g, origin[0] + shift, origin[1] + shift)


def loop_operators(net: MappingNetwork, loops: str = "intersect") -> list[tuple[str, PauliString]]:
    """Signed loop stabilizers ``(name, G)``; the sign of ``G`` is the charge."""
    g = net.graph
    out = []
    for name, eids in loop_representatives(g, loops, net.origin).items():
        if g.kind == "cycle":
            start, path = 0, list(eids)
        else:
            start, path = closed_walk(g, eids)
        out.append((name, loop_stabilizer(net, start, path)))
    return out


def loop_eigenvalue(p: PauliString) -> int:
    """Charge read off a signed loop string (its phase, which is real)."""
    if p.phase % 2:
        raise NetworkError("loop operator has an imaginary phase")  # pragma: no cover
    return 1 if p.phase == 0 else -1


# --------------------------------------------------------------------------
# charge sectors and twists
# --------------------------------------------------------------------------

_TILDE = "̃"


@dataclass(frozen=True)
class Twist:
    """Operators picked up when the network is translated by one unit.

    The translated network equals ``F U S`` times ``i**phase``, where ``F`` is
    a product of fermionic Z̃ on ``fermion_sites`` and ``S`` is the spin string
    ``spin`` (``None`` for the identity).
    """

    direction: str
    fermion_label: str
    fermion_sites: tuple = ()
    spin_label: str = "I"
    spin: PauliString | None = None
    phase: int = 0


@dataclass(frozen=True)
class SectorRecord:
    """One row of the sector table for a boundary condition.

    ``fermion_twists`` and ``spin_twists`` map a translation direction
    (``"x"`` on cycles, ``"H"``/``"V"`` on tori) to a table label. They are
    empty when the graph is not a preset.
    """

    fermion_parity: int
    fermion_twists: dict
    bc: BoundaryCondition
    spin_eigenvalues: dict
    spin_twists: dict


def _translation_candidates(net: MappingNetwork, direction: str):
    """New origin, crossed fermions and candidate spin unit cells."""
    g = net.graph
    if g.kind == "cycle":
        if direction != "x":
            raise NetworkError("cycles are translated in direction 'x'")
        (v0,) = net.origin
        cells = [{e.id: "X"} for e in g.edges]
        return ((v0 + 1) % g.n_vertices,), [v0], cells
    if g.kind != "torus":
        raise NetworkError("twists are computed for preset graphs only")
    lx, ly = g.dims
    x0, y0 = net.origin
    cells = []
    if direction == "H":
        for x in range(lx):
            for y in range(ly):
                for dx, dy in ((0, 0), (1, 0), (0, -1), (1, -1)):
                    cells.append({g.h_edge(x, y): "X", g.v_edge(x + dx, y + dy): "Z"})
        return ((x0 + 1) % lx, y0), [g.site(x0, y) for y in range(ly)], cells
    if direction == "V":
        for x in range(lx):
            for y in range(ly):
                for dx, dy in ((-1, 0), (-1, 1), (0, 0), (0, 1)):
                    cells.append({g.v_edge(x, y): "X", g.h_edge(x + dx, y + dy): "Z"})
        return (x0, (y0 + 1) % ly), [g.site(x, y0) for x in range(lx)], cells
    raise NetworkError("torus directions are 'H' and 'V'")


def _fermion_twist_label(g: MappingGraph, direction: str, present: bool) -> str:
    if not present:
        return "I"
    if g.kind == "cycle":
        return "Z" + _TILDE
    return "Z" + _TILDE + ("_{p_V}" if direction == "H" else "_{p_H}")


def _spin_twist_label(g: MappingGraph, s: PauliString | None) -> str:
    if s is None:
        return "I"
    parts = []
    for site, letter in zip(s.sites, s.letters):
        if letter == "I":
            continue
        kind = "h" if g.kind == "torus" and site % 2 == 0 else "v"
        parts.append((letter, kind))
    if g.kind == "cycle":
        return "".join(letter for letter, _ in parts)
    parts.sort(key=lambda p: p[0] != "Z")
    return "".join(f"{letter}_{kind}" for letter, kind in parts)


def twist(net: MappingNetwork, direction: str | None = None) -> Twist:
    """Twist picked up by translating ``net`` one unit in ``direction``.

    The translated network is assembled with the origin shifted and compared
    exactly with ``F U S`` for the crossed fermionic Z̃ string ``F`` (or the
    identity) and single spin unit cells ``S`` (or the identity). The first
    match in that order is returned.
    """
    from .algebra import fermion_matrix, monomial, pauli_matrix
    from .oracle import realize

    g = net.graph
    if direction is None:
        direction = "x" if g.kind == "cycle" else "H"
    new_origin, crossed, cells = _translation_candidates(net, direction)
    moved = assemble(g, net.bc, net.defect.present, origin=new_origin)
    u = realize(net).matrix
    target = realize(moved).matrix
    order = g.vertex_order
    f_options = [((), None), (tuple(crossed), fermion_matrix(monomial([(v, "Z") for v in crossed], order), order))]
    s_options = [None] + [PauliString.from_map(net.spins, c) for c in cells]
    for sites, f in f_options:
        fu = u if f is None else f @ u
        for s in s_options:
            cand = fu if s is None else fu @ pauli_matrix(s)
            for k in range(4):
                if target == cand.times_i_power(k):
                    return Twist(
                        direction,
                        _fermion_twist_label(g, direction, bool(sites)),
                        sites,
                        _spin_twist_label(g, s),
                        s,
                        k,
                    )
    raise NetworkError(f"no twist found for {net.bc.ascii()} in direction {direction}")


def twist_directions(g: MappingGraph) -> tuple[str, ...]:
    if g.kind == "cycle":
        return ("x",)
    if g.kind == "torus":
        return ("H", "V")
    return ()


def charge_sector(net: MappingNetwork, loops: str = "intersect", twists: bool = True) -> SectorRecord:
    """Fermion parity, loop charges and twists mapped by ``net``.

    Parity and loop charges are read symbolically from the boundary
    condition and the signed loop stabilizers. On graphs that are not presets
    the loop charges come from the oracle and the twist fields stay empty.
    """
    g = net.graph
    parity = -1 if net.odd else 1
    if g.kind not in ("cycle", "torus"):
        from .oracle import verify_sector

        rec = verify_sector(net)
        return SectorRecord(parity, {}, net.bc, rec.spin_eigenvalues, {})
    eig = {name: loop_eigenvalue(p) for name, p in loop_operators(net, loops)}
    f_tw, s_tw = {}, {}
    if twists:
        for d in twist_directions(g):
            t = twist(net, d)
            f_tw[d] = t.fermion_label
            s_tw[d] = t.spin_label
    return SectorRecord(parity, f_tw, net.bc, eig, s_tw)


def preset_bcs(g: MappingGraph) -> list[str]:
    """Boundary conditions in table order for a preset graph."""
    if g.kind == "cycle":
        return ["I", "Z", "X", "ZX"]
    if g.kind == "torus":
        return ["I", "ZH", "ZV", "ZHZV", "X", "ZHX", "ZVX", "ZHZVX"]
    return ["I"]


# --------------------------------------------------------------------------
# Kramers-Wannier composition and unified boundaries (cycles)
# --------------------------------------------------------------------------

_KW_BITS = {"I": (0, 0), "Z": (0, 1), "X": (1, 0), "ZX": (1, 1)}


def kw_matrix(n: int, bc2: str, v0: int = 0) -> ExactMatrix:
    """Kramers-Wannier MPO from edge spins to vertex (dual) spins on a cycle.

    Rows are edge spins ``s`` and columns dual spins ``t``. The only nonzero
    entries have ``t_v = s_{v-1} + s_v`` (mod 2), with an extra flip at ``v0``
    for an X boundary condition and a sign ``(-1)**s_seam`` for a Z boundary
    condition, where the seam is edge ``v0 - 1``.
    """
    key = bc2.replace("~", "").replace(_TILDE, "").upper()
    if key not in _KW_BITS:
        raise NetworkError(f"unknown Kramers-Wannier boundary condition {bc2!r}")
    x, z = _KW_BITS[key]
    seam = (v0 - 1) % n
    size = 1 << n
    s = np.arange(size, dtype=np.int64)
    bits = [(s >> (n - 1 - i)) & 1 for i in range(n)]
    t = np.zeros(size, dtype=np.int64)
    for v in range(n):
        tv = bits[(v - 1) % n] ^ bits[v] ^ (x if v == v0 % n else 0)
        t |= tv << (n - 1 - v)
    phase = 2 * z * bits[seam]
    return ExactMatrix.from_entries(s, t, phase, (size, size))


@dataclass(frozen=True)
class KWComposition:
    """Result of composing the fermion-to-spin MPO with a KW MPO.

    ``matrix`` maps fermions (rows) to dual spins (columns). ``zero`` flags a
    charge mismatch; ``sector`` is ``"even"``/``"odd"`` when the composition
    equals ``2 P`` on that fermion parity sector, i.e. canonical
    Jordan-Wigner up to the normalization 2.
    """

    bc1: str
    bc2: str
    matrix: ExactMatrix
    zero: bool
    sector: str | None


def kw_compose(net: MappingNetwork, bc2: str) -> KWComposition:
    """Compose a fixed-boundary cycle network with the KW MPO of ``bc2``."""
    from .algebra import fermion_parity_matrix
    from .oracle import realize

    g = net.graph
    if g.kind != "cycle" or net.has_defect:
        raise NetworkError("Kramers-Wannier composition is defined on cycles without defect")
    n = g.n_vertices
    (v0,) = net.origin
    j = realize(net).matrix @ kw_matrix(n, bc2, v0)
    sector = None
    if not j.is_zero():
        par = fermion_parity_matrix(g.vertex_order)
        eye = ExactMatrix.identity(1 << n)
        for name, proj2 in (("even", eye + par), ("odd", eye - par)):
            if j == proj2:
                sector = name
    return KWComposition(net.bc.ascii(), bc2, j, j.is_zero(), sector)


def kw_partner(net: MappingNetwork) -> str:
    """The unique BC 2 whose composition is canonical Jordan-Wigner."""
    hits = [b for b in _KW_BITS if kw_compose(net, b).sector is not None]
    if len(hits) != 1:
        raise NetworkError(f"expected one matching KW boundary, found {hits}")
    return hits[0]


def kw_twist(n: int, bc2: str, v0: int = 0) -> tuple[str, str]:
    """Spin and dual-spin twists of the KW MPO under translation by one site.

    Returns ``(spin, dual)`` labels with ``K(v0+1) = S K(v0) T`` exactly.
    """
    from .algebra import pauli_matrix

    k = kw_matrix(n, bc2, v0)
    target = kw_matrix(n, bc2, v0 + 1)
    sites = tuple(range(n))
    s_opts = [("I", None)] + [("X", PauliString.from_map(sites, {j: "X"})) for j in sites]
    t_opts = [("I", None)] + [
        (letter, PauliString.from_map(sites, {j: letter})) for letter in "ZX" for j in sites
    ]
    for s_name, s in s_opts:
        sk = k if s is None else pauli_matrix(s) @ k
        for t_name, t in t_opts:
            cand = sk if t is None else sk @ pauli_matrix(t)
            if any(target == cand.times_i_power(p) for p in range(4)):
                return s_name, t_name
    raise NetworkError("no KW twist found")  # pragma: no cover


@dataclass(frozen=True)
class UnifiedBoundary:
    """The rank-1 boundary ``(|0)+|1))(0|`` realized as a single network.

    ``network`` carries a Z̃ on the seam mode controlled by the seam spin
    together with the seam X̃ flip; ``decomposition`` records the exact
    coefficients with ``U = sum c_bc U_bc``; ``sector_bc`` names the fixed
    boundary that acts on each fermion parity sector.
    """

    network: MappingNetwork
    decomposition: dict
    sector_bc: dict


def unified_boundary(net: MappingNetwork) -> UnifiedBoundary:
    """Unified boundary for the cycle underlying ``net``.

    Summing the Z̃ and I boundaries gives ``|0)(0|`` and summing X̃ and Z̃X̃
    gives ``|1)(0|``; their sum is a controlled flip of the seam leg by the
    seam spin, which makes the network square and unitary.
    """
    g = net.graph
    if g.kind != "cycle":
        raise NetworkError("the rank-1 unified boundary is defined on cycles")
    (v0,) = net.origin
    base = assemble(g, "I", origin=net.origin)
    seam_edge = default_defect_edge(g, net.origin)
    seam = base.leg_mode(seam_edge, "r")
    uni = MappingNetwork(
        g,
        BoundaryCondition(),
        DefectPlacement.none(),
        (SigmaItem("CX", seam, seam_edge),),
        base.spins,
        net.origin,
    )
    half = 0.5
    return UnifiedBoundary(
        uni,
        {"I": half, "Z": half, "X": half, "ZX": -half},
        {"even": "Z", "odd": "ZX"},
    )


@dataclass(frozen=True)
class UnifiedOperator:
    """Block operator from (ancillas, fermions) to spins.

    Rows are indexed by ``(ancilla bits, fermion occupations)`` with the
    ancillas most significant; ``blocks`` maps ancilla bits to the fixed
    boundary condition of that block. ``scale`` is the integer with
    ``W^dagger W = scale * Pi`` where ``Pi`` projects onto the spin states
    obeying all contractible gauge constraints.
    """

    graph: MappingGraph
    matrix: ExactMatrix
    blocks: dict
    n_ancillas: int
    scale: int

    def block(self, bits: tuple[int, ...]) -> ExactMatrix:
        """Rows belonging to one ancilla configuration."""
        keys = sorted(self.blocks)
        k = keys.index(tuple(bits))
        rows = 1 << self.graph.n_vertices
        return self.matrix.submatrix(range(k * rows, (k + 1) * rows), range(self.matrix.shape[1]))


def unified_unitary(graph: MappingGraph, bc_ancillas: int | None = None, parity: str | None = None) -> UnifiedOperator:
    """Stack the fixed-boundary networks into one ancilla-indexed operator.

    On a cycle one ancilla selects Z̃ (even fermions) or Z̃X̃ (odd fermions).
    On a torus two ancillas select the Z̃_H, Z̃_V strings, all with the parity
    given by ``parity`` (``"even"`` by default, ``"odd"`` adds the X̃ defect).
    Each block is a fixed network, so its image lies in the joint +1 space of
    the contractible gauge constraints, which bounds the rank of the stack.
    """
    from .oracle import realize

    if graph.kind == "cycle":
        if bc_ancillas not in (None, 1):
            raise NetworkError("cycles use one boundary ancilla")
        if parity is not None:
            raise NetworkError("the cycle ancilla already selects the parity")
        blocks = {(0,): "Z", (1,): "ZX"}
        n_anc = 1
    elif graph.kind == "torus":
        if bc_ancillas not in (None, 2):
            raise NetworkError("tori use two boundary ancillas")
        parity = parity or "even"
        if parity not in ("even", "odd"):
            raise NetworkError("parity must be 'even' or 'odd'")
        suffix = "X" if parity == "odd" else ""
        blocks = {}
        for h in (0, 1):
            for v in (0, 1):
                name = ("ZH" if h else "") + ("ZV" if v else "") + suffix
                blocks[(h, v)] = name or "I"
        n_anc = 2
    else:
        raise NetworkError("unified operators are defined for preset graphs")
    mats = [realize(assemble(graph, blocks[k])).matrix for k in sorted(blocks)]
    w = ExactMatrix.vstack(mats)
    scale = 1 << graph.circuit_rank()
    return UnifiedOperator(graph, w, blocks, n_anc, scale)


# --------------------------------------------------------------------------
# operator generators and weight bound
# --------------------------------------------------------------------------


def generators(net: MappingNetwork) -> list[FermionMonomial]:
    """Standard generators of the even algebra, plus single X̃ with a defect.

    Every ``Z̃_v`` and every edge hopping ``X̃_tail X̃_head`` is included; when
    the network carries a defect each ``X̃_v`` is added.
    """
    g = net.graph
    order = g.vertex_order
    out = [monomial([(v, "Z")], order) for v in order]
    for e in g.edges:
        out.append(fermion_canonicalize(monomial([(e.tail, "X"), (e.head, "X")], order)))
    if net.has_defect:
        out += [monomial([(v, "X")], order) for v in order]
    return out


def weight_bound(g: MappingGraph) -> int:
    """Largest Pauli weight of a generator image, ``2 * max degree - 1``."""
    return 2 * max(g.degree(v) for v in g.vertices) - 1


# --------------------------------------------------------------------------
# sector tables
# --------------------------------------------------------------------------

COLUMNS_1D = (
    "∏Z̃_i",
    "Twist (fermions)",
    "BC 1",
    "∏X_i",
    "Twist (spins)",
    "BC 2",
    "∏Z_i",
    "Twist (dual spins)",
    "Unified BC",
)
COLUMNS_2D = ("∏Z̃_i", "H. Twist", "V. Twist", "BC", "X_H", "X_V", "H./V. Twist")


def _sign(v: int) -> str:
    return f"{v:+d}"


def sector_table(g: MappingGraph, loops: str = "intersect") -> list[dict]:
    """Rows of the sector table of a preset graph, keyed by column name."""
    rows = []
    for name in preset_bcs(g):
        net = assemble(g, name)
        rec = charge_sector(net, loops)
        if g.kind == "cycle":
            bc2 = kw_partner(net)
            comp = kw_compose(net, bc2)
            dual_parity = 1 if comp.sector == "even" else -1
            unified = unified_boundary(net).sector_bc[comp.sector]
            rows.append(
                dict(
                    zip(
                        COLUMNS_1D,
                        (
                            _sign(rec.fermion_parity),
                            rec.fermion_twists["x"],
                            rec.bc.label(),
                            _sign(rec.spin_eigenvalues["loop"]),
                            rec.spin_twists["x"],
                            bc2,
                            _sign(dual_parity),
                            kw_twist(g.n_vertices, bc2)[1],
                            BoundaryCondition.parse(unified).label(),
                        ),
                    )
                )
            )
        elif g.kind == "torus":
            h, v = rec.spin_twists["H"], rec.spin_twists["V"]
            rows.append(
                dict(
                    zip(
                        COLUMNS_2D,
                        (
                            _sign(rec.fermion_parity),
                            rec.fermion_twists["H"],
                            rec.fermion_twists["V"],
                            rec.bc.label(),
                            _sign(rec.spin_eigenvalues["H"]),
                            _sign(rec.spin_eigenvalues["V"]),
                            "I" if h == v == "I" else f"{h}/{v}",
                        ),
                    )
                )
            )
        else:
            raise NetworkError("sector tables are defined for preset graphs")
    return rows


def export_table(rows: list[dict], fmt: str = "text") -> str:
    """Render table rows as aligned ``text``, ``csv``, ``tsv`` or ``json``."""
    import csv
    import io
    import json

    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "json":
        return json.dumps(rows, ensure_ascii=False, indent=2) + "\n"
    if fmt in ("csv", "tsv"):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, cols, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise NetworkError(f"unknown table format {fmt!r}")

    def width(text: str) -> int:
        return len(text.replace(_TILDE, ""))

    widths = [max(width(c), *(width(r[c]) for r in rows)) for c in cols]

    def line(cells):
        return " | ".join(c + " " * (w - width(c)) for c, w in zip(cells, widths)).rstrip()

    out = [line(cols), "-+-".join("-" * w for w in widths)]
    out += [line([r[c] for c in cols]) for r in rows]
    return "\n".join(out) + "\n"
