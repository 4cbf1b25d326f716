"""Oriented multigraphs with per-vertex leg orderings.

Every edge carries one GHZ tensor whose ``l`` leg sits at the edge's tail and
whose ``r`` leg sits at its head, so the arrow of an edge points from ``l`` to
``r``. Each vertex lists its incident edges as slots ``a_1 ... a_d``; slot
``a_0`` is the physical fermion.

Two presets are provided. On the cycle, edge ``j`` runs from vertex ``j`` to
vertex ``j+1`` and the slots of a vertex are (left, right). On the torus, vertex
``(x, y)`` has id ``x + Lx*y``; the horizontal edge leaving it to the right has
id ``2*(x + Lx*y)`` and the vertical edge leaving it upwards has id
``2*(x + Lx*y) + 1``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np

__all__ = [
    "CLOCKWISE",
    "CycleBasis",
    "Edge",
    "GraphError",
    "MappingGraph",
    "cycle_basis",
    "cycle_graph",
    "gf2_rank",
    "load_graph",
    "path_graph",
    "route",
    "torus_graph",
    "torus_loops",
    "torus_plaquette",
    "walk",
]

CLOCKWISE = ("up", "right", "down", "left")


class GraphError(ValueError):
    """The graph violates a structural invariant."""


@dataclass(frozen=True)
class Edge:
    id: int
    tail: Hashable
    head: Hashable

    def other(self, v: Hashable) -> Hashable:
        if v == self.tail:
            return self.head
        if v == self.head:
            return self.tail
        raise GraphError(f"vertex {v!r} is not an endpoint of edge {self.id}")

    def side(self, v: Hashable) -> str:
        """GHZ leg (``"l"`` or ``"r"``) attached to vertex ``v``."""
        if v == self.tail:
            return "l"
        if v == self.head:
            return "r"
        raise GraphError(f"vertex {v!r} is not an endpoint of edge {self.id}")


@dataclass(frozen=True)
class MappingGraph:
    """An oriented multigraph plus the slot ordering at every vertex.

    Attributes:
        vertices: Vertex ids in their declared order (the fermionic mode order).
        edges: Edges sorted by id. Edge ids must be ``0 .. |E|-1``.
        vertex_order: For each vertex, the edge ids occupying ``a_1 ... a_d``.
        kind: ``"cycle"``, ``"torus"`` or ``None`` for file or ad-hoc graphs.
        dims: ``(n,)`` for cycles and ``(Lx, Ly)`` for tori.
        slot_labels: Optional direction names per vertex slot (tori only).
    """

    vertices: tuple
    edges: tuple[Edge, ...]
    vertex_order: Mapping[Hashable, tuple[int, ...]]
    kind: str | None = None
    dims: tuple[int, ...] = ()
    slot_labels: Mapping[Hashable, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        edges = tuple(sorted(self.edges, key=lambda e: e.id))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(
            self, "vertex_order", {v: tuple(s) for v, s in self.vertex_order.items()}
        )
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        if [e.id for e in edges] != list(range(len(edges))):
            raise GraphError("edge ids must be 0 .. |E|-1")
        vset = set(self.vertices)
        for e in edges:
            if e.tail == e.head:
                raise GraphError(f"edge {e.id} is a self-loop; self-loops are not supported")
            if e.tail not in vset or e.head not in vset:
                raise GraphError(f"edge {e.id} references an unknown vertex")
        if set(self.vertex_order) != vset:
            raise GraphError("vertex_order must list every vertex exactly once")
        seen: dict[int, list] = {e.id: [] for e in edges}
        for v, slots in self.vertex_order.items():
            for eid in slots:
                if eid not in seen:
                    raise GraphError(f"vertex {v!r} lists unknown edge {eid}")
                seen[eid].append(v)
        for e in edges:
            if sorted(map(repr, seen[e.id])) != sorted(map(repr, (e.tail, e.head))):
                raise GraphError(f"edge {e.id} must appear once in each endpoint's slot list")
        for v in self.vertices:
            if not self.vertex_order[v]:
                raise GraphError(f"vertex {v!r} is isolated")

    # -- queries -------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge(self, eid: int) -> Edge:
        return self.edges[eid]

    def degree(self, v: Hashable) -> int:
        return len(self.vertex_order[v])

    @property
    def max_degree(self) -> int:
        return max(self.degree(v) for v in self.vertices)

    def slot(self, v: Hashable, eid: int) -> int:
        """Slot index ``k`` (1-based) of edge ``eid`` at vertex ``v``."""
        return self.vertex_order[v].index(eid) + 1

    def slot_edge(self, v: Hashable, k: int) -> int:
        return self.vertex_order[v][k - 1]

    def incident(self, v: Hashable) -> tuple[int, ...]:
        return self.vertex_order[v]

    def vertex_index(self, v: Hashable) -> int:
        return self.vertices.index(v)

    def circuit_rank(self) -> int:
        return self.n_edges - self.n_vertices + len(components(self))

    # -- torus helpers -------------------------------------------------------

    def _require_torus(self) -> tuple[int, int]:
        if self.kind != "torus":
            raise GraphError("operation only defined for torus presets")
        return self.dims  # type: ignore[return-value]

    def site(self, x: int, y: int) -> int:
        lx, ly = self._require_torus()
        return (x % lx) + lx * (y % ly)

    def coords(self, v: int) -> tuple[int, int]:
        lx, _ = self._require_torus()
        return v % lx, v // lx

    def h_edge(self, x: int, y: int) -> int:
        return 2 * self.site(x, y)

    def v_edge(self, x: int, y: int) -> int:
        return 2 * self.site(x, y) + 1

    def edge_label(self, eid: int) -> str:
        """Human name: ``j`` on cycles, ``h(x,y)``/``v(x,y)`` on tori."""
        if self.kind == "torus":
            x, y = self.coords(eid // 2)
            return f"{'hv'[eid % 2]}({x},{y})"
        return str(eid)


def components(g: MappingGraph) -> list[set]:
    adj: dict = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.tail].add(e.head)
        adj[e.head].add(e.tail)
    seen: set = set()
    comps = []
    for v in g.vertices:
        if v in seen:
            continue
        comp = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        comps.append(comp)
    return comps


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------


def cycle_graph(n: int) -> MappingGraph:
    """Periodic chain of ``n`` sites with edges ``j -> j+1``."""
    if n < 2:
        raise GraphError("a cycle needs at least 2 vertices (n=1 would be a self-loop)")
    edges = [Edge(j, j, (j + 1) % n) for j in range(n)]
    order = {v: ((v - 1) % n, v) for v in range(n)}
    return MappingGraph(tuple(range(n)), tuple(edges), order, kind="cycle", dims=(n,))


def path_graph(n: int) -> MappingGraph:
    """Open chain; a tree used to exercise rank-0 bookkeeping."""
    if n < 2:
        raise GraphError("a path needs at least 2 vertices")
    edges = [Edge(j, j, j + 1) for j in range(n - 1)]
    order = {v: tuple(e for e in (v - 1, v) if 0 <= e < n - 1) for v in range(n)}
    return MappingGraph(tuple(range(n)), tuple(edges), order)


def torus_graph(lx: int, ly: int, start: str = "down") -> MappingGraph:
    """Periodic ``lx x ly`` square lattice.

    Slots run clockwise ``(up, right, down, left)`` rotated so that slot
    ``a_1`` is the direction ``start``.
    """
    if lx < 2 or ly < 2:
        raise GraphError("torus dimensions must be at least 2")
    if start not in CLOCKWISE:
        raise GraphError(f"start must be one of {CLOCKWISE}")
    rot = CLOCKWISE.index(start)
    dirs = CLOCKWISE[rot:] + CLOCKWISE[:rot]

    def site(x, y):
        return (x % lx) + lx * (y % ly)

    edges = []
    order = {}
    labels = {}
    for y in range(ly):
        for x in range(lx):
            v = site(x, y)
            edges.append(Edge(2 * v, v, site(x + 1, y)))
            edges.append(Edge(2 * v + 1, v, site(x, y + 1)))
            by_dir = {
                "up": 2 * v + 1,
                "right": 2 * v,
                "down": 2 * site(x, y - 1) + 1,
                "left": 2 * site(x - 1, y),
            }
            order[v] = tuple(by_dir[d] for d in dirs)
            labels[v] = dirs
    return MappingGraph(
        tuple(range(lx * ly)), tuple(edges), order, kind="torus", dims=(lx, ly), slot_labels=labels
    )


def load_graph(path: str | Path) -> MappingGraph:
    """Read a graph from a JSON file.

    Expected keys: ``vertices`` (list), ``edges`` (list of objects with ``id``,
    ``tail`` and ``head``; the arrow points tail to head) and ``vertex_order``
    (object mapping each vertex to its slot list ``a_1 ... a_d``).
    """
    doc = json.loads(Path(path).read_text())
    try:
        vertices = list(doc["vertices"])
        edges = [Edge(int(e["id"]), e["tail"], e["head"]) for e in doc["edges"]]
        raw_order = doc["vertex_order"]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph file: {exc}") from exc
    by_text = {str(v): v for v in vertices}
    order = {}
    for key, slots in raw_order.items():
        if key not in by_text:
            raise GraphError(f"vertex_order names unknown vertex {key!r}")
        order[by_text[key]] = tuple(int(s) for s in slots)
    return MappingGraph(tuple(vertices), tuple(edges), order)


# --------------------------------------------------------------------------
# cycle space
# --------------------------------------------------------------------------


def gf2_rank(rows) -> int:
    """Rank over Z2 of a 0/1 matrix given as an iterable of rows."""
    m = np.array([np.asarray(r, dtype=np.uint8) % 2 for r in rows], dtype=np.uint8)
    if m.size == 0:
        return 0
    m = m.copy()
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((i for i in range(rank, m.shape[0]) if m[i, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for i in range(m.shape[0]):
            if i != rank and m[i, col]:
                m[i] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


@dataclass(frozen=True)
class CycleBasis:
    cycles: tuple[tuple[int, ...], ...]
    rank: int
    labels: tuple[str, ...] = ()

    def edge_sets(self) -> list[list[int]]:
        return [[i for i, b in enumerate(c) if b] for c in self.cycles]


def _indicator(n_edges: int, eids) -> tuple[int, ...]:
    vec = [0] * n_edges
    for e in eids:
        vec[e] ^= 1
    return tuple(vec)


def _fundamental_cycles(g: MappingGraph) -> list[tuple[int, ...]]:
    root = g.vertices[0]
    parent_edge: dict = {root: None}
    queue = deque([root])
    tree: set[int] = set()
    while queue:
        u = queue.popleft()
        for eid in sorted(g.incident(u)):
            w = g.edge(eid).other(u)
            if w not in parent_edge:
                parent_edge[w] = eid
                tree.add(eid)
                queue.append(w)

    def to_root(v):
        path = []
        while parent_edge[v] is not None:
            eid = parent_edge[v]
            path.append(eid)
            v = g.edge(eid).other(v)
        return path

    cycles = []
    for e in g.edges:
        if e.id in tree:
            continue
        cycles.append(_indicator(g.n_edges, [e.id] + to_root(e.tail) + to_root(e.head)))
    return cycles


def torus_plaquette(g: MappingGraph, x: int, y: int) -> list[int]:
    return [g.h_edge(x, y), g.v_edge(x + 1, y), g.h_edge(x, y + 1), g.v_edge(x, y)]


def torus_loops(g: MappingGraph, x0: int = 0, y0: int = 0) -> dict[str, list[int]]:
    """Edge sets of the horizontal loop along row ``y0`` and vertical loop along column ``x0``."""
    lx, ly = g.dims
    return {
        "H": [g.h_edge(x, y0) for x in range(lx)],
        "V": [g.v_edge(x0, y) for y in range(ly)],
    }


def cycle_basis(g: MappingGraph) -> CycleBasis:
    """Independent cycles; on tori these are plaquettes plus the two loops."""
    if len(components(g)) != 1:
        raise GraphError("cycle_basis requires a connected graph")
    rank = g.n_edges - g.n_vertices + 1
    if g.kind == "torus":
        lx, ly = g.dims
        cycles, labels = [], []
        for y in range(ly):
            for x in range(lx):
                if (x, y) == (lx - 1, ly - 1):
                    continue
                cycles.append(_indicator(g.n_edges, torus_plaquette(g, x, y)))
                labels.append(f"plaquette({x},{y})")
        for name, eids in torus_loops(g).items():
            cycles.append(_indicator(g.n_edges, eids))
            labels.append(name)
    else:
        cycles = _fundamental_cycles(g)
        labels = [f"cycle{i}" for i in range(len(cycles))]
    if gf2_rank(cycles) != rank or len(cycles) != rank:
        raise GraphError("cycle basis is not independent")  # pragma: no cover
    return CycleBasis(tuple(cycles), rank, tuple(labels))


def route(g: MappingGraph, u: Hashable, v: Hashable) -> list[int]:
    """Shortest edge path from ``u`` to ``v``.

    Breadth-first search visits, at each vertex, edges followed along their
    arrow before edges followed against it, and lower ids first, so ties are
    broken deterministically.
    """
    if u == v:
        return []
    prev: dict = {u: None}
    queue = deque([u])
    while queue:
        w = queue.popleft()
        inc = sorted(g.incident(w), key=lambda eid: (g.edge(eid).tail != w, eid))
        for eid in inc:
            nxt = g.edge(eid).other(w)
            if nxt in prev:
                continue
            prev[nxt] = (w, eid)
            if nxt == v:
                path = []
                node = v
                while prev[node] is not None:
                    node, e = prev[node]
                    path.append(e)
                return path[::-1]
            queue.append(nxt)
    raise GraphError(f"no path from {u!r} to {v!r}")


def walk(g: MappingGraph, start: Hashable, eids: Sequence[int]) -> list:
    """Vertices visited when following ``eids`` from ``start``."""
    verts = [start]
    for eid in eids:
        verts.append(g.edge(eid).other(verts[-1]))
    return verts
