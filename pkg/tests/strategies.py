from __future__ import annotations

from hypothesis import strategies as st

from gradedjw.graph_model import Edge, MappingGraph


@st.composite
def random_graphs(draw, max_vertices: int = 5, max_extra: int = 4):
    """Connected oriented multigraphs with shuffled slot orders."""
    nv = draw(st.integers(2, max_vertices))
    pairs = []
    for v in range(1, nv):
        u = draw(st.integers(0, v - 1))
        pairs.append((u, v) if draw(st.booleans()) else (v, u))
    for _ in range(draw(st.integers(0, max_extra))):
        a = draw(st.integers(0, nv - 1))
        b = draw(st.integers(0, nv - 1).filter(lambda x, a=a: x != a))
        pairs.append((a, b))
    edges = [Edge(i, a, b) for i, (a, b) in enumerate(pairs)]
    order = {v: [] for v in range(nv)}
    for e in edges:
        order[e.tail].append(e.id)
        order[e.head].append(e.id)
    order = {v: draw(st.permutations(slots)) for v, slots in order.items()}
    return MappingGraph(tuple(range(nv)), tuple(edges), order)
