"""Fermion-to-qubit mappings built from graded tensor networks.

The package assembles a projected entangled pair operator on a directed graph
(fermions on vertices, qubits on edges), compiles fermionic operators to Pauli
strings symbolically, and checks every result against an explicit matrix
realization of the network.

Modules:
    algebra: Pauli strings, fermionic monomials and exact sparse matrices.
    graded_tensor: Z2-graded tensors and the local symmetries of the blocks.
    graph_model: directed graphs with slot orderings, cycle bases, routing.
    encoder: network assembly, operator mapping, sectors and twists.
    oracle: brute-force realization and verification.
    cli: the ``gradedjw`` command.
"""

from __future__ import annotations

from .algebra import ExactMatrix, FermionMonomial, PauliString, fermion_matrix, monomial, pauli_matrix
from .encoder import (
    BoundaryCondition,
    MappingNetwork,
    NetworkError,
    SectorRecord,
    assemble,
    charge_sector,
    gauge_constraints,
    kw_compose,
    map_expression,
    map_operator,
    sector_table,
    twist,
    unified_boundary,
    unified_unitary,
)
from .graph_model import GraphError, MappingGraph, cycle_graph, load_graph, path_graph, torus_graph
from .oracle import realize, solve_image, verify_intertwiner, verify_sector, verify_unitary

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "ExactMatrix",
    "FermionMonomial",
    "GraphError",
    "MappingGraph",
    "MappingNetwork",
    "NetworkError",
    "PauliString",
    "SectorRecord",
    "assemble",
    "charge_sector",
    "cycle_graph",
    "fermion_matrix",
    "gauge_constraints",
    "kw_compose",
    "load_graph",
    "map_expression",
    "map_operator",
    "monomial",
    "path_graph",
    "pauli_matrix",
    "realize",
    "sector_table",
    "solve_image",
    "torus_graph",
    "twist",
    "unified_boundary",
    "unified_unitary",
    "verify_intertwiner",
    "verify_sector",
    "verify_unitary",
]
