from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradedjw.algebra import (
    ExactMatrix,
    FermionMonomial,
    PauliString,
    UniverseError,
    ZeroOperator,
    fermion_canonicalize,
    fermion_matrix,
    fermion_parity_matrix,
    monomial,
    pauli_commutes,
    pauli_matrix,
    pauli_mul,
)

SINGLE = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}

pauli_text = st.tuples(st.integers(0, 3), st.text("IXYZ", min_size=3, max_size=3))


def _dense(p: PauliString) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for letter in p.letters:
        out = np.kron(out, SINGLE[letter])
    return out * 1j**p.phase


def test_xz_is_minus_i_y():
    x = PauliString.parse("X")
    z = PauliString.parse("Z")
    assert pauli_mul(x, z) == PauliString.parse("-iY")


@pytest.mark.parametrize("text", ["+XYZ", "-IIX", "+iZZI", "-iYYY"])
def test_parse_roundtrip(text):
    assert str(PauliString.parse(text)) == text


@given(pauli_text, pauli_text)
def test_product_matches_dense(a, b):
    p = PauliString(tuple(range(3)), a[1], a[0])
    q = PauliString(tuple(range(3)), b[1], b[0])
    assert np.allclose(_dense(pauli_mul(p, q)), _dense(p) @ _dense(q))
    commute = np.allclose(_dense(p) @ _dense(q), _dense(q) @ _dense(p))
    assert pauli_commutes(p, q) == commute


@given(pauli_text)
def test_pauli_matrix_exact(a):
    p = PauliString(tuple(range(3)), a[1], a[0])
    assert np.array_equal(pauli_matrix(p).to_dense(), _dense(p))


def test_mismatched_universe_rejected():
    with pytest.raises(UniverseError):
        pauli_mul(PauliString.parse("XX"), PauliString.parse("XXX"))


MODES = (0, 1, 2)


def _ladder(mode, op):
    return fermion_matrix(monomial([(mode, op)], MODES), MODES)


@pytest.mark.parametrize("i,j", list(itertools.product(MODES, MODES)))
def test_canonical_anticommutation(i, j):
    ci, cj = _ladder(i, "-"), _ladder(j, "-")
    cdj = _ladder(j, "+")
    eye = ExactMatrix.identity(8)
    assert ci @ cdj + cdj @ ci == (eye if i == j else ExactMatrix.zeros(8, 8))
    assert (ci @ cj + cj @ ci).is_zero()


@pytest.mark.parametrize("mode", MODES)
def test_majorana_like_operators(mode):
    x = _ladder(mode, "X")
    z = _ladder(mode, "Z")
    assert x == _ladder(mode, "+") + _ladder(mode, "-")
    assert x @ z == -(z @ x)
    assert z @ z == ExactMatrix.identity(8)


def test_parity_is_product_of_z():
    prod = fermion_matrix(monomial([(m, "Z") for m in MODES], MODES), MODES)
    assert prod == fermion_parity_matrix(MODES)


@given(st.permutations([(0, "X"), (1, "X"), (2, "Z"), (2, "X")]))
@settings(max_examples=30)
def test_canonicalize_preserves_operator(factors):
    m = FermionMonomial(tuple(factors), MODES)
    c = fermion_canonicalize(m)
    assert [f[0] for f in c.factors] == sorted(f[0] for f in c.factors)
    assert fermion_matrix(c, MODES) == fermion_matrix(m, MODES)


def test_canonicalize_detects_zero():
    with pytest.raises(ZeroOperator):
        fermion_canonicalize(monomial([(0, "+"), (1, "X"), (0, "+")], MODES))


@pytest.mark.parametrize(
    "text,sign,ops",
    [
        ("X[0] Z[2]", 1, [(0, "X"), (2, "Z")]),
        ("-1 * a†[1] a[0]", -1, [(1, "+"), (0, "-")]),
        ("adag[2] a^[1]", 1, [(2, "+"), (1, "+")]),
    ],
)
def test_monomial_parse(text, sign, ops):
    m = FermionMonomial.parse(text, MODES)
    assert m.sign == sign and list(m.factors) == ops


def test_monomial_parse_errors():
    with pytest.raises(ValueError):
        FermionMonomial.parse("Q[0]", MODES)
    with pytest.raises(UniverseError):
        FermionMonomial.parse("X[7]", MODES)


def test_exact_matrix_arithmetic():
    a = ExactMatrix.from_entries([0, 1], [1, 0], [1, 2], (2, 2))
    assert np.array_equal(a.to_dense(), np.array([[0, 1j], [-1, 0]]))
    assert a.H.H == a
    assert (a @ a.H) == ExactMatrix.identity(2)
    assert a.kron(ExactMatrix.identity(2)).shape == (4, 4)
    assert ExactMatrix.vstack([a, a]).shape == (4, 2)
    assert a.times_i_power(4) == a
