"""Exact Pauli and fermionic operator algebra.

Two operator families live here:

* :class:`PauliString` -- a phase in ``{+1, -1, +i, -i}`` times a tensor product
  of single-qubit Paulis over an ordered universe of spin sites.
* :class:`FermionMonomial` -- a signed, ordered product of single-mode
  fermionic operators ``X`` (= c + c^dagger), ``Z`` (= (-1)^n), raise
  (c^dagger) and lower (c) over an ordered universe of modes.

Matrices are exact: :class:`ExactMatrix` stores Gaussian integers as a pair of
sparse int64 matrices. Basis states are indexed most-significant-bit first, so
site (or mode) ``0`` of the universe is the leftmost tensor factor.

Fermionic basis states follow the ordered-creation convention
``|n> = (c_0^dag)^{n_0} (c_1^dag)^{n_1} ... |vac>``; consequently single-mode
odd operators pick up a Z-string over the modes that precede them in the
declared ordering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ExactMatrix",
    "FermionMonomial",
    "PauliString",
    "UniverseError",
    "ZeroOperator",
    "fermion_canonicalize",
    "fermion_matrix",
    "fermion_parity_matrix",
    "monomial",
    "pauli_commutes",
    "pauli_matrix",
    "pauli_mul",
]

Label = Hashable


class UniverseError(ValueError):
    """Operands are defined over different site or mode universes."""


class ZeroOperator(ArithmeticError):
    """A fermionic monomial collapsed to the zero operator."""


# --------------------------------------------------------------------------
# phases are stored as powers of i
# --------------------------------------------------------------------------

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PHASE = {v: k for k, v in _PHASE_TEXT.items()}
_PHASE_VALUE = {0: 1, 1: 1j, 2: -1, 3: -1j}

# letter <-> symplectic (x, z) bits; Y = i X Z
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


def _single_site_product(a: str, b: str) -> tuple[int, str]:
    """Return (power of i, letter) with a.b = i^k * letter."""
    if a == "I":
        return 0, b
    if b == "I":
        return 0, a
    if a == b:
        return 0, "I"
    cyclic = {("X", "Y"): "Z", ("Y", "Z"): "X", ("Z", "X"): "Y"}
    if (a, b) in cyclic:
        return 1, cyclic[a, b]
    return 3, cyclic[b, a]


_SITE_PRODUCT = {
    (a, b): _single_site_product(a, b) for a in "IXYZ" for b in "IXYZ"
}


@dataclass(frozen=True)
class PauliString:
    """Phase times a Pauli letter per site.

    Attributes:
        sites: ordered site universe; fixes the tensor-factor order.
        letters: one of ``"IXYZ"`` per site, aligned with ``sites``.
        phase: power of ``i`` in ``{0, 1, 2, 3}``.
    """

    sites: tuple[Label, ...]
    letters: str
    phase: int = 0

    def __post_init__(self):
        if len(self.letters) != len(self.sites):
            raise ValueError("one letter per site is required")
        if set(self.letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters in {self.letters!r}")
        if not isinstance(self.phase, (int, np.integer)):
            raise TypeError("phase must be an integer power of i")
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, sites: Sequence[Label]) -> "PauliString":
        return cls(tuple(sites), "I" * len(sites), 0)

    @classmethod
    def from_map(
        cls, sites: Sequence[Label], letters: Mapping[Label, str], phase: int = 0
    ) -> "PauliString":
        """Build from a sparse ``{site: letter}`` map; absent sites are ``I``."""
        sites = tuple(sites)
        unknown = set(letters) - set(sites)
        if unknown:
            raise UniverseError(f"sites {sorted(map(str, unknown))} not in universe")
        return cls(sites, "".join(letters.get(s, "I") for s in sites), phase)

    @classmethod
    def parse(cls, text: str, sites: Sequence[Label] | None = None) -> "PauliString":
        """Parse the canonical text form, e.g. ``"+iXIZY"`` or ``"-ZZ"``."""
        m = re.fullmatch(r"\s*([+-]i?)?([IXYZ]*)\s*", text)
        if m is None:
            raise ValueError(f"cannot parse Pauli string {text!r}")
        phase = _TEXT_PHASE[m.group(1) or "+"]
        letters = m.group(2)
        if sites is None:
            sites = tuple(range(len(letters)))
        return cls(tuple(sites), letters, phase)

    @property
    def coefficient(self) -> complex:
        return _PHASE_VALUE[self.phase]

    @property
    def weight(self) -> int:
        return sum(ch != "I" for ch in self.letters)

    @property
    def support(self) -> tuple[Label, ...]:
        return tuple(s for s, ch in zip(self.sites, self.letters) if ch != "I")

    def letter(self, site: Label) -> str:
        return self.letters[self.sites.index(site)]

    def as_map(self) -> dict[Label, str]:
        return {s: ch for s, ch in zip(self.sites, self.letters) if ch != "I"}

    def x_bits(self) -> np.ndarray:
        return np.array([_LETTER_BITS[ch][0] for ch in self.letters], dtype=np.uint8)

    def z_bits(self) -> np.ndarray:
        return np.array([_LETTER_BITS[ch][1] for ch in self.letters], dtype=np.uint8)

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.sites, self.letters, phase)

    def scaled(self, power_of_i: int) -> "PauliString":
        return PauliString(self.sites, self.letters, self.phase + power_of_i)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __neg__(self) -> "PauliString":
        return self.scaled(2)

    def __str__(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _check_same_sites(p: PauliString, q: PauliString) -> None:
    if p.sites != q.sites:
        raise UniverseError("Pauli strings act on different site universes")


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Exact product ``p . q`` with phase tracking."""
    _check_same_sites(p, q)
    phase = p.phase + q.phase
    out = []
    for a, b in zip(p.letters, q.letters):
        k, c = _SITE_PRODUCT[a, b]
        phase += k
        out.append(c)
    return PauliString(p.sites, "".join(out), phase)


def pauli_commutes(p: PauliString, q: PauliString) -> bool:
    """True iff ``pq == qp``; parity of the number of anticommuting sites."""
    _check_same_sites(p, q)
    clashes = sum(
        1 for a, b in zip(p.letters, q.letters) if a != "I" and b != "I" and a != b
    )
    return clashes % 2 == 0


# --------------------------------------------------------------------------
# fermionic monomials
# --------------------------------------------------------------------------

_FERMION_OPS = ("X", "Z", "+", "-")
_ODD = {"X": 1, "Z": 0, "+": 1, "-": 1}
_OP_TEXT = {"X": "X", "Z": "Z", "+": "a†", "-": "a"}


@dataclass(frozen=True)
class FermionMonomial:
    """``sign * f_1 f_2 ... f_k`` with each factor a ``(mode, op)`` pair.

    ``op`` is ``"X"`` (the odd operator c + c^dag), ``"Z"`` (the even parity
    operator (-1)^n), ``"+"`` (c^dag) or ``"-"`` (c). ``modes`` is the declared
    linear ordering of the fermionic Hilbert space; it fixes canonical order and
    the sign of matrix representations.
    """

    factors: tuple[tuple[Label, str], ...]
    modes: tuple[Label, ...]
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple((m, o) for m, o in self.factors))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        for mode, op in self.factors:
            if op not in _FERMION_OPS:
                raise ValueError(f"unknown fermionic operator {op!r}")
            if mode not in self.modes:
                raise UniverseError(f"mode {mode!r} is not in the declared ordering")

    @classmethod
    def parse(cls, text: str, modes: Sequence[Label]) -> "FermionMonomial":
        """Parse ``"-1 * a†[3] a[1]"``, ``"X[0] Z[2]"`` and friends.

        ``a^[i]`` and ``adag[i]`` are accepted as ASCII spellings of the
        creation operator. Mode labels inside brackets are matched against
        ``str(mode)`` of the declared ordering.
        """
        lookup = {str(m): m for m in modes}
        body = text.strip()
        sign = 1
        m = re.match(r"^([+-]?\s*1)\s*\*\s*", body)
        if m:
            sign = -1 if m.group(1).replace(" ", "").startswith("-") else 1
            body = body[m.end():]
        elif body.startswith("-"):
            sign, body = -1, body[1:].strip()
        elif body.startswith("+"):
            body = body[1:].strip()
        factors = []
        pos = 0
        token = re.compile(r"\s*(a†|a\^|adag|a|X|Z)\[([^\]]+)\]\s*")
        while pos < len(body):
            t = token.match(body, pos)
            if t is None:
                raise ValueError(f"cannot parse fermion monomial {text!r} at {pos}")
            name, label = t.group(1), t.group(2).strip()
            if label not in lookup:
                raise UniverseError(f"unknown mode {label!r}")
            op = {"a†": "+", "a^": "+", "adag": "+", "a": "-"}.get(name, name)
            factors.append((lookup[label], op))
            pos = t.end()
        return cls(tuple(factors), tuple(modes), sign)

    @property
    def parity(self) -> int:
        return sum(_ODD[op] for _, op in self.factors) % 2

    @property
    def is_pauli_type(self) -> bool:
        return all(op in ("X", "Z") for _, op in self.factors)

    def __str__(self) -> str:
        head = "+1" if self.sign > 0 else "-1"
        body = " ".join(f"{_OP_TEXT[o]}[{m}]" for m, o in self.factors)
        return f"{head} * {body}" if body else head


def fermion_canonicalize(m: FermionMonomial) -> FermionMonomial:
    """Stable-sort factors into the declared mode order.

    Each transposition of two odd factors flips the sign. Factors on the same
    mode keep their relative order. Raises :class:`ZeroOperator` when two
    identical ladder operators meet on one mode.
    """
    rank = {mode: i for i, mode in enumerate(m.modes)}
    items = list(m.factors)
    sign = m.sign
    # insertion sort: every adjacent swap is an explicit graded transposition
    for i in range(1, len(items)):
        j = i
        while j > 0 and rank[items[j - 1][0]] > rank[items[j][0]]:
            if _ODD[items[j - 1][1]] and _ODD[items[j][1]]:
                sign = -sign
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    for (ma, oa), (mb, ob) in zip(items, items[1:]):
        if ma == mb and oa == ob and oa in "+-":
            raise ZeroOperator(f"{_OP_TEXT[oa]}[{ma}] squared vanishes")
    return FermionMonomial(tuple(items), m.modes, sign)


# --------------------------------------------------------------------------
# exact matrices
# --------------------------------------------------------------------------


def _csr(a) -> sp.csr_array:
    out = sp.csr_array(a, dtype=np.int64)
    out.eliminate_zeros()
    return out


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """Sparse matrix with Gaussian-integer entries, ``re + i*im``."""

    re: sp.csr_array
    im: sp.csr_array = field(default=None)

    def __post_init__(self):
        re_ = _csr(self.re)
        im_ = _csr(self.im) if self.im is not None else _csr(sp.csr_array(re_.shape, dtype=np.int64))
        if re_.shape != im_.shape:
            raise ValueError("real and imaginary parts differ in shape")
        object.__setattr__(self, "re", re_)
        object.__setattr__(self, "im", im_)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(sp.csr_array((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(sp.identity(n, dtype=np.int64, format="csr"))

    @classmethod
    def from_dense(cls, a) -> "ExactMatrix":
        a = np.asarray(a)
        re_, im_ = np.real(a), np.imag(a)
        if not (np.all(re_ == np.round(re_)) and np.all(im_ == np.round(im_))):
            raise ValueError("entries must be Gaussian integers")
        return cls(re_.astype(np.int64), im_.astype(np.int64))

    @classmethod
    def from_entries(cls, rows, cols, phases, shape) -> "ExactMatrix":
        """Entries ``i**phase`` at ``(rows, cols)``; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        phases = np.asarray(phases, dtype=np.int64) % 4
        re_val = np.select([phases == 0, phases == 2], [1, -1], 0)
        im_val = np.select([phases == 1, phases == 3], [1, -1], 0)
        re_ = sp.coo_array((re_val, (rows, cols)), shape=shape).tocsr()
        im_ = sp.coo_array((im_val, (rows, cols)), shape=shape).tocsr()
        return cls(re_, im_)

    # properties ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.re.shape

    @property
    def nnz(self) -> int:
        return int(((abs(self.re) + abs(self.im)) != 0).sum())

    def is_zero(self) -> bool:
        return self.re.nnz == 0 and self.im.nnz == 0

    def to_dense(self) -> np.ndarray:
        return self.re.toarray() + 1j * self.im.toarray()

    def entry(self, i: int, j: int) -> complex:
        return complex(int(self.re[i, j]), int(self.im[i, j]))

    def entries(self) -> dict[tuple[int, int], complex]:
        """Sorted map of nonzero entries; used for golden dumps."""
        out: dict[tuple[int, int], complex] = {}
        for part, unit in ((self.re.tocoo(), 1), (self.im.tocoo(), 1j)):
            for i, j, v in zip(part.row, part.col, part.data):
                out[int(i), int(j)] = out.get((int(i), int(j)), 0) + unit * int(v)
        return dict(sorted((k, v) for k, v in out.items() if v != 0))

    # algebra ------------------------------------------------------------
    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        a, b, c, d = self.re, self.im, other.re, other.im
        return ExactMatrix(a @ c - b @ d, a @ d + b @ c)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(-self.re, -self.im)

    def scale(self, re: int = 1, im: int = 0) -> "ExactMatrix":
        """Multiply by the Gaussian integer ``re + i*im``."""
        return ExactMatrix(re * self.re - im * self.im, re * self.im + im * self.re)

    def times_i_power(self, k: int) -> "ExactMatrix":
        return self.scale(*{0: (1, 0), 1: (0, 1), 2: (-1, 0), 3: (0, -1)}[k % 4])

    @property
    def H(self) -> "ExactMatrix":
        return ExactMatrix(self.re.T.tocsr(), -self.im.T.tocsr())

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.re.T.tocsr(), self.im.T.tocsr())

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        a, b, c, d = self.re, self.im, other.re, other.im
        return ExactMatrix(sp.kron(a, c) - sp.kron(b, d), sp.kron(a, d) + sp.kron(b, c))

    @staticmethod
    def vstack(blocks: Sequence["ExactMatrix"]) -> "ExactMatrix":
        """Stack matrices with equal column counts on top of each other."""
        return ExactMatrix(
            sp.vstack([b.re for b in blocks], format="csr"),
            sp.vstack([b.im for b in blocks], format="csr"),
        )

    def submatrix(self, rows=None, cols=None) -> "ExactMatrix":
        re_, im_ = self.re, self.im
        if rows is not None:
            re_, im_ = re_[rows, :], im_[rows, :]
        if cols is not None:
            re_, im_ = re_[:, cols], im_[:, cols]
        return ExactMatrix(re_, im_)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    def __hash__(self):
        return id(self)

    def __repr__(self) -> str:
        return f"ExactMatrix(shape={self.shape}, nnz={self.nnz})"


def _bit(states: np.ndarray, pos: int, n: int) -> np.ndarray:
    return (states >> (n - 1 - pos)) & 1


def pauli_matrix(p: PauliString) -> ExactMatrix:
    """``2^k x 2^k`` matrix of ``p`` in the site order of its universe."""
    n = len(p.sites)
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    xmask = 0
    phase = np.full(dim, p.phase, dtype=np.int64)
    for pos, ch in enumerate(p.letters):
        x, z = _LETTER_BITS[ch]
        if x:
            xmask |= 1 << (n - 1 - pos)
        if z:
            phase += 2 * _bit(cols, pos, n)
        if ch == "Y":
            phase += 1
    return ExactMatrix.from_entries(cols ^ xmask, cols, phase, (dim, dim))


def _apply_fermion_factor(states, phase, alive, pos, op, n):
    """Act with one factor on a batch of basis states (vectorized)."""
    occ = _bit(states, pos, n)
    if op == "Z":
        return states, phase + 2 * occ, alive
    # JW string over the modes that precede ``pos``
    below = states >> (n - pos)
    string = np.bitwise_count(below).astype(np.int64) if pos else np.zeros_like(states)
    flip = np.int64(1) << (n - 1 - pos)
    if op == "+":
        alive = alive & (occ == 0)
    elif op == "-":
        alive = alive & (occ == 1)
    return states ^ flip, phase + 2 * string, alive


def fermion_matrix(m: FermionMonomial, ordering: Sequence[Label] | None = None) -> ExactMatrix:
    """Matrix of ``m`` on the Fock space ordered by ``ordering``.

    The ordering defaults to the monomial's declared modes. Factors are applied
    right to left, as operator products are.
    """
    order = tuple(m.modes if ordering is None else ordering)
    pos_of = {mode: i for i, mode in enumerate(order)}
    for mode, _ in m.factors:
        if mode not in pos_of:
            raise UniverseError(f"mode {mode!r} is not in the ordering")
    n = len(order)
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    states = cols.copy()
    phase = np.zeros(dim, dtype=np.int64) + (0 if m.sign > 0 else 2)
    alive = np.ones(dim, dtype=bool)
    for mode, op in reversed(m.factors):
        states, phase, alive = _apply_fermion_factor(states, phase, alive, pos_of[mode], op, n)
    return ExactMatrix.from_entries(states[alive], cols[alive], phase[alive], (dim, dim))


def fermion_parity_matrix(ordering: Sequence[Label]) -> ExactMatrix:
    """The total parity operator, the product of ``Z`` over every mode."""
    factors = tuple((mode, "Z") for mode in ordering)
    return fermion_matrix(FermionMonomial(factors, tuple(ordering)))


def monomial(factors: Iterable[tuple[Label, str]], modes: Sequence[Label], sign: int = 1) -> FermionMonomial:
    """Shorthand constructor: ``monomial([(0, "X"), (2, "X")], modes)``."""
    return FermionMonomial(tuple(factors), tuple(modes), sign)
