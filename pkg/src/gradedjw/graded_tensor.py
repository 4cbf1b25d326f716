"""Z2-graded tensors with explicit sign bookkeeping.

A :class:`GradedTensor` is a juxtaposition of legs, each a ket ``|a)`` or a
bra ``(a|`` (fermionic) or ``|a>`` / ``<a|`` (spin). Fermionic legs carry the
grade of their index; exchanging two neighbouring legs multiplies an entry by
``(-1)**(a*b)``. Every sign in this module is produced by such adjacent
exchanges, by the supertrace ``Tr(|a)(b|) = (-1)**(a*b)``, or by transporting
an odd operator past the legs that separate it from its target.

Single-leg operators are given as 2x2 matrices ``op[out, in]``:

* on a ket leg the operator acts from the left, passing every leg to the left
  of its target;
* on a bra leg it acts from the right, passing every leg to the right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

__all__ = [
    "GHZ_LEGS",
    "GradedLeg",
    "GradedTensor",
    "PushRule",
    "X_OP",
    "Z_OP",
    "apply_leg_operator",
    "apply_leg_word",
    "contract",
    "contract_self",
    "ghz_rule",
    "ghz_tensor",
    "move_leg",
    "outer",
    "swap_adjacent_legs",
    "vertex_symmetry",
    "vertex_symmetry_push",
    "vertex_tensor",
]

SPIN = "physical-spin"
PHYS_FERMION = "physical-fermion"
VIRT_FERMION = "virtual-fermion"

X_OP = np.array([[0, 1], [1, 0]], dtype=np.int64)
Z_OP = np.array([[1, 0], [0, -1]], dtype=np.int64)
I_OP = np.eye(2, dtype=np.int64)
Y_OP = np.array([[0, -1j], [1j, 0]])

# single-mode fermionic operators addressed by name; "ZX" means Z.X
FERMION_OPS = {
    "I": (I_OP, 0),
    "X": (X_OP, 1),
    "Z": (Z_OP, 0),
    "ZX": (Z_OP @ X_OP, 1),
}


@dataclass(frozen=True)
class GradedLeg:
    id: Hashable
    kind: str = VIRT_FERMION
    polarity: str = "ket"

    def __post_init__(self):
        if self.kind not in (SPIN, PHYS_FERMION, VIRT_FERMION):
            raise ValueError(f"unknown leg kind {self.kind!r}")
        if self.polarity not in ("ket", "bra"):
            raise ValueError(f"unknown polarity {self.polarity!r}")

    @property
    def graded(self) -> bool:
        return self.kind != SPIN

    @property
    def dimension(self) -> int:
        return 2


@dataclass(frozen=True)
class GradedTensor:
    """Legs in their internal order plus the sparse nonzero entries."""

    legs: tuple[GradedLeg, ...]
    data: dict

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(self.legs))
        ids = [leg.id for leg in self.legs]
        if len(set(ids)) != len(ids):
            raise ValueError("leg ids must be unique")
        clean = {}
        for idx, val in self.data.items():
            if len(idx) != len(self.legs):
                raise ValueError("index tuple length does not match leg count")
            if val != 0:
                clean[tuple(int(i) for i in idx)] = val
        object.__setattr__(self, "data", clean)

    @classmethod
    def _trusted(cls, legs: tuple, data: dict) -> "GradedTensor":
        """Build without re-validating; for internal moves that preserve shape."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "legs", legs)
        object.__setattr__(obj, "data", {k: v for k, v in data.items() if v != 0})
        return obj

    def position(self, leg_id: Hashable) -> int:
        for i, leg in enumerate(self.legs):
            if leg.id == leg_id:
                return i
        raise KeyError(f"leg {leg_id!r} not found")

    def leg(self, leg_id: Hashable) -> GradedLeg:
        return self.legs[self.position(leg_id)]

    def __getitem__(self, idx) -> complex:
        return self.data.get(tuple(idx), 0)

    def parity_even(self) -> bool:
        graded = [i for i, leg in enumerate(self.legs) if leg.graded]
        return all(sum(idx[i] for i in graded) % 2 == 0 for idx in self.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedTensor):
            return NotImplemented
        return self.legs == other.legs and self.data == other.data

    def scaled(self, factor) -> "GradedTensor":
        return GradedTensor(self.legs, {k: v * factor for k, v in self.data.items()})

    def dump(self) -> str:
        """Debug dump: one line per leg, then sorted nonzero entries."""
        lines = [f"leg {leg.id} {leg.kind} {leg.polarity}" for leg in self.legs]
        for idx in sorted(self.data):
            val = complex(self.data[idx])
            lines.append("".join(map(str, idx)) + f" {_fmt(val)}")
        return "\n".join(lines)


def _fmt(val: complex) -> str:
    re, im = int(val.real), int(val.imag)
    if im == 0:
        return f"{re:+d}"
    if re == 0:
        return f"{im:+d}i"
    return f"{re:+d}{im:+d}i"


# --------------------------------------------------------------------------
# the two building blocks
# --------------------------------------------------------------------------


def ghz_tensor(s="s", l="l", r="r") -> GradedTensor:
    """``sum_c <c|_s (c|_l (c|_r``."""
    legs = (
        GradedLeg(s, SPIN, "bra"),
        GradedLeg(l, VIRT_FERMION, "bra"),
        GradedLeg(r, VIRT_FERMION, "bra"),
    )
    return GradedTensor(legs, {(0, 0, 0): 1, (1, 1, 1): 1})


GHZ_LEGS = ("s", "l", "r")


def vertex_tensor(d: int, names: Sequence[Hashable] | None = None) -> GradedTensor:
    """Even-parity ket ``|a_d) ... |a_1) |a_0)`` with ``a_0`` physical."""
    if d < 1:
        raise ValueError("a vertex tensor needs degree d >= 1")
    if names is None:
        names = [f"a{k}" for k in range(d, -1, -1)]
    if len(names) != d + 1:
        raise ValueError("need one name per leg, ordered a_d ... a_0")
    legs = tuple(GradedLeg(n, VIRT_FERMION, "ket") for n in names[:-1]) + (
        GradedLeg(names[-1], PHYS_FERMION, "ket"),
    )
    data = {
        idx: 1
        for idx in itertools.product((0, 1), repeat=d + 1)
        if sum(idx) % 2 == 0
    }
    return GradedTensor(legs, data)


# --------------------------------------------------------------------------
# elementary moves
# --------------------------------------------------------------------------


def _grade(leg: GradedLeg, value: int) -> int:
    return value if leg.graded else 0


def swap_adjacent_legs(t: GradedTensor, i: int) -> GradedTensor:
    """Exchange legs ``i`` and ``i+1``; each entry gains ``(-1)**(a*b)``."""
    if not 0 <= i < len(t.legs) - 1:
        raise IndexError(f"cannot swap legs at position {i}")
    a_leg, b_leg = t.legs[i], t.legs[i + 1]
    legs = t.legs[:i] + (b_leg, a_leg) + t.legs[i + 2:]
    data = {}
    for idx, val in t.data.items():
        a, b = idx[i], idx[i + 1]
        sign = -1 if _grade(a_leg, a) * _grade(b_leg, b) else 1
        new = idx[:i] + (b, a) + idx[i + 2:]
        data[new] = sign * val
    return GradedTensor(legs, data)


def move_leg(t: GradedTensor, leg_id: Hashable, target: int) -> GradedTensor:
    """Move a leg to ``target``; the result equals a chain of adjacent swaps.

    Each entry gains ``(-1)**(a * b)`` with ``a`` the moved leg's grade and
    ``b`` the total grade of the legs it crosses.
    """
    pos = t.position(leg_id)
    if not 0 <= target < len(t.legs):
        raise IndexError(f"cannot move leg to position {target}")
    if pos == target:
        return t
    crossed = range(pos + 1, target + 1) if pos < target else range(target, pos)
    moving = t.legs[pos]
    graded = [c for c in crossed if t.legs[c].graded] if moving.graded else []
    legs = list(t.legs)
    legs.insert(target, legs.pop(pos))
    data = {}
    for idx, val in t.data.items():
        flip = idx[pos] and sum(idx[c] for c in graded) % 2
        rest = idx[:pos] + idx[pos + 1:]
        new = rest[:target] + (idx[pos],) + rest[target:]
        data[new] = -val if flip else val
    return GradedTensor._trusted(tuple(legs), data)


def apply_leg_operator(t: GradedTensor, leg_id: Hashable, op, grade: int | None = None) -> GradedTensor:
    """Act with a 2x2 operator on one leg, with transport signs.

    ``grade`` is 0 (even) or 1 (odd); when omitted it is inferred from the
    operator's sparsity pattern. Spin legs never carry transport signs.
    """
    op = np.asarray(op)
    k = t.position(leg_id)
    leg = t.legs[k]
    if grade is None:
        diag = op[0, 1] == 0 and op[1, 0] == 0
        anti = op[0, 0] == 0 and op[1, 1] == 0
        if not (diag or anti):
            raise ValueError("operator has no definite grade; pass grade explicitly")
        grade = 0 if diag else 1
    if not leg.graded:
        grade = 0
    if leg.polarity == "ket":
        passed = [i for i in range(k) if t.legs[i].graded]
    else:
        passed = [i for i in range(k + 1, len(t.legs)) if t.legs[i].graded]
    data: dict = {}
    for idx, val in t.data.items():
        transport = -1 if grade and sum(idx[i] for i in passed) % 2 else 1
        a = idx[k]
        for b in (0, 1):
            # ket: O|a) = sum_b O[b,a] |b);  bra: (a|O = sum_b O[a,b] (b|
            coeff = op[b, a] if leg.polarity == "ket" else op[a, b]
            if coeff == 0:
                continue
            new = idx[:k] + (b,) + idx[k + 1:]
            data[new] = data.get(new, 0) + transport * coeff * val
    return GradedTensor(t.legs, data)


def apply_leg_word(t: GradedTensor, word: Sequence[tuple[Hashable, str]]) -> GradedTensor:
    """Apply a written product of named single-leg fermionic operators.

    ``word`` lists ``(leg, name)`` left to right, as the operators appear in
    the written expression. On kets the rightmost operator acts first; on bras
    the leftmost acts first. Names are ``I``, ``X``, ``Z`` and ``ZX``.
    """
    polar = {t.leg(leg).polarity for leg, _ in word}
    if len(polar) > 1:
        raise ValueError("a word must act on legs of a single polarity")
    order = reversed(word) if polar == {"ket"} else iter(word)
    for leg, name in order:
        op, grade = FERMION_OPS[name]
        t = apply_leg_operator(t, leg, op, grade)
    return t


def _check_pair(a: GradedLeg, b: GradedLeg) -> None:
    if a.graded != b.graded:
        raise ValueError(f"cannot contract {a.kind} leg with {b.kind} leg")
    if a.polarity == b.polarity:
        raise ValueError("contraction needs one bra and one ket")


def contract_self(t: GradedTensor, leg1: Hashable, leg2: Hashable) -> GradedTensor:
    """Contract two legs of one tensor.

    The later leg is swapped leftwards until it sits right after the earlier
    one; the pair then closes as ``(a|b) = delta`` or, for a ket followed by a
    bra, as the supertrace ``(-1)**a``.
    """
    i, j = sorted((t.position(leg1), t.position(leg2)))
    first, second = t.legs[i], t.legs[j]
    _check_pair(first, second)
    t = move_leg(t, second.id, i + 1)
    data: dict = {}
    for idx, val in t.data.items():
        a, b = idx[i], idx[i + 1]
        if a != b:
            continue
        sign = -1 if first.polarity == "ket" and _grade(first, a) else 1
        rest = idx[:i] + idx[i + 2:]
        data[rest] = data.get(rest, 0) + sign * val
    legs = t.legs[:i] + t.legs[i + 2:]
    return GradedTensor(legs, data)


def outer(t1: GradedTensor, t2: GradedTensor) -> GradedTensor:
    """Juxtaposition ``t1 t2``; legs are spliced ``t1`` first."""
    data = {i1 + i2: v1 * v2 for i1, v1 in t1.data.items() for i2, v2 in t2.data.items()}
    return GradedTensor(t1.legs + t2.legs, data)


def contract(t1: GradedTensor, leg1: Hashable, t2: GradedTensor, leg2: Hashable) -> GradedTensor:
    """Graded contraction of ``t1.leg1`` with ``t2.leg2``.

    The result keeps ``t1``'s remaining legs in order followed by ``t2``'s.
    """
    _check_pair(t1.leg(leg1), t2.leg(leg2))
    return contract_self(outer(t1, t2), leg1, leg2)


# --------------------------------------------------------------------------
# symmetry rules, found by enumeration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PushRule:
    """``phys_op`` on ``a_0`` equals ``sign`` times ``ops`` on virtual legs.

    ``ops`` is a written word of ``(k, name)`` with ``k`` the virtual leg index
    (1..d), listed in internal leg order ``a_d ... a_1``.
    """

    ops: tuple[tuple[int, str], ...]
    sign: int

    def as_list(self) -> list[tuple[int, str, int]]:
        return [(k, name, self.sign) for k, name in self.ops]


def _vertex_word(d: int, x_legs, z_legs) -> list[tuple[str, str]]:
    word = []
    for k in range(d, -1, -1):
        x, z = k in x_legs, k in z_legs
        if x or z:
            word.append((f"a{k}", {(1, 0): "X", (0, 1): "Z", (1, 1): "ZX"}[x, z]))
    return word


def vertex_symmetry(d: int, x_legs, z_candidates=None) -> tuple[tuple[int, ...], int]:
    """Find the Z-dressing making ``X`` on ``x_legs`` a symmetry of the vertex.

    Returns ``(z_legs, sign)`` with ``word(x_legs, z_legs) T == sign * T``,
    choosing the smallest dressing (then lexicographically smallest) among
    subsets of ``z_candidates`` (default: virtual legs 1..d).
    """
    x_legs = frozenset(x_legs)
    if len(x_legs) % 2:
        raise ValueError("an odd number of X operators cannot preserve even parity")
    t = vertex_tensor(d)
    cands = sorted(range(1, d + 1) if z_candidates is None else z_candidates)
    for size in range(len(cands) + 1):
        for z_legs in itertools.combinations(cands, size):
            moved = apply_leg_word(t, _vertex_word(d, x_legs, set(z_legs)))
            for sign in (1, -1):
                if moved == t.scaled(sign):
                    return tuple(z_legs), sign
    raise ValueError(f"no Z-dressing makes X on {sorted(x_legs)} a vertex symmetry")


def vertex_symmetry_push(d: int, phys_op: str, target: int = 1) -> PushRule:
    """Express ``phys_op`` on the physical leg through the virtual legs.

    ``Z`` spreads to every virtual leg. ``X`` lands on virtual leg ``target``
    together with the Z-dressing that the enumeration finds.
    """
    t = vertex_tensor(d)
    if phys_op == "I":
        return PushRule((), 1)
    if phys_op not in ("X", "Z"):
        raise ValueError(f"unsupported physical operator {phys_op!r}")
    lhs = apply_leg_word(t, [("a0", phys_op)])
    if phys_op == "Z":
        x_legs: set[int] = set()
        z_options = [tuple(range(1, d + 1))]
    else:
        if not 1 <= target <= d:
            raise ValueError(f"target leg must be in 1..{d}")
        x_legs = {target}
        others = range(1, d + 1)
        z_options = [
            z for size in range(d + 1) for z in itertools.combinations(others, size)
        ]
    for z_legs in z_options:
        word = _vertex_word(d, x_legs, set(z_legs))
        rhs = apply_leg_word(t, word)
        for sign in (1, -1):
            if rhs.scaled(sign) == lhs:
                ops = tuple((int(name[1:]), op) for name, op in word)
                return PushRule(ops, sign)
    raise ValueError("no push-through rule found")  # pragma: no cover


_PAULIS = {
    "I": I_OP,
    "X": X_OP,
    "Y": Y_OP,
    "Z": Z_OP,
}


def ghz_rule(l_op: str, r_op: str) -> tuple[str, int]:
    """Spin Pauli equivalent of operators on the GHZ virtual legs.

    Solves ``GHZ . O_l . O_r == i**k P_s . GHZ`` by enumeration and returns
    ``(P, k)``. Raises when the virtual operators change the GHZ parity.
    """
    g = ghz_tensor()
    word = [(leg, name) for leg, name in (("l", l_op), ("r", r_op)) if name != "I"]
    lhs = apply_leg_word(g, word)
    for letter, mat in _PAULIS.items():
        rhs = apply_leg_operator(g, "s", mat, 0)
        for k in range(4):
            if rhs.scaled(1j ** k) == lhs:
                return letter, k
    raise ValueError(f"{l_op}_l {r_op}_r is not absorbed by the GHZ tensor")
