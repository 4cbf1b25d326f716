from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradedjw import graded_tensor as gt


def _chain_of_swaps(t, leg, target):
    pos = t.position(leg)
    while pos < target:
        t = gt.swap_adjacent_legs(t, pos)
        pos += 1
    while pos > target:
        t = gt.swap_adjacent_legs(t, pos - 1)
        pos -= 1
    return t


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_vertex_tensor_is_even_with_all_even_entries(d):
    t = gt.vertex_tensor(d)
    assert t.parity_even()
    assert len(t.data) == 2**d
    assert [leg.id for leg in t.legs][-1] == "a0"


def test_vertex_tensor_rejects_degree_zero():
    with pytest.raises(ValueError):
        gt.vertex_tensor(0)


def test_ghz_tensor_entries():
    t = gt.ghz_tensor()
    assert t.data == {(0, 0, 0): 1, (1, 1, 1): 1}
    assert not t.legs[0].graded and t.legs[1].graded


@given(st.integers(0, 6), st.integers(0, 6))
def test_move_leg_equals_adjacent_swaps(src, target):
    t = gt.outer(gt.vertex_tensor(3), gt.ghz_tensor("s", "l", "r"))
    leg = t.legs[src].id
    assert gt.move_leg(t, leg, target) == _chain_of_swaps(t, leg, target)


@pytest.mark.parametrize("i", [0, 1, 2])
def test_double_swap_is_identity(i):
    t = gt.vertex_tensor(3)
    assert gt.swap_adjacent_legs(gt.swap_adjacent_legs(t, i), i) == t


def test_contract_equals_outer_then_self_contraction():
    v = gt.vertex_tensor(2)
    g = gt.ghz_tensor()
    direct = gt.contract(v, "a1", g, "l")
    via_outer = gt.contract_self(gt.outer(v, g), "a1", "l")
    assert direct == via_outer
    assert [leg.id for leg in direct.legs] == ["a2", "a0", "s", "r"]


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("op", ["X", "Z"])
def test_push_rules_hold_on_the_vertex(d, op):
    t = gt.vertex_tensor(d)
    for target in range(1, d + 1):
        rule = gt.vertex_symmetry_push(d, op, target)
        lhs = gt.apply_leg_word(t, [("a0", op)])
        rhs = gt.apply_leg_word(t, [(f"a{k}", name) for k, name in rule.ops]).scaled(rule.sign)
        assert lhs == rhs


def test_x_push_through_degree_two_vertex():
    rule = gt.vertex_symmetry_push(2, "X", 1)
    assert rule.ops == ((1, "ZX"),) and rule.sign == 1


@pytest.mark.parametrize(
    "d,x_legs,expected",
    [(4, {1, 3}, ((2, 3), -1)), (3, {1, 2}, ((2,), -1))],
)
def test_vertex_symmetry_dressing(d, x_legs, expected):
    z_legs, sign = gt.vertex_symmetry(d, x_legs)
    assert (z_legs, sign) == expected
    t = gt.vertex_tensor(d)
    word = gt._vertex_word(d, set(x_legs), set(z_legs))
    assert gt.apply_leg_word(t, word).scaled(sign) == t


@pytest.mark.parametrize(
    "l_op,r_op,expected",
    [
        ("X", "X", ("Y", 3)),
        ("X", "ZX", ("X", 0)),
        ("Z", "I", ("Z", 0)),
        ("Z", "Z", ("I", 0)),
        ("ZX", "X", ("X", 0)),
        ("ZX", "ZX", ("Y", 3)),
    ],
)
def test_ghz_rules(l_op, r_op, expected):
    letter, k = gt.ghz_rule(l_op, r_op)
    assert (letter, k % 4) == expected
