from fractions import Fraction

import pytest

from leakproof.examples import matching_pennies, uniform_mixing
from leakproof.game import ROOT
from leakproof.leakage import (InconsistentOrder, LeakageOrder, LeakageType, LeakageTypeSpace, PrivateHistory,
                               TypeSpaceError, all_orders, common_knowledge_space, consistent_orders,
                               minimal_type_space, nested_type_space, private_histories)


def test_three_weak_orders_on_two_players():
    assert len(all_orders(2)) == 3
    assert len(all_orders(3)) == 13


def test_consistent_orders_equal_speed():
    got = set(consistent_orders(LeakageOrder.equal(2), 1))
    # player 1 observes nobody: either tied with 0 or slower than 0
    assert got == {LeakageOrder((0, 0)), LeakageOrder((1, 0))}


def test_consistent_orders_fast_player_is_pinned_down():
    assert consistent_orders(LeakageOrder((0, 1)), 1) == [LeakageOrder((0, 1))]
    assert consistent_orders(LeakageOrder((0,)), 0) == [LeakageOrder((0,))]


def test_minimal_space_two_players():
    ms = minimal_type_space(2)
    pairs = {prof: order for prof, order in ms.admissible()}
    assert pairs == {("t0", "t0"): LeakageOrder((0, 0)),
                     ("t1", "t0"): LeakageOrder((1, 0)),
                     ("t0", "t1"): LeakageOrder((0, 1))}
    assert ms.is_minimally_rich()
    assert ms.zero_profile() == ("t0", "t0")
    assert ms.one_types(0) == ["t1"] and ms.one_types(1) == ["t1"]


def test_minimal_space_sizes():
    assert len(minimal_type_space(1).admissible()) == 1
    assert len(minimal_type_space(3).admissible()) == 4


def test_first_order_beliefs_consistent_with_true_order():
    ms = minimal_type_space(3)
    for (i, name), t in ms.types.items():
        for prof, order, p in ms.belief(i, name):
            assert order.observes(i) == t.signature


def test_common_knowledge_space_is_not_minimally_rich():
    ck = common_knowledge_space(LeakageOrder((0, 1)))
    assert not ck.is_minimally_rich()
    assert ck.admissible() == [(("ck", "ck"), LeakageOrder((0, 1)))]


def test_nested_space_all_classes_true_order_is_common_knowledge():
    order = LeakageOrder((0, 1))
    sp = nested_type_space(order, [order, order])
    prof = sp.true_profile
    assert sp.order_for(prof) == order
    for i, name in enumerate(prof):
        assert all(o == order for _, o, _ in sp.belief(i, name))


def test_nested_space_reproduces_one_profile():
    sp = nested_type_space(LeakageOrder((0, 1)), [LeakageOrder((0, 0)), LeakageOrder((0, 1))])
    ms = minimal_type_space(2)
    slow, fast = sp.true_profile
    assert [o for _, o, _ in sp.belief(0, slow)] == [o for _, o, _ in ms.belief(0, "t0")]
    assert [o for _, o, _ in sp.belief(1, fast)] == [o for _, o, _ in ms.belief(1, "t1")]


def test_nested_space_single_class_is_zero_shaped():
    sp = nested_type_space(LeakageOrder.equal(3), [LeakageOrder.equal(3)])
    assert sp.zero_profile() == sp.true_profile


def test_nested_space_rejects_inconsistent_order():
    with pytest.raises(InconsistentOrder):
        nested_type_space(LeakageOrder((0, 1)), [LeakageOrder((1, 0)), LeakageOrder((0, 1))])


def test_type_space_validation_errors():
    bad_sum = LeakageType("a", 0, frozenset(), ((("a",), Fraction(1, 2)),))
    with pytest.raises(TypeSpaceError):
        LeakageTypeSpace(1, [bad_sum])
    dangling = LeakageType("a", 0, frozenset(), ((("a", "zz"), Fraction(1)),))
    other = LeakageType("b", 1, frozenset(), ((("a", "b"), Fraction(1)),))
    with pytest.raises(TypeSpaceError):
        LeakageTypeSpace(2, [dangling, other])
    # each player claims to observe the other: no order does that
    one = LeakageType("a", 0, frozenset({1}), ((("a", "b"), Fraction(1)),))
    two = LeakageType("b", 1, frozenset({0}), ((("a", "b"), Fraction(1)),))
    with pytest.raises(TypeSpaceError):
        LeakageTypeSpace(2, [one, two])


def test_slow_player_private_histories_are_public():
    g = matching_pennies()
    assert private_histories(g, LeakageOrder((0, 1)), 0) == [PrivateHistory(ROOT)]


def test_fast_player_sees_each_concurrent_action():
    g = matching_pennies()
    got = private_histories(g, LeakageOrder((0, 1)), 1)
    assert sorted(str(ph) for ph in got) == ["root || 0:H", "root || 0:T"]
    marked = private_histories(g, LeakageOrder((0, 1)), 1, opponents=uniform_mixing())
    assert all(on for _, on in marked)


def test_private_history_nests_between_public_histories():
    ph = PrivateHistory.of((), {0: "H"})
    nxt = (("H", "T"),)
    assert ph.public == nxt[:0]
    assert all(nxt[0][j] == a for j, a in ph.leaked)
