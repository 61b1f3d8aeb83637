import random
from fractions import Fraction

import pytest

from petrigame import Net, NotEnabled, Place, Transition, UnknownPlayer, enabled_for, fire, is_enabled
from petrigame.nets import Chance, enabled_in_group


def two_place_net(**kw):
    return Net(
        players=("P1",),
        places=(Place("a", kw.get("a", 1), 2), Place("b", kw.get("b", 0), 1)),
        transitions=(Transition("t", "P1", {"a": 1}, {"b": 1}),),
    )


def test_fire_moves_tokens():
    net = two_place_net()
    m = net.initial_marking
    assert m == (1, 0)
    assert is_enabled(net, m, "t")
    assert fire(net, m, "t") == (0, 1)


def test_insufficient_tokens_disable():
    net = two_place_net(a=0)
    m = net.initial_marking
    assert not is_enabled(net, m, "t")
    with pytest.raises(NotEnabled):
        fire(net, m, "t")


def test_bound_overflow_disables():
    # b is full: firing would push it to 2 > bound 1, so t must not be enabled
    net = two_place_net(b=1)
    m = net.initial_marking
    assert not is_enabled(net, m, "t")
    with pytest.raises(NotEnabled):
        fire(net, m, "t")


def test_self_loop_needs_headroom():
    # pre and post on the same place cancel out; a full place stays legal
    net = Net(
        players=("P1",),
        places=(Place("a", 1, 1),),
        transitions=(Transition("t", "P1", {"a": 1}, {"a": 1}),),
    )
    assert is_enabled(net, net.initial_marking, "t")
    assert fire(net, net.initial_marking, "t") == (1,)


def test_enabled_for_declaration_order():
    net = Net(
        players=("P1", "P2"),
        places=(Place("a", 1, 3),),
        transitions=(
            Transition("z", "P1", {"a": 1}, {}),
            Transition("y", "P2", {"a": 1}, {}),
            Transition("x", "P1", {}, {"a": 1}),
        ),
    )
    assert [t.name for t in enabled_for(net, net.initial_marking, "P1")] == ["z", "x"]
    with pytest.raises(UnknownPlayer):
        enabled_for(net, net.initial_marking, "nobody")


def test_chance_groups_in_first_appearance_order():
    net = Net(
        players=("P1",),
        places=(Place("a", 1, 5),),
        transitions=(
            Transition("c1", Chance("late", Fraction(1)), {}, {}),
            Transition("c2", Chance("early", Fraction(1, 2)), {}, {}),
            Transition("c3", Chance("early", Fraction(1, 2)), {}, {}),
        ),
    )
    assert net.chance_groups == ("late", "early")
    assert [t.name for t in net.group_members("early")] == ["c2", "c3"]
    assert [t.name for t in enabled_in_group(net, net.initial_marking, "early")] == ["c2", "c3"]


@pytest.mark.parametrize(
    "places,transitions,fragment",
    [
        ((Place("a", 1, 1), Place("a", 0, 1)), (), "duplicate place"),
        ((Place("a", 2, 1),), (), "exceeds bound"),
        ((Place("a", 1, 1),), (Transition("t", "P9", {}, {}),), "undeclared owner"),
        ((Place("a", 1, 1),), (Transition("t", "P1", {"ghost": 1}, {}),), "undeclared place"),
        ((Place("a", 1, 1),), (Transition("t", "P1", {"a": 0}, {}),), "positive"),
        (
            (Place("a", 1, 1),),
            (Transition("t", Chance("g", Fraction(3, 2)), {}, {}),),
            "weight",
        ),
        (
            (Place("a", 1, 1),),
            (Transition("t", "P1", {}, {}), Transition("t", "P1", {}, {})),
            "duplicate transition",
        ),
    ],
)
def test_construction_rejects(places, transitions, fragment):
    with pytest.raises(ValueError, match=fragment):
        Net(players=("P1",), places=places, transitions=transitions)


def test_negative_init_rejected():
    with pytest.raises(ValueError):
        Net(players=("P1",), places=(Place("a", -1, 1),), transitions=())


def test_marking_helpers():
    net = two_place_net()
    m = net.marking_from({"a": 2, "b": 1})
    assert net.counts(m) == {"a": 2, "b": 1}
    assert net.tokens(m, "b") == 1
    with pytest.raises(KeyError):
        net.marking_from({"nope": 1})


def test_random_walks_stay_within_bounds():
    # property: whatever fires, markings remain natural and bounded, and
    # is_enabled agrees exactly with what fire accepts
    from petrigame.gen import GenParams, generate

    rng = random.Random(99)
    for seed in range(60):
        net = generate(GenParams(seed=seed, places=5, transitions=8)).net
        m = net.initial_marking
        for _ in range(30):
            names = [t.name for t in net.transitions]
            t = rng.choice(names)
            if is_enabled(net, m, t):
                m = fire(net, m, t)
            else:
                with pytest.raises(NotEnabled):
                    fire(net, m, t)
            assert all(0 <= v <= p.bound for v, p in zip(m, net.places))
