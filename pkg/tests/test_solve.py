from fractions import Fraction

import pytest

from petrigame import (
    ImperfectInformation,
    NotConstantSum,
    backward_induction,
    export_efg,
    export_nfg,
    pure_nash,
    to_normal_form,
    unfold,
    unfold_compact,
    zero_sum_value,
)
from petrigame.solve import best_response, expected_value
from conftest import GOLDEN
from oracles import nim_description, nim_first_player_value

F = Fraction


def test_backward_induction_rejects_imperfect_information(mp, pd):
    # simultaneous moves pool the second mover's nodes: not perfect info
    with pytest.raises(ImperfectInformation):
        backward_induction(unfold(mp))
    with pytest.raises(ImperfectInformation):
        backward_induction(unfold(pd))


def test_backward_induction_on_sequential_game():
    d = nim_description((2, 1))
    r = backward_induction(unfold(d))
    # 2 xor 1 != 0: the first mover wins by equalizing the heaps
    assert r.root_values == (F(1), F(-1))
    root_action = r.policy[0]
    assert root_action == "p1_h0_k1"  # take one from the big heap


def test_backward_induction_tie_breaks_lexicographically():
    from petrigame import parse

    text = """\
game "ties"
players P1
time chronon 10 horizon 1

place x init 0 bound 1 visible P1

transition zig owner P1 pre {} post {x:1}
transition alpha owner P1 pre {} post {}

payoff P1 = 0
"""
    r = backward_induction(unfold(parse(text)))
    # both actions score 0; the alphabetically first name wins
    assert set(r.policy.values()) == {"alpha"}


def test_compact_induction_matches_eager():
    for heaps in [(2,), (3,), (2, 2), (1, 2, 3)]:
        d = nim_description(heaps)
        eager = backward_induction(unfold(d))
        compact = backward_induction(unfold_compact(d))
        assert eager.root_values == compact.root_values


def test_nim_values_match_theory():
    for heaps in [(1,), (2,), (4,), (1, 1), (2, 3), (3, 3), (1, 2, 3), (1, 1, 2)]:
        got = backward_induction(unfold_compact(nim_description(heaps))).root_values
        want = nim_first_player_value(heaps)
        assert got == (F(want), F(-want)), heaps


def test_zero_sum_value_matching_pennies(mp):
    sol = zero_sum_value(unfold(mp))
    assert sol.values == (F(0), F(0))
    assert sol.constant == 0
    for player, infosets in sol.behavior.items():
        for acts in infosets.values():
            assert set(acts.values()) == {F(1, 2)}


def test_zero_sum_rejects_variable_sum(pd):
    with pytest.raises(NotConstantSum):
        zero_sum_value(unfold(pd))


def test_zero_sum_on_perfect_info_agrees_with_induction():
    d = nim_description((2, 2))
    t = unfold(d)
    assert zero_sum_value(t).values == backward_induction(t).root_values


def test_best_response_to_uniform_matching_pennies(mp):
    t = unfold(mp)
    sol = zero_sum_value(t)
    # the equilibrium strategy is unexploitable: every best response nets 0
    for player in ("P1", "P2"):
        assert best_response(t, player, sol.behavior) == F(0)


def test_best_response_exploits_a_fixed_pure_strategy(mp):
    t = unfold(mp)
    # P1 always shows heads (removes the tails token)
    p1_sets = {t.info_set[i] for i in range(len(t)) if t.is_decision(i) and t.player_name(i) == "P1"}
    profile = {"P1": {s: {"heads1": F(1), "tails1": F(0)} for s in p1_sets}}
    assert best_response(t, "P2", profile) == F(1)


def test_expected_value_under_uniform_play(mp, pd):
    assert expected_value(unfold(mp), None) == (F(0), F(0))
    assert expected_value(unfold(pd), None) == (F(5, 2), F(5, 2))


def test_normal_form_table(pd):
    nf = to_normal_form(unfold(pd))
    assert nf.shape == (2, 2)
    assert nf.labels == (("cooperate1", "defect1"), ("cooperate2", "defect2"))
    assert nf.payoffs[(0, 0)] == (F(4), F(4))
    assert nf.payoffs[(0, 1)] == (F(0), F(5))
    assert nf.payoffs[(1, 0)] == (F(5), F(0))
    assert nf.payoffs[(1, 1)] == (F(1), F(1))


def test_pure_nash(pd, mp):
    assert pure_nash(to_normal_form(unfold(pd))) == {("defect1", "defect2")}
    assert pure_nash(to_normal_form(unfold(mp))) == set()


def test_normal_form_budget(hidden):
    from petrigame import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        to_normal_form(unfold(hidden), budget=3)


def test_interchange_golden_files(pd, mp):
    assert export_efg(unfold(pd)) == (GOLDEN / "pd.efg").read_text()
    assert export_nfg(to_normal_form(unfold(pd))) == (GOLDEN / "pd.nfg").read_text()
    assert export_efg(unfold(mp)) == (GOLDEN / "mp.efg").read_text()
    assert export_nfg(to_normal_form(unfold(mp))) == (GOLDEN / "mp.nfg").read_text()


def test_rational_rendering_in_exports():
    from petrigame.solve import _fmt_number

    assert _fmt_number(F(3)) == "3"
    assert _fmt_number(F(-3)) == "-3"
    assert _fmt_number(F(1, 2)) == "0.5"
    assert _fmt_number(F(3, 40)) == "0.075"  # 40 = 2^3 * 5
    assert _fmt_number(F(-1, 4)) == "-0.25"
    assert _fmt_number(F(1, 3)) == "1/3"
    assert _fmt_number(F(22, 7)) == "22/7"


def test_hidden_signal_zero_sum_after_rescaling(hidden):
    # the game itself is not constant-sum, which the solver must refuse…
    t = unfold(hidden)
    with pytest.raises(NotConstantSum):
        zero_sum_value(t)
    # …but behavior under uniform play is still well defined
    v = expected_value(t, None)
    assert v[0] + v[1] != 0  # sanity: truly variable-sum
