import json

import pytest

from petrigame import parse, unfold
from petrigame.engine import (
    Accepted,
    CorruptLog,
    Rejected,
    SessionEngine,
    VersionMismatch,
    InvalidDescription,
    bot_first,
    bot_noop,
    bot_random,
    bot_rng,
    replay,
    run_local_session,
)
from conftest import load_game


def fresh(game="prisoners_dilemma", seed=1):
    return SessionEngine(load_game(game), seed=seed)


def test_create_rejects_invalid_description():
    bad = parse(
        'game "x"\nplayers P1\ntime chronon 10 horizon 1\n'
        "place a init 0 bound 1\n"
        "transition t owner P1 pre {} post {}\n"
        "payoff P1 = 0 + ghost\n"
    )
    with pytest.raises(InvalidDescription):
        SessionEngine(bad, seed=0)


def test_header_and_digest():
    eng = fresh()
    head = eng.records[0]
    assert head["record"] == "header"
    assert head["protocol"] == 1
    assert head["seed"] == 1
    assert head["description_sha256"] == eng.digest
    assert parse(head["description"]).title == eng.desc.title


def test_action_acceptance_and_state():
    eng = fresh()
    got = eng.on_action("P1", 0, "defect1", 5)
    assert got == Accepted("P1", 0, "defect1")
    assert eng.pending == {"P1": "defect1"}


@pytest.mark.parametrize(
    "chronon,transition,reason",
    [
        (3, "defect1", "wrong_chronon"),  # future chronon
        (0, "cooperate2", "illegal"),  # not P1's transition
        (0, "missing", "illegal"),  # no such transition
    ],
)
def test_rejection_reasons(chronon, transition, reason):
    eng = fresh()
    got = eng.on_action("P1", chronon, transition, 0)
    assert got == Rejected("P1", chronon, transition, reason)
    assert eng.pending == {}


def test_duplicate_then_late():
    eng = fresh("hidden_signal")
    assert isinstance(eng.on_action("P2", 0, "noop_probe", 0), Rejected)  # illegal, not pending
    eng.tick(100)
    # chronon has moved on: resubmitting for 0 is late, not duplicate/illegal
    got = eng.on_action("P1", 0, "brag", 150)
    assert got.reason == "late"


def test_duplicate_submission():
    d = load_game("hidden_signal")
    eng = SessionEngine(d, seed=0)
    eng.tick(0)  # chronon 1 opens; the turn chain reaches P1
    first = eng.on_action("P1", 1, "stay", 10)
    assert isinstance(first, Accepted)
    # duplicate outranks illegal: the second submission is refused as a
    # duplicate even when the named transition would also be off-menu
    again = eng.on_action("P1", 1, "no_such", 11)
    assert again.reason == "duplicate"


def test_wrong_chronon_wins_over_everything_after_end():
    eng = fresh()
    eng.tick(0)
    assert eng.ended
    got = eng.on_action("P1", 0, "defect1", 1)
    assert got.reason == "wrong_chronon"


def test_rejected_actions_leave_no_trace_in_ticks():
    eng = fresh()
    eng.on_action("P1", 0, "cooperate2", 0)  # illegal
    eng.on_action("P1", 0, "cooperate1", 1)  # accepted
    rec = eng.tick(2)
    assert rec["moves"] == {"P1": "cooperate1"}


def test_menu_degradation_inside_tick():
    eng = fresh("matching_pennies", seed=0)
    # both calls are on P2's menu at the opening, whatever P1 does
    assert eng.menu("P2") == ["call_heads", "call_tails"]
    eng.on_action("P1", 0, "heads1", 0)
    eng.on_action("P2", 0, "call_heads", 0)
    eng.tick(1)
    # heads1 removed the token call_heads needed: the call degraded to noop
    assert eng.payoffs is not None
    assert [str(v) for v in eng.payoffs] == ["1", "-1"]


def test_view_respects_visibility():
    eng = fresh("hidden_signal")
    assert "coin" not in eng.view("P2")
    assert "coin" in eng.view("P1")
    assert set(eng.view(None)) == {p.name for p in eng.desc.places}


def test_draws_are_exact_and_seed_deterministic():
    d = load_game("hidden_signal")
    a = SessionEngine(d, seed=42)
    b = SessionEngine(d, seed=42)
    assert [a.draw() for _ in range(20)] == [b.draw() for _ in range(20)]
    c = SessionEngine(d, seed=43)
    assert [a.draw() for _ in range(20)] != [c.draw() for _ in range(20)]


def test_weighted_draw_frequencies():
    text = (
        'game "skew"\nplayers P1\ntime chronon 10 horizon 1\n'
        "place a init 0 bound 1\n"
        "transition t owner P1 pre {} post {}\n"
        "chance c1 group g weight 9/10 pre {} post {}\n"
        "chance c2 group g weight 1/10 pre {} post {}\n"
        "payoff P1 = 0\n"
    )
    eng = SessionEngine(parse(text), seed=7)
    draws = [eng.draw()["g"] for _ in range(5000)]
    share = draws.count("c1") / len(draws)
    assert 0.87 < share < 0.93


def test_run_local_session_is_reproducible(pd):
    a = run_local_session(pd, seed=5)
    b = run_local_session(pd, seed=5)
    assert a.log_lines() == b.log_lines()
    c = run_local_session(pd, seed=6)
    assert a.records[0]["seed"] != c.records[0]["seed"]


def test_bots():
    menu = ["b", "a", "c"]
    assert bot_first(menu, {}, bot_rng(0, "P1")) == "b"
    assert bot_noop(menu, {}, bot_rng(0, "P1")) is None
    assert bot_random([], {}, bot_rng(0, "P1")) is None
    picks = {bot_random(menu, {}, bot_rng(0, "P1")) for _ in range(50)}
    assert picks <= set(menu)
    # per-player generators differ
    assert bot_rng(3, "P1").random() != bot_rng(3, "P2").random()


def test_noop_bots_idle_to_horizon(hidden):
    eng = run_local_session(hidden, seed=0, bots={"P1": "noop", "P2": "noop"})
    # nobody ever acts: the coin still flips and the turn chain still advances,
    # and with no guess or fold the game runs out the horizon
    assert eng.chronon == hidden.horizon
    ticks = [r for r in eng.records if r["record"] == "tick"]
    assert all(t["moves"] == {} for t in ticks)


def test_replay_round_trip(hidden):
    eng = run_local_session(hidden, seed=9)
    res = replay("\n".join(eng.log_lines()))
    assert res.payoffs == eng.payoffs
    assert res.markings[-1] == eng.marking
    assert res.seed == 9
    assert len(res.moves) == len(res.draws) == eng.chronon


def test_replay_accepts_line_iterables(pd):
    eng = run_local_session(pd, seed=2)
    assert replay(eng.log_lines()).payoffs == eng.payoffs


@pytest.mark.parametrize(
    "tamper,fragment",
    [
        (lambda L: L[1:], "header"),
        (lambda L: L[:1] + ["{not json"] + L[1:], "not valid JSON"),
        (lambda L: [l.replace('"seed":5', '"seed":6') for l in L], "contradict the seed"),
        (
            lambda L: [l.replace('"protocol":1', '"protocol":2') for l in L],
            None,  # VersionMismatch, checked separately
        ),
    ],
)
def test_replay_rejects_tampering(hidden, tamper, fragment):
    lines = run_local_session(hidden, seed=5).log_lines()
    bad = tamper(lines)
    if fragment is None:
        with pytest.raises(VersionMismatch):
            replay(bad)
    else:
        with pytest.raises(CorruptLog, match=fragment):
            replay(bad)


def test_replay_rejects_marking_tampering(hidden):
    lines = run_local_session(hidden, seed=5).log_lines()
    out = []
    for line in lines:
        rec = json.loads(line)
        if rec["record"] == "tick" and rec["chronon"] == 1:
            rec["marking"]["coin"] = 1 - rec["marking"]["coin"]
        out.append(json.dumps(rec))
    with pytest.raises(CorruptLog, match="diverges|contradict"):
        replay(out)


def test_replay_rejects_forged_acceptance(hidden):
    lines = run_local_session(hidden, seed=5, bots={"P1": "noop", "P2": "noop"}).log_lines()
    forged = []
    for line in lines:
        forged.append(line)
        rec = json.loads(line)
        if rec["record"] == "join" and rec["player"] == "P1":
            forged.append(json.dumps({
                "record": "action", "player": "P1", "chronon": 0,
                "transition": "brag", "at_ms": 0, "outcome": "accepted",
            }))
    with pytest.raises(CorruptLog, match="would be rejected"):
        replay(forged)


def test_played_paths_exist_in_the_unfolding(hidden):
    # every logged playout must walk root-to-terminal through the tree and
    # land on the same payoffs
    tree = unfold(hidden)
    for seed in range(10):
        eng = run_local_session(hidden, seed=seed)
        res = replay(eng.log_lines())
        node = tree.root
        k = 0
        while not tree.is_terminal(node):
            if tree.is_decision(node):
                player = tree.player_name(node)
                want = res.moves[tree.chronon[node]].get(player)
                assert want is not None, "bot skipped a nonempty menu"
            else:
                want = res.draws[tree.chronon[node]][tree.group_name(node)]
            (edge,) = [e for e in tree.edges(node) if e.action == want]
            node = edge.child
        assert tree.payoff(node) == eng.payoffs
