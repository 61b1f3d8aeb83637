"""End-to-end checks that pin down the advertised behavior of the package.

Each test states a measurable promise — exact values, statistical bounds,
wall-clock budgets — and prints one PASS line when it holds.  Run with
``pytest -v`` (add ``-s`` to see the lines).
"""

import asyncio
import json
import random
import time
from fractions import Fraction

import pytest
import websockets

from petrigame import (
    ParseError,
    parse,
    serialize,
    unfold,
    unfold_compact,
    validate,
)
from petrigame.engine import replay, run_local_session
from petrigame.gen import GenParams, generate
from petrigame.nets import NotEnabled, fire, is_enabled
from petrigame.server import GameServer, ServerConfig
from petrigame.solve import (
    backward_induction,
    best_response,
    export_efg,
    export_nfg,
    pure_nash,
    to_normal_form,
    zero_sum_value,
)
from petrigame.unfold import chronon_step, tree_stats
from petrigame.cli import simulate_expectation_check

from conftest import GAMES, GOLDEN, load_game
from oracles import nim_description, nim_first_player_value, nim_xor_value

F = Fraction


class Budget:
    """Asserts the block finished inside its wall-clock allowance."""

    def __init__(self, seconds: float):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            self.elapsed = time.perf_counter() - self.t0
            assert self.elapsed < self.seconds, (
                f"took {self.elapsed:.2f}s, budget {self.seconds}s"
            )
        return False


def ok(msg: str) -> None:
    print(f"[PASS] {msg}")


def test_firing_suite_on_a_thousand_nets():
    with Budget(5):
        rng = random.Random(2024)
        fired = 0
        for seed in range(1000):
            net = generate(GenParams(seed=seed, places=5, transitions=7)).net
            m = net.initial_marking
            assert m == tuple(p.init for p in net.places)
            for _ in range(12):
                t = rng.choice(net.transitions).name
                if is_enabled(net, m, t):
                    m2 = fire(net, m, t)
                    fired += 1
                    # tokens move exactly per the arcs, inside the bounds
                    assert all(0 <= v <= p.bound for v, p in zip(m2, net.places))
                    tr = net.transition(t)
                    for name, w in tr.pre.items():
                        i = net.place_index(name)
                        assert m2[i] == m[i] - w + tr.post.get(name, 0)
                    m = m2
                else:
                    with pytest.raises(NotEnabled):
                        fire(net, m, t)
        assert fired > 2000  # the walks actually exercised firing
    ok(f"firing semantics held on 1000 generated nets ({fired} firings)")


def test_parser_round_trip_and_fuzz():
    with Budget(30):
        texts = [(GAMES / f).read_text() for f in
                 ("prisoners_dilemma.game", "matching_pennies.game",
                  "nim_3_4_5.game", "hidden_signal.game")]
        for seed in range(1000):
            texts.append(serialize(generate(GenParams(
                seed=seed, places=1 + seed % 6, transitions=1 + seed % 8,
                chance_groups=seed % 3))))
        for text in texts:
            assert serialize(parse(text)) == text

        rng = random.Random(7)
        words = ("game", "players", "time", "place", "transition", "chance",
                 "payoff", "terminal", "owner", "pre", "post", "{", "}", '"',
                 "1/2", "init", "bound", "visible", "=", "tokens", "(", ")")
        survived = 0
        for i in range(100_000):
            if i % 2:
                blob = bytes(rng.randrange(256) for _ in range(rng.randrange(60)))
            else:
                blob = " ".join(
                    rng.choice(words) for _ in range(rng.randrange(12))
                ).encode()
            try:
                parse(blob)
            except ParseError:
                pass
            survived += 1
        assert survived == 100_000
    ok("canonical round-trip on 1004 descriptions; 100000 fuzz inputs never crashed the parser")


def _check_tree_paths_replay(desc, tree):
    net = desc.net
    stack = [(tree.root, {}, {})]
    checked = 0
    while stack:
        node, moves, draws = stack.pop()
        if tree.is_terminal(node):
            m = net.initial_marking
            for k in range(tree.chronon[node]):
                m = chronon_step(desc, m, moves.get(k, {}), draws.get(k, {}))
            assert m == tree.marking_of(node)
            assert desc.payoff_vector(m) == tree.payoff(node)
            checked += 1
            continue
        k = tree.chronon[node]
        for e in tree.edges(node):
            if tree.is_decision(node):
                step = {**moves, k: {**moves.get(k, {}), tree.player_name(node): e.action}}
                stack.append((e.child, step, draws))
            else:
                step = {**draws, k: {**draws.get(k, {}), tree.group_name(node): e.action}}
                stack.append((e.child, moves, step))
    return checked


def test_unfolding_agrees_with_step_semantics():
    with Budget(5):
        total = 0
        for name in ("prisoners_dilemma", "matching_pennies", "hidden_signal"):
            desc = load_game(name)
            total += _check_tree_paths_replay(desc, unfold(desc))
        for seed in range(15):
            desc = generate(GenParams(seed=seed, places=4, transitions=5,
                                      chance_groups=1, horizon=2, max_nodes=400))
            total += _check_tree_paths_replay(desc, unfold(desc, budget=400))
    ok(f"every unfolded path replays through the step semantics ({total} terminals)")


def test_matching_pennies_is_solved_exactly():
    with Budget(1):
        tree = unfold(load_game("matching_pennies"))
        sol = zero_sum_value(tree)
        assert sol.values == (F(0), F(0))
        for infosets in sol.behavior.values():
            for acts in infosets.values():
                assert sorted(acts.values()) == [F(1, 2), F(1, 2)]
        assert best_response(tree, "P1", sol.behavior) == F(0)
        assert best_response(tree, "P2", sol.behavior) == F(0)
    ok("matching pennies: value 0, both mix 1/2-1/2, equilibrium is unexploitable")


def test_dilemma_has_the_unique_defecting_equilibrium():
    with Budget(1):
        nf = to_normal_form(unfold(load_game("prisoners_dilemma")))
        assert nf.payoffs[(0, 0)] == (F(4), F(4))
        assert nf.payoffs[(1, 1)] == (F(1), F(1))
        assert pure_nash(nf) == {("defect1", "defect2")}
    ok("dilemma: mutual defection is the unique pure equilibrium")


def test_nim_against_independent_minimax_and_xor():
    with Budget(60):
        configs = []
        for a in range(1, 6):
            configs.append((a,))
            for b in range(a, 6):
                configs.append((a, b))
                for c in range(b, 6):
                    configs.append((a, b, c))
        assert len(configs) == 55
        for heaps in configs:
            d = nim_description(heaps)
            got = backward_induction(unfold_compact(d)).root_values
            want = nim_first_player_value(heaps)
            assert want == nim_xor_value(heaps), heaps  # the two oracles agree
            assert got == (F(want), F(-want)), heaps
    ok("nim solved correctly on all 55 heap configurations up to 3x5")


def test_duel_cross_solver_agreement():
    with Budget(120):
        solved = 0
        for seed in range(200):
            d = generate(GenParams(seed=seed, flavor="duel", places=3,
                                   transitions=6, horizon=4, max_nodes=500))
            tree = unfold(d, budget=500)
            bi = backward_induction(tree)
            zs = zero_sum_value(tree)
            assert bi.root_values == zs.values, f"seed {seed}"
            solved += 1
    ok(f"induction and the zero-sum program agree on {solved}/200 generated duels")


def test_descriptions_stay_small_while_trees_explode():
    with Budget(30):
        byte_sizes = []
        node_counts = []
        for h in (1, 2, 3):
            d = nim_description((4,) * h)
            byte_sizes.append(len(serialize(d).encode()))
            node_counts.append(unfold_compact(d).stats()["node_count"])
        # description grows about linearly per added heap…
        step1 = byte_sizes[1] - byte_sizes[0]
        step2 = byte_sizes[2] - byte_sizes[1]
        assert step2 <= step1 * 1.5
        # …while the game tree multiplies
        assert node_counts[1] >= 5 * node_counts[0]
        assert node_counts[2] >= 5 * node_counts[1]
    ok(
        "description bytes "
        + "/".join(map(str, byte_sizes))
        + " vs tree nodes "
        + "/".join(map(str, node_counts))
    )


def test_interchange_output_matches_frozen_goldens():
    with Budget(1):
        pd, mp = load_game("prisoners_dilemma"), load_game("matching_pennies")
        assert export_efg(unfold(pd)) == (GOLDEN / "pd.efg").read_text()
        assert export_nfg(to_normal_form(unfold(pd))) == (GOLDEN / "pd.nfg").read_text()
        assert export_efg(unfold(mp)) == (GOLDEN / "mp.efg").read_text()
        assert export_nfg(to_normal_form(unfold(mp))) == (GOLDEN / "mp.nfg").read_text()
    ok("interchange text is byte-identical to the audited golden files")


METRONOME_20 = """\
game "metronome"
players P1
time chronon 100 horizon 20

place beat init 0 bound 20 visible P1

transition spin owner P1 pre {} post {beat:1}

payoff P1 = 0 + beat
"""


def test_server_ticks_are_equidistant_and_late_actions_rejected():
    async def scenario():
        server = GameServer(parse(METRONOME_20), ServerConfig(seed=0, start_delay_ms=50,
                                                              log_dir="/tmp/petrigame-test-logs"))
        await server.start()
        uri = f"ws://127.0.0.1:{server.port}"
        arrivals = []
        late_reply = None
        async with websockets.connect(uri) as ws:
            await ws.send(json.dumps({"type": "join", "player": "P1"}))
            loop = asyncio.get_running_loop()
            while True:
                msg = json.loads(await asyncio.wait_for(ws.recv(), timeout=5))
                if msg["type"] == "tick":
                    arrivals.append(loop.time())
                    if msg["chronon"] == 1:
                        await ws.send(json.dumps(
                            {"type": "action", "chronon": 0, "transition": "spin"}))
                if msg["type"] == "rejected":
                    late_reply = msg
                if msg["type"] == "end":
                    break
        await server.stop()
        return arrivals, late_reply

    with Budget(10):
        arrivals, late_reply = asyncio.run(scenario())
        gaps = [(b - a) * 1000 for a, b in zip(arrivals, arrivals[1:])]
        assert len(gaps) == 19
        assert all(80 <= g <= 120 for g in gaps), [round(g, 1) for g in gaps]
        assert late_reply is not None and late_reply["reason"] == "late"
    spread = f"{min(gaps):.1f}..{max(gaps):.1f}ms"
    ok(f"20 ticks at 100ms stayed equidistant ({spread}); stale submission rejected as late")


def test_replayed_logs_reproduce_every_session():
    with Budget(60):
        cases = [(load_game("prisoners_dilemma"), s) for s in range(10)]
        cases += [(load_game("matching_pennies"), s) for s in range(10)]
        cases += [(load_game("hidden_signal"), s) for s in range(10)]
        cases += [
            (generate(GenParams(seed=s, places=4, transitions=6, chance_groups=1,
                                horizon=3)), s)
            for s in range(10)
        ]
        cases += [
            (generate(GenParams(seed=s, flavor="duel", places=3, transitions=6,
                                horizon=4, max_nodes=400)), s)
            for s in range(10)
        ]
        assert len(cases) == 50
        for desc, seed in cases:
            eng = run_local_session(desc, seed=seed)
            lines = eng.log_lines()
            # byte-for-byte reproducible
            assert run_local_session(desc, seed=seed).log_lines() == lines
            # self-verifying, and the replay reaches the same end state
            res = replay(lines)
            assert res.payoffs == eng.payoffs
            assert res.markings[-1] == eng.marking
        # the played paths live in the unfolding with matching payoffs
        hidden = load_game("hidden_signal")
        tree = unfold(hidden)
        for seed in range(10):
            eng = run_local_session(hidden, seed=seed)
            res = replay(eng.log_lines())
            node = tree.root
            while not tree.is_terminal(node):
                k = tree.chronon[node]
                if tree.is_decision(node):
                    want = res.moves[k][tree.player_name(node)]
                else:
                    want = res.draws[k][tree.group_name(node)]
                (edge,) = [e for e in tree.edges(node) if e.action == want]
                node = edge.child
            assert tree.payoff(node) == eng.payoffs
    ok("50 logged sessions replayed identically; played paths found in the unfolding")


def test_simulation_means_match_tree_expectation():
    with Budget(60):
        report = simulate_expectation_check(load_game("prisoners_dilemma"),
                                            sessions=10_000, seed=0)
        assert report["ok"], report
        for p in ("P1", "P2"):
            assert report["players"][p]["expected"] == "5/2"
    means = {p: r["mean"] for p, r in report["players"].items()}
    ok(f"10000 uniform-bot sessions averaged {means} against expectation 5/2")
