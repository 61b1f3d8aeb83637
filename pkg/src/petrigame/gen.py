"""Seeded random game descriptions, for fuzzing and solver cross-checks.

Two flavors:

``general``
    Anything the language allows: partial visibility, simultaneous moves,
    weighted chance groups, optional terminal predicate.  Output always
    passes validation with no errors; nothing else is promised.

``duel``
    Two players, full visibility, no chance, strict turn alternation via a
    pair of token places, and payoffs that sum to the same constant at
    every marking.  Each player's transitions all have pairwise distinct
    nonzero marking deltas, so an opponent can always read the last move
    off the state: the unfolding is a perfect-information game tree and
    backward induction applies.

``generate`` is a pure function of its parameters.  When ``max_nodes`` is
set, the generator re-rolls (shrinking the horizon if needed) until the
unfolding fits the budget.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .lang import Atom, GameDescription, Payoff, validate
from .nets import Chance, Place, Transition
from .unfold import BudgetExceeded, unfold


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    flavor: str = "general"  # "general" | "duel"
    players: int = 2
    places: int = 4
    transitions: int = 6
    chance_groups: int = 1  # general flavor only
    horizon: int = 3
    chronon_ms: int = 100
    max_bound: int = 3
    max_nodes: int | None = None


def generate(params: GenParams) -> GameDescription:
    if params.flavor not in ("general", "duel"):
        raise ValueError(f"unknown flavor {params.flavor!r}")
    if params.players < 1 or (params.flavor == "duel" and params.players != 2):
        raise ValueError("bad player count for flavor")
    rng = random.Random(params.seed)
    build = _build_general if params.flavor == "general" else _build_duel
    shrink = 0
    for _ in range(200):
        desc = build(params, rng, max(1, params.horizon - shrink))
        if any(d.severity == "error" for d in validate(desc)):
            continue
        if params.max_nodes is None:
            return desc
        try:
            unfold(desc, budget=params.max_nodes)
            return desc
        except BudgetExceeded:
            shrink = min(shrink + 1, params.horizon - 1)
    raise RuntimeError(f"no fitting game within 200 attempts (seed {params.seed})")


# ---------------------------------------------------------------------------


def _rand_places(rng: random.Random, count: int, max_bound: int, players: list[str]):
    places = []
    for i in range(count):
        bound = rng.randint(1, max_bound)
        init = rng.randint(0, bound)
        mode = rng.randrange(4)
        if mode == 0:
            visible: frozenset = frozenset()
        elif mode == 1:
            visible = frozenset(rng.sample(players, rng.randint(1, len(players))))
        else:
            visible = frozenset(players)
        places.append(Place(f"p{i}", init, bound, visible))
    return places


def _rand_arcs(rng: random.Random, places, max_arcs: int) -> dict[str, int]:
    chosen = rng.sample(places, min(rng.randint(0, max_arcs), len(places)))
    return {p.name: rng.randint(1, max(1, p.bound)) for p in chosen}


def _rand_payoff(rng: random.Random, places) -> Payoff:
    coeffs = {
        p.name: Fraction(rng.choice([-2, -1, 1, 2]))
        for p in rng.sample(places, rng.randint(0, min(3, len(places))))
    }
    return Payoff(Fraction(rng.randint(-3, 3)), coeffs)


def _rand_terminal(rng: random.Random, desc_places) -> Atom | None:
    holds = {">=": lambda n, v: n >= v, "=": lambda n, v: n == v, "<=": lambda n, v: n <= v}
    for _ in range(5):
        p = rng.choice(desc_places)
        op = rng.choice(list(holds))
        value = rng.randint(0, p.bound)
        if not holds[op](p.init, value):  # never terminal before any play
            return Atom(p.name, op, value)
    return None


def _build_general(params: GenParams, rng: random.Random, horizon: int) -> GameDescription:
    players = [f"P{i+1}" for i in range(params.players)]
    places = _rand_places(rng, params.places, params.max_bound, players)
    transitions = []
    for i in range(params.transitions):
        transitions.append(
            Transition(
                f"t{i}",
                rng.choice(players),
                _rand_arcs(rng, places, 2),
                _rand_arcs(rng, places, 2),
            )
        )
    for g in range(params.chance_groups):
        n = rng.randint(1, 3)
        parts = [rng.randint(1, 5) for _ in range(n)]
        total = sum(parts)
        for j, part in enumerate(parts):
            transitions.append(
                Transition(
                    f"c{g}_{j}",
                    Chance(f"g{g}", Fraction(part, total)),
                    _rand_arcs(rng, places, 1),
                    _rand_arcs(rng, places, 1),
                )
            )
    terminal = _rand_terminal(rng, places) if rng.random() < 0.5 else None
    return GameDescription(
        title=f"gen-{params.seed}",
        players=tuple(players),
        chronon_ms=params.chronon_ms,
        horizon=horizon,
        places=tuple(places),
        transitions=tuple(transitions),
        payoffs={p: _rand_payoff(rng, places) for p in players},
        terminal=terminal,
    )


def _build_duel(params: GenParams, rng: random.Random, horizon: int) -> GameDescription:
    players = ["P1", "P2"]
    tokens = [Place("turn1", 1, 1, frozenset(players)), Place("turn2", 0, 1, frozenset(players))]
    resources = []
    for i in range(params.places):
        bound = rng.randint(1, params.max_bound)
        resources.append(Place(f"r{i}", rng.randint(0, bound), bound, frozenset(players)))
    places = tokens + resources

    transitions = []
    per_player = max(1, params.transitions // 2)
    for pi, player in enumerate(players):
        own, other = tokens[pi].name, tokens[1 - pi].name
        deltas_seen = set()
        for j in range(per_player):
            for _ in range(20):
                pre = {own: 1, **_rand_arcs(rng, resources, 1)}
                post = {other: 1, **_rand_arcs(rng, resources, 1)}
                delta = tuple(
                    sorted(
                        (n, d)
                        for n in set(pre) | set(post)
                        if (d := post.get(n, 0) - pre.get(n, 0)) != 0
                    )
                )
                if delta not in deltas_seen:
                    deltas_seen.add(delta)
                    transitions.append(Transition(f"{player.lower()}_m{j}", player, pre, post))
                    break

    a = {r.name: Fraction(rng.choice([-2, -1, 1, 2])) for r in rng.sample(resources, len(resources))}
    c0 = Fraction(rng.randint(-2, 2))
    total = Fraction(rng.choice([0, 0, 0, 1, -1]))
    payoffs = {
        "P1": Payoff(c0, a),
        "P2": Payoff(total - c0, {n: -v for n, v in a.items()}),
    }
    terminal = None
    if rng.random() < 0.4:
        drainable = [r for r in resources if r.init > 0]
        if drainable:
            terminal = Atom(rng.choice(drainable).name, "=", 0)
    return GameDescription(
        title=f"duel-{params.seed}",
        players=tuple(players),
        chronon_ms=params.chronon_ms,
        horizon=horizon,
        places=tuple(places),
        transitions=tuple(transitions),
        payoffs=payoffs,
        terminal=terminal,
    )
