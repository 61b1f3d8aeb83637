"""Unfolding a timed net into an extensive-form game tree.

Time advances in chronons.  Within one chronon every player with at least
one enabled transition picks exactly one of them (menus are fixed by the
chronon's opening marking), then the submissions resolve in canonical
order: players in declaration order first, then every chance group in
declaration order draws one member by weight.  A firing that is no longer
enabled when its turn comes degrades to a no-op.  At each chronon boundary
the game ends if the terminal predicate holds or the horizon is reached.

Simultaneity is encoded by consecutive plies inside one chronon: a later
actor's information sets pool across the earlier actors' same-chronon
choices, because observations only advance at chronon boundaries.  A
player's observation is everything the player is entitled to know: the
counts of places visible to them and their own enabled menu at every
boundary passed, plus their own submitted actions.  Decision nodes with
equal observations form one information set (and therefore always offer
the same menu).

``unfold`` materializes the full tree.  ``unfold_compact`` builds a
marking-indexed DAG for the special case of sequential, deterministic,
fully visible games, where distinct paths reaching the same marking root
identical subtrees; it reports the statistics of the logical tree without
materializing it, which is the only practical route once trees reach
millions of nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .lang import GameDescription
from .nets import Chance, Marking, Net, enabled_for

DECISION = 0
CHANCE = 1
TERMINAL = 2

DEFAULT_BUDGET = 1_000_000

ObservationKey = tuple


class BudgetExceeded(Exception):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"unfolding exceeded the node budget of {budget}")


# ---------------------------------------------------------------------------
# The shared single-chronon kernel


def chronon_step(
    desc: GameDescription,
    m: Marking,
    moves: Mapping[str, str],
    draws: Mapping[str, str],
) -> Marking:
    """Resolve one chronon and return the next marking.

    ``moves`` maps player name to the submitted transition name ("noop" or
    absence means no action); ``draws`` maps every chance group to the
    member the lottery selected.  The function is total on legal inputs: a
    submission that is not enabled when its turn comes simply degrades to a
    no-op.  A move naming a transition the player does not own, or a
    missing/foreign draw, is a programming error and raises ValueError.
    """
    net = desc.net
    cur = m
    for p in desc.players:
        name = moves.get(p)
        if name is None or name == "noop":
            continue
        t = net.transition(name)
        if t.owner != p:
            raise ValueError(f"move '{name}' is not owned by player '{p}'")
        ti = net.transition_index(name)
        if net._enabled_index(cur, ti):
            cur = net._fire_index(cur, ti)
    for g in net.chance_groups:
        name = draws.get(g)
        if name is None:
            raise ValueError(f"no draw supplied for chance group '{g}'")
        t = net.transition(name)
        if not isinstance(t.owner, Chance) or t.owner.group != g:
            raise ValueError(f"draw '{name}' is not a member of group '{g}'")
        ti = net.transition_index(name)
        if net._enabled_index(cur, ti):
            cur = net._fire_index(cur, ti)
    return cur


# ---------------------------------------------------------------------------
# Observations


def _visible_indices(desc: GameDescription, player: str) -> tuple[int, ...]:
    return tuple(i for i, p in enumerate(desc.places) if player in p.visible)


def observation(
    desc: GameDescription,
    player: str,
    history: Sequence[tuple[Mapping[str, str], Mapping[str, str]]],
) -> ObservationKey:
    """The player's information after the given per-chronon history.

    ``history`` lists, per elapsed chronon, the (moves, draws) pair that
    resolved it.  Two histories yield equal keys exactly when the player
    cannot tell them apart: same visible counts and same own menu at every
    boundary, same own submissions.  The key is opaque and hashable.
    """
    if player not in desc.players:
        raise KeyError(f"no player named '{player}'")
    net = desc.net
    vis = _visible_indices(desc, player)
    m = net.initial_marking
    records = [
        (None, tuple(m[i] for i in vis), tuple(t.name for t in enabled_for(net, m, player)))
    ]
    for moves, draws in history:
        m = chronon_step(desc, m, moves, draws)
        records.append(
            (
                moves.get(player, "noop"),
                tuple(m[i] for i in vis),
                tuple(t.name for t in enabled_for(net, m, player)),
            )
        )
    return tuple(records)


# ---------------------------------------------------------------------------
# The eager tree


@dataclass(frozen=True)
class Edge:
    action: str
    child: int
    prob: Fraction | None


class GameTree:
    """A materialized extensive-form tree in flat parallel arrays.

    Node ids are preorder: a child's id is always greater than its
    parent's.  Markings and payoff vectors are interned; ``marking_of`` a
    mid-chronon node is the chronon's opening marking (menus are computed
    against it), while a terminal node carries the final marking.
    """

    def __init__(self, title: str, players: tuple[str, ...], groups: tuple[str, ...]):
        self.title = title
        self.players = players
        self.groups = groups
        self.kind: list[int] = []
        self.who: list[int] = []  # player index / group index / -1
        self.info_set: list[int] = []
        self.chronon: list[int] = []
        self.depth: list[int] = []
        self.marking_id: list[int] = []
        self.payoff_id: list[int] = []
        self.edge_start: list[int] = []
        self.edge_count: list[int] = []
        self.edge_action: list[int] = []
        self.edge_child: list[int] = []
        self.edge_prob: list[Fraction | None] = []
        self.markings: list[Marking] = []
        self.payoffs: list[tuple[Fraction, ...]] = []
        self.actions: list[str] = []
        self.info_set_player: list[int] = []

    # -- shape ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.kind)

    @property
    def root(self) -> int:
        return 0

    def is_decision(self, i: int) -> bool:
        return self.kind[i] == DECISION

    def is_chance(self, i: int) -> bool:
        return self.kind[i] == CHANCE

    def is_terminal(self, i: int) -> bool:
        return self.kind[i] == TERMINAL

    def player_name(self, i: int) -> str:
        if self.kind[i] != DECISION:
            raise ValueError(f"node {i} is not a decision node")
        return self.players[self.who[i]]

    def group_name(self, i: int) -> str:
        if self.kind[i] != CHANCE:
            raise ValueError(f"node {i} is not a chance node")
        return self.groups[self.who[i]]

    def edges(self, i: int) -> Iterator[Edge]:
        start = self.edge_start[i]
        for e in range(start, start + self.edge_count[i]):
            yield Edge(self.actions[self.edge_action[e]], self.edge_child[e], self.edge_prob[e])

    def children(self, i: int) -> list[int]:
        start = self.edge_start[i]
        return self.edge_child[start : start + self.edge_count[i]]

    def actions_at(self, i: int) -> tuple[str, ...]:
        start = self.edge_start[i]
        return tuple(
            self.actions[self.edge_action[e]] for e in range(start, start + self.edge_count[i])
        )

    def payoff(self, i: int) -> tuple[Fraction, ...]:
        if self.kind[i] != TERMINAL:
            raise ValueError(f"node {i} is not terminal")
        return self.payoffs[self.payoff_id[i]]

    def marking_of(self, i: int) -> Marking:
        return self.markings[self.marking_id[i]]

    def info_set_nodes(self, s: int) -> list[int]:
        return [i for i in range(len(self.kind)) if self.info_set[i] == s]

    # -- summary --------------------------------------------------------

    def stats(self) -> dict[str, int]:
        return {
            "node_count": len(self.kind),
            "terminal_count": sum(1 for k in self.kind if k == TERMINAL),
            "info_set_count": len(self.info_set_player),
            "max_depth": max(self.depth) if self.depth else 0,
        }


def tree_stats(tree: "GameTree | CompactTree") -> dict[str, int]:
    """node_count / terminal_count / info_set_count / max_depth.

    For a compact tree these are the statistics of the logical tree it
    stands for, not of the stored DAG.
    """
    return tree.stats()


def unfold(desc: GameDescription, budget: int = DEFAULT_BUDGET) -> GameTree:
    """Materialize the extensive form, raising BudgetExceeded past ``budget`` nodes."""
    net = desc.net
    players = desc.players
    groups = net.chance_groups
    tree = GameTree(desc.title, players, groups)

    act_ix: dict[str, int] = {}
    for t in net.transitions:
        act_ix[t.name] = len(tree.actions)
        tree.actions.append(t.name)

    mark_ix: dict[Marking, int] = {}
    pay_ix: dict[tuple[Fraction, ...], int] = {}
    iso_ix: dict[tuple[int, ObservationKey], int] = {}

    vis = [_visible_indices(desc, p) for p in players]
    group_members = {g: net.group_members(g) for g in groups}

    def intern_marking(m: Marking) -> int:
        mid = mark_ix.get(m)
        if mid is None:
            mid = len(tree.markings)
            mark_ix[m] = mid
            tree.markings.append(m)
        return mid

    def intern_payoff(v: tuple[Fraction, ...]) -> int:
        pid = pay_ix.get(v)
        if pid is None:
            pid = len(tree.payoffs)
            pay_ix[v] = pid
            tree.payoffs.append(v)
        return pid

    def new_node(
        kind: int, who: int, iso: int, k: int, depth: int, mid: int, pid: int, nedges: int
    ) -> int:
        nid = len(tree.kind)
        if nid >= budget:
            raise BudgetExceeded(budget)
        tree.kind.append(kind)
        tree.who.append(who)
        tree.info_set.append(iso)
        tree.chronon.append(k)
        tree.depth.append(depth)
        tree.marking_id.append(mid)
        tree.payoff_id.append(pid)
        tree.edge_start.append(len(tree.edge_action))
        tree.edge_count.append(nedges)
        return nid

    def boundary_obs(m: Marking, prev: tuple, moves: Mapping[str, str]) -> tuple:
        out = []
        for pi, p in enumerate(players):
            rec = (
                moves.get(p, "noop"),
                tuple(m[i] for i in vis[pi]),
                tuple(t.name for t in enabled_for(net, m, p)),
            )
            out.append(prev[pi] + (rec,))
        return tuple(out)

    m0 = net.initial_marking
    obs0 = tuple(
        (
            (
                None,
                tuple(m0[i] for i in vis[pi]),
                tuple(t.name for t in enabled_for(net, m0, p)),
            ),
        )
        for pi, p in enumerate(players)
    )

    # Work items: ("A", m, k, obs, depth, slot) for a chronon boundary, or
    # ("B", m_open, k, obs, depth, plies, idx, moves, draws, slot) for the
    # next ply inside a chronon.  ``slot`` is the edge index to patch with
    # the node id this item creates (-1 for the root).
    stack: list[tuple] = [("A", m0, 0, obs0, 0, -1)]

    while stack:
        item = stack.pop()
        if item[0] == "A":
            _, m, k, obs, depth, slot = item
            while True:
                if desc.is_terminal_marking(m) or k >= desc.horizon:
                    nid = new_node(TERMINAL, -1, -1, k, depth, intern_marking(m), intern_payoff(desc.payoff_vector(m)), 0)
                    if slot >= 0:
                        tree.edge_child[slot] = nid
                    break
                actors = [pi for pi, p in enumerate(players) if enabled_for(net, m, p)]
                if not actors and not groups:
                    # Nothing can ever fire again; fast-forward to the horizon.
                    k = desc.horizon
                    continue
                plies: list[tuple[str, int]] = [("d", pi) for pi in actors]
                plies += [("c", gi) for gi in range(len(groups))]
                stack.append(("B", m, k, obs, depth, tuple(plies), 0, (), (), slot))
                break
            continue

        _, m, k, obs, depth, plies, idx, moves, draws, slot = item
        kind, who = plies[idx]
        mid = intern_marking(m)
        if kind == "d":
            p = players[who]
            menu = enabled_for(net, m, p)
            key = (who, obs[who])
            iso = iso_ix.get(key)
            if iso is None:
                iso = len(tree.info_set_player)
                iso_ix[key] = iso
                tree.info_set_player.append(who)
            nid = new_node(DECISION, who, iso, k, depth, mid, -1, len(menu))
            if slot >= 0:
                tree.edge_child[slot] = nid
            pending = []
            for t in menu:
                e = len(tree.edge_action)
                tree.edge_action.append(act_ix[t.name])
                tree.edge_child.append(-1)
                tree.edge_prob.append(None)
                pending.append((e, moves + ((p, t.name),)))
            for e, mv in reversed(pending):
                if idx + 1 < len(plies):
                    stack.append(("B", m, k, obs, depth + 1, plies, idx + 1, mv, draws, e))
                else:
                    md, dd = dict(mv), dict(draws)
                    m2 = chronon_step(desc, m, md, dd)
                    stack.append(("A", m2, k + 1, boundary_obs(m2, obs, md), depth + 1, e))
        else:
            g = groups[who]
            members = group_members[g]
            nid = new_node(CHANCE, who, -1, k, depth, mid, -1, len(members))
            if slot >= 0:
                tree.edge_child[slot] = nid
            pending = []
            for t in members:
                e = len(tree.edge_action)
                tree.edge_action.append(act_ix[t.name])
                tree.edge_child.append(-1)
                assert isinstance(t.owner, Chance)
                tree.edge_prob.append(t.owner.weight)
                pending.append((e, draws + ((g, t.name),)))
            for e, dr in reversed(pending):
                if idx + 1 < len(plies):
                    stack.append(("B", m, k, obs, depth + 1, plies, idx + 1, moves, dr, e))
                else:
                    md, dd = dict(moves), dict(dr)
                    m2 = chronon_step(desc, m, md, dd)
                    stack.append(("A", m2, k + 1, boundary_obs(m2, obs, md), depth + 1, e))

    return tree


# ---------------------------------------------------------------------------
# Compact unfolding for sequential, deterministic, fully visible games


class CompactTree:
    """A marking-indexed DAG standing for a (possibly huge) logical tree.

    Valid only when every place is visible to every player, there is no
    chance, at most one player has a nonempty menu per chronon, and each
    player's transitions have pairwise distinct net effects.  Under those
    conditions every decision node is its own information set and subtrees
    below equal (marking, chronon) pairs are identical, so the tree may be
    folded without changing any solution or statistic.
    """

    def __init__(self, title: str, players: tuple[str, ...]):
        self.title = title
        self.players = players
        self.kind: list[int] = []  # DECISION or TERMINAL
        self.who: list[int] = []
        self.chronon: list[int] = []
        self.marking: list[Marking] = []
        self.payoff: list[tuple[Fraction, ...] | None] = []
        self.edge_action: list[tuple[str, ...]] = []
        self.edge_child: list[tuple[int, ...]] = []
        self.root = -1  # stored ids are post-order, so the root is stored last
        self._stats: dict[str, int] | None = None

    def __len__(self) -> int:
        return len(self.kind)

    def is_terminal(self, i: int) -> bool:
        return self.kind[i] == TERMINAL

    def player_name(self, i: int) -> str:
        return self.players[self.who[i]]

    def stored_count(self) -> int:
        return len(self.kind)

    def bottom_up(self) -> range:
        # Post-order storage: every child id is smaller than its parent's,
        # so ascending id order is a valid bottom-up sweep.
        return range(len(self.kind))

    def stats(self) -> dict[str, int]:
        """Statistics of the logical tree (exact, via dynamic programming)."""
        if self._stats is not None:
            return self._stats
        n = len(self.kind)
        nodes = [0] * n
        terms = [0] * n
        depth = [0] * n
        infos = [0] * n
        for i in self.bottom_up():
            if self.kind[i] == TERMINAL:
                nodes[i] = 1
                terms[i] = 1
            else:
                cs = self.edge_child[i]
                nodes[i] = 1 + sum(nodes[c] for c in cs)
                terms[i] = sum(terms[c] for c in cs)
                depth[i] = 1 + max(depth[c] for c in cs)
                infos[i] = 1 + sum(infos[c] for c in cs)
        r = self.root
        self._stats = {
            "node_count": nodes[r],
            "terminal_count": terms[r],
            "info_set_count": infos[r],
            "max_depth": depth[r],
        }
        return self._stats


def unfold_compact(desc: GameDescription, max_stored: int = DEFAULT_BUDGET) -> CompactTree:
    """Fold the tree of a sequential, deterministic, fully visible game.

    Raises ValueError when the game does not qualify (chance groups, hidden
    places, simultaneous menus, or two same-player transitions with equal
    net effect), and BudgetExceeded past ``max_stored`` stored positions.
    """
    net = desc.net
    players = desc.players
    if net.chance_groups:
        raise ValueError("compact unfolding requires a game without chance groups")
    everyone = set(players)
    for p in desc.places:
        if set(p.visible) != everyone:
            raise ValueError(f"compact unfolding requires full visibility ('{p.name}' is hidden)")
    for player in players:
        deltas: dict[tuple[tuple[int, int], ...], str] = {}
        for t in net.owned_by(player):
            d: dict[int, int] = {}
            for name, w in t.pre.items():
                d[net.place_index(name)] = d.get(net.place_index(name), 0) - w
            for name, w in t.post.items():
                d[net.place_index(name)] = d.get(net.place_index(name), 0) + w
            key = tuple(sorted((i, w) for i, w in d.items() if w))
            if key in deltas:
                raise ValueError(
                    f"compact unfolding requires distinct effects: '{t.name}' duplicates '{deltas[key]}'"
                )
            deltas[key] = t.name

    tree = CompactTree(desc.title, players)
    memo: dict[tuple[Marking, int], int] = {}
    player_index = {p: i for i, p in enumerate(players)}

    def store(kind: int, who: int, k: int, m: Marking, pay, acts, children) -> int:
        sid = len(tree.kind)
        if sid >= max_stored:
            raise BudgetExceeded(max_stored)
        tree.kind.append(kind)
        tree.who.append(who)
        tree.chronon.append(k)
        tree.marking.append(m)
        tree.payoff.append(pay)
        tree.edge_action.append(acts)
        tree.edge_child.append(children)
        return sid

    # Two-phase worklist: "visit" resolves a position (hitting the memo or
    # expanding it), "make" pops the finished children off the value stack.
    work: list[tuple] = [("visit", net.initial_marking, 0)]
    done: list[int] = []
    while work:
        op = work.pop()
        if op[0] == "visit":
            _, m, k = op
            hit = memo.get((m, k))
            if hit is not None:
                done.append(hit)
                continue
            mover = None
            end_k = k
            while not desc.is_terminal_marking(m) and end_k < desc.horizon:
                actors = [p for p in players if enabled_for(net, m, p)]
                if len(actors) > 1:
                    raise ValueError(
                        "compact unfolding requires at most one player to move per chronon"
                    )
                if actors:
                    mover = actors[0]
                    break
                end_k = desc.horizon  # nothing can ever fire again
            if mover is None:
                sid = store(TERMINAL, -1, end_k, m, desc.payoff_vector(m), (), ())
                memo[(m, k)] = sid
                done.append(sid)
                continue
            menu = enabled_for(net, m, mover)
            work.append(("make", m, k, mover, tuple(t.name for t in menu)))
            for t in reversed(menu):
                work.append(("visit", chronon_step(desc, m, {mover: t.name}, {}), k + 1))
        else:
            _, m, k, mover, acts = op
            children = tuple(done[-len(acts) :])
            del done[-len(acts) :]
            sid = store(DECISION, player_index[mover], k, m, None, acts, children)
            memo[(m, k)] = sid
            done.append(sid)

    tree.root = done[0]
    return tree
