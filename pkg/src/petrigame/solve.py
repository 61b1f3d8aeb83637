"""Solving unfolded games exactly.

Everything here works in rational arithmetic end to end: results are exact,
never rounded.  Perfect-information trees (every information set a
singleton) admit plain backward induction.  Two-player constant-sum trees
with imperfect information are solved through their sequence form: per
player one variable per sequence of own actions, linearly many in the tree,
rather than one per pure strategy.  The optimal guarantee and a realization
plan come out of one exact LP per player; cross-checking the two optima
against the payoff constant guards the implementation.

``to_normal_form`` walks the other, exponential route (one strategy per
assignment of actions to information sets) and exists for small games and
for interchange export; ``pure_nash`` enumerates its cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .lp import solve_lp
from .unfold import CHANCE, DECISION, TERMINAL, BudgetExceeded, CompactTree, GameTree

Behavior = Mapping[str, Mapping[int, Mapping[str, Fraction]]]


class ImperfectInformation(Exception):
    """Backward induction asked for on a tree with pooled information sets."""


class NotTwoPlayer(Exception):
    pass


class NotConstantSum(Exception):
    pass


# ---------------------------------------------------------------------------
# Backward induction


@dataclass(frozen=True)
class InductionResult:
    root_values: tuple[Fraction, ...]
    # Materialized tree: node id -> action.  Compact: (marking, chronon) -> action.
    policy: Mapping


def backward_induction(tree: GameTree | CompactTree) -> InductionResult:
    """Exact optimal play for perfect-information trees.

    Each mover maximizes their own payoff component (chance is averaged);
    ties break toward the lexicographically smallest action name, so the
    result is deterministic.  Raises ImperfectInformation if any
    information set pools more than one node.
    """
    if isinstance(tree, CompactTree):
        return _induct_compact(tree)
    decisions = sum(1 for k in tree.kind if k == DECISION)
    if len(tree.info_set_player) != decisions:
        raise ImperfectInformation(
            f"{decisions} decision nodes share {len(tree.info_set_player)} information sets"
        )
    n = len(tree)
    vals: list[tuple[Fraction, ...] | None] = [None] * n
    policy: dict[int, str] = {}
    nplayers = len(tree.players)
    for i in range(n - 1, -1, -1):
        kind = tree.kind[i]
        if kind == TERMINAL:
            vals[i] = tree.payoff(i)
        elif kind == CHANCE:
            acc = [Fraction(0)] * nplayers
            for e in tree.edges(i):
                cv = vals[e.child]
                assert cv is not None and e.prob is not None
                for j in range(nplayers):
                    acc[j] += e.prob * cv[j]
            vals[i] = tuple(acc)
        else:
            who = tree.who[i]
            best = None
            best_name = ""
            for e in tree.edges(i):
                cv = vals[e.child]
                assert cv is not None
                if best is None or cv[who] > best[who] or (cv[who] == best[who] and e.action < best_name):
                    best = cv
                    best_name = e.action
            assert best is not None
            vals[i] = best
            policy[i] = best_name
    root = vals[0]
    assert root is not None
    return InductionResult(root, policy)


def _induct_compact(tree: CompactTree) -> InductionResult:
    vals: list[tuple[Fraction, ...] | None] = [None] * len(tree)
    policy: dict[tuple, str] = {}
    for i in tree.bottom_up():
        if tree.kind[i] == TERMINAL:
            vals[i] = tree.payoff[i]
            continue
        who = tree.who[i]
        best = None
        best_name = ""
        for name, child in zip(tree.edge_action[i], tree.edge_child[i]):
            cv = vals[child]
            assert cv is not None
            if best is None or cv[who] > best[who] or (cv[who] == best[who] and name < best_name):
                best = cv
                best_name = name
        assert best is not None
        vals[i] = best
        policy[(tree.marking[i], tree.chronon[i])] = best_name
    root = vals[tree.root]
    assert root is not None
    return InductionResult(root, policy)


# ---------------------------------------------------------------------------
# Expected value under a behavior profile


def expected_value(tree: GameTree, profile: Behavior | None = None) -> tuple[Fraction, ...]:
    """Expected payoffs when players randomize as ``profile`` says.

    ``profile[player][info_set][action]`` is the action probability; a
    missing player or information set means uniform over the menu (which is
    exactly how the bundled random bot behaves).
    """
    n = len(tree)
    nplayers = len(tree.players)
    vals: list[tuple[Fraction, ...] | None] = [None] * n
    for i in range(n - 1, -1, -1):
        kind = tree.kind[i]
        if kind == TERMINAL:
            vals[i] = tree.payoff(i)
            continue
        acc = [Fraction(0)] * nplayers
        if kind == CHANCE:
            for e in tree.edges(i):
                cv = vals[e.child]
                assert cv is not None and e.prob is not None
                for j in range(nplayers):
                    acc[j] += e.prob * cv[j]
        else:
            player = tree.player_name(i)
            dist = None
            if profile is not None and player in profile:
                dist = profile[player].get(tree.info_set[i])
            edges = list(tree.edges(i))
            for e in edges:
                p = Fraction(1, len(edges)) if dist is None else Fraction(dist.get(e.action, 0))
                if not p:
                    continue
                cv = vals[e.child]
                assert cv is not None
                for j in range(nplayers):
                    acc[j] += p * cv[j]
        vals[i] = tuple(acc)
    root = vals[0]
    assert root is not None
    return root


# ---------------------------------------------------------------------------
# Sequence form


class _SeqPlayer:
    """One player's sequence/information-set forest."""

    def __init__(self) -> None:
        self.seq_parent: list[int] = [-1]
        self.seq_action: list[str] = [""]
        self.seq_infoset: list[int] = [-1]  # local infoset the final action was taken at
        self.iso_local: dict[int, int] = {}  # tree info set id -> local index
        self.iso_tree_id: list[int] = []
        self.iso_parent_seq: list[int] = []
        self.iso_actions: list[tuple[str, ...]] = []
        self.iso_seqs: list[tuple[int, ...]] = []
        self.iso_children: dict[int, list[int]] = {}  # seq id -> infosets hanging off it

    @property
    def n_seqs(self) -> int:
        return len(self.seq_parent)

    @property
    def n_isos(self) -> int:
        return len(self.iso_parent_seq)

    def visit(self, tree: GameTree, node: int, cur_seq: int) -> int:
        """Register the node's information set (first visit) and return its local id."""
        tid = tree.info_set[node]
        local = self.iso_local.get(tid)
        if local is not None:
            if self.iso_parent_seq[local] != cur_seq:
                raise ValueError(
                    "information set reached with two different own histories (no perfect recall)"
                )
            if self.iso_actions[local] != tree.actions_at(node):
                raise ValueError("information set members disagree on the available menu")
            return local
        local = len(self.iso_parent_seq)
        self.iso_local[tid] = local
        self.iso_tree_id.append(tid)
        self.iso_parent_seq.append(cur_seq)
        actions = tree.actions_at(node)
        seqs = []
        for a in actions:
            sid = len(self.seq_parent)
            self.seq_parent.append(cur_seq)
            self.seq_action.append(a)
            self.seq_infoset.append(local)
            seqs.append(sid)
        self.iso_actions.append(actions)
        self.iso_seqs.append(tuple(seqs))
        self.iso_children.setdefault(cur_seq, []).append(local)
        return local


class _SequenceForm:
    def __init__(self, tree: GameTree):
        self.tree = tree
        self.forests = [_SeqPlayer() for _ in tree.players]
        # Sparse chance-weighted payoffs keyed by the players' sequence pair
        # (two-player trees only; the forests alone serve any player count).
        self.pay: list[dict[tuple[int, int], Fraction]] = [{}, {}]
        two = len(tree.players) == 2
        stack: list[tuple[int, tuple[int, ...], Fraction]] = [
            (0, tuple(0 for _ in tree.players), Fraction(1))
        ]
        while stack:
            node, seqs, cp = stack.pop()
            kind = tree.kind[node]
            if kind == TERMINAL:
                if two:
                    pay = tree.payoff(node)
                    key = (seqs[0], seqs[1])
                    for j in (0, 1):
                        if pay[j]:
                            d = self.pay[j]
                            d[key] = d.get(key, Fraction(0)) + cp * pay[j]
                continue
            if kind == CHANCE:
                for e in tree.edges(node):
                    assert e.prob is not None
                    stack.append((e.child, seqs, cp * e.prob))
                continue
            who = tree.who[node]
            forest = self.forests[who]
            local = forest.visit(tree, node, seqs[who])
            for sid, e in zip(forest.iso_seqs[local], tree.edges(node)):
                nxt = list(seqs)
                nxt[who] = sid
                stack.append((e.child, tuple(nxt), cp))


def _guarantee(sf: _SequenceForm, role: int) -> tuple[Fraction, list[Fraction]]:
    """Solve role's sequence-form LP: the exact value they can guarantee.

    Variables are the player's realization plan x plus the (split) dual
    vector p of the opponent's flow constraints; maximizing p_root subject
    to  pay.x  dominating  F'p  per opponent sequence is the standard
    sequence-form program.
    """
    own = sf.forests[role]
    opp = sf.forests[1 - role]
    pay = sf.pay[role]
    n = own.n_seqs
    m = 1 + opp.n_isos
    nv = n + 2 * m  # x, then u, then w with p = u - w
    zero = Fraction(0)

    c = [zero] * nv
    c[n] = Fraction(1)
    c[n + m] = Fraction(-1)

    rows: list[tuple[list[Fraction], str, Fraction]] = []
    for s in range(opp.n_seqs):
        a = [zero] * nv
        for so in range(n):
            key = (so, s) if role == 0 else (s, so)
            v = pay.get(key)
            if v:
                a[so] = v
        contribs: list[tuple[int, int]] = []
        if s == 0:
            contribs.append((0, 1))
        else:
            contribs.append((1 + opp.seq_infoset[s], -1))
        for iso in opp.iso_children.get(s, ()):
            contribs.append((1 + iso, 1))
        for r, fv in contribs:
            a[n + r] -= fv
            a[n + m + r] += fv
        rows.append((a, ">=", zero))

    root = [zero] * nv
    root[0] = Fraction(1)
    rows.append((root, "=", Fraction(1)))
    for iso in range(own.n_isos):
        a = [zero] * nv
        a[own.iso_parent_seq[iso]] += 1
        for sq in own.iso_seqs[iso]:
            a[sq] -= 1
        rows.append((a, "=", zero))

    value, x = solve_lp(c, rows)
    return value, x[:n]


def _behavior_from_plan(forest: _SeqPlayer, x: list[Fraction]) -> dict[int, dict[str, Fraction]]:
    out: dict[int, dict[str, Fraction]] = {}
    for iso in range(forest.n_isos):
        parent = forest.iso_parent_seq[iso]
        total = x[parent]
        acts = forest.iso_actions[iso]
        if total > 0:
            dist = {a: x[s] / total for a, s in zip(acts, forest.iso_seqs[iso])}
        else:  # unreached under the plan; any distribution is optimal
            dist = {a: Fraction(1, len(acts)) for a in acts}
        out[forest.iso_tree_id[iso]] = dist
    return out


@dataclass(frozen=True)
class ZeroSumSolution:
    values: tuple[Fraction, Fraction]
    constant: Fraction
    behavior: Behavior

    @property
    def value(self) -> Fraction:
        return self.values[0]


def zero_sum_value(tree: GameTree) -> ZeroSumSolution:
    """Exact value and optimal mixed strategies of a two-player constant-sum tree.

    Solved via the sequence form, one LP per player; the two independently
    computed guarantees must complement each other to the payoff constant,
    which is asserted.  Raises NotTwoPlayer / NotConstantSum when the tree
    is outside this class.
    """
    if len(tree.players) != 2:
        raise NotTwoPlayer(f"need exactly 2 players, got {len(tree.players)}")
    sums = {p[0] + p[1] for p in tree.payoffs}
    if len(sums) > 1:
        raise NotConstantSum(f"terminal payoff sums differ: {sorted(sums)[:4]}")
    constant = sums.pop() if sums else Fraction(0)

    sf = _SequenceForm(tree)
    v1, x1 = _guarantee(sf, 0)
    v2, x2 = _guarantee(sf, 1)
    assert v1 + v2 == constant, "the two guarantees must complement to the constant"
    behavior = {
        tree.players[0]: _behavior_from_plan(sf.forests[0], x1),
        tree.players[1]: _behavior_from_plan(sf.forests[1], x2),
    }
    return ZeroSumSolution((v1, constant - v1), constant, behavior)


def best_response(tree: GameTree, player: str, profile: Behavior) -> Fraction:
    """The exact best payoff ``player`` can reach against the others' behavior."""
    try:
        role = tree.players.index(player)
    except ValueError:
        raise KeyError(f"no player named '{player}'") from None
    sf = _SequenceForm(tree)
    forest = sf.forests[role]

    # Chance-and-opponents reach per own sequence, summed over leaves.
    r: dict[int, Fraction] = {}
    stack: list[tuple[int, int, Fraction]] = [(0, 0, Fraction(1))]
    while stack:
        node, seq, reach = stack.pop()
        kind = tree.kind[node]
        if kind == TERMINAL:
            contribution = reach * tree.payoff(node)[role]
            if contribution:
                r[seq] = r.get(seq, Fraction(0)) + contribution
            continue
        if kind == CHANCE:
            for e in tree.edges(node):
                assert e.prob is not None
                stack.append((e.child, seq, reach * e.prob))
            continue
        who = tree.who[node]
        if who == role:
            local = forest.iso_local[tree.info_set[node]]
            for sid, e in zip(forest.iso_seqs[local], tree.edges(node)):
                stack.append((e.child, sid, reach))
        else:
            mover = tree.players[who]
            dist = profile[mover][tree.info_set[node]]
            for e in tree.edges(node):
                p = Fraction(dist.get(e.action, 0))
                if p:
                    stack.append((e.child, seq, reach * p))

    # Fold the information-set forest bottom-up (children are always
    # discovered after their parents, so reverse order is child-first).
    value: list[Fraction] = [Fraction(0)] * forest.n_isos
    for iso in range(forest.n_isos - 1, -1, -1):
        best = None
        for sq in forest.iso_seqs[iso]:
            v = r.get(sq, Fraction(0))
            for child in forest.iso_children.get(sq, ()):
                v += value[child]
            if best is None or v > best:
                best = v
        assert best is not None
        value[iso] = best
    total = r.get(0, Fraction(0))
    for child in forest.iso_children.get(0, ()):
        total += value[child]
    return total


# ---------------------------------------------------------------------------
# Normal form


@dataclass(frozen=True)
class NormalForm:
    title: str
    players: tuple[str, ...]
    labels: tuple[tuple[str, ...], ...]  # per player, one label per pure strategy
    payoffs: Mapping[tuple[int, ...], tuple[Fraction, ...]]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ls) for ls in self.labels)


def to_normal_form(tree: GameTree, budget: int = 1_000_000) -> NormalForm:
    """Tabulate pure strategies (one action per information set) exhaustively.

    The table has prod(actions per information set) rows per player and is
    meant for small games; BudgetExceeded guards against the exponential
    blowup past ``budget`` cells.
    """
    nplayers = len(tree.players)
    iso_actions: list[tuple[str, ...]] = [()] * len(tree.info_set_player)
    for i in range(len(tree)):
        if tree.kind[i] == DECISION and not iso_actions[tree.info_set[i]]:
            iso_actions[tree.info_set[i]] = tree.actions_at(i)
    per_player_isos: list[list[int]] = [[] for _ in range(nplayers)]
    for s, who in enumerate(tree.info_set_player):
        per_player_isos[who].append(s)

    counts = []
    for who in range(nplayers):
        c = 1
        for s in per_player_isos[who]:
            c *= len(iso_actions[s])
        counts.append(c)
    cells = 1
    for c in counts:
        cells *= c
    if cells > budget:
        raise BudgetExceeded(budget)

    strategies: list[list[dict[int, str]]] = []
    labels: list[tuple[str, ...]] = []
    for who in range(nplayers):
        isos = per_player_isos[who]
        plans = []
        names = []
        for combo in itertools.product(*(iso_actions[s] for s in isos)):
            plans.append(dict(zip(isos, combo)))
            names.append("/".join(combo) if combo else "-")
        strategies.append(plans)
        labels.append(tuple(names))

    n = len(tree)
    payoffs: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
    vals: list[tuple[Fraction, ...] | None] = [None] * n
    for profile in itertools.product(*(range(c) for c in counts)):
        plans = [strategies[who][profile[who]] for who in range(nplayers)]
        for i in range(n - 1, -1, -1):
            kind = tree.kind[i]
            if kind == TERMINAL:
                vals[i] = tree.payoff(i)
            elif kind == CHANCE:
                acc = [Fraction(0)] * nplayers
                for e in tree.edges(i):
                    cv = vals[e.child]
                    assert cv is not None and e.prob is not None
                    for j in range(nplayers):
                        acc[j] += e.prob * cv[j]
                vals[i] = tuple(acc)
            else:
                chosen = plans[tree.who[i]][tree.info_set[i]]
                for e in tree.edges(i):
                    if e.action == chosen:
                        vals[i] = vals[e.child]
                        break
                else:
                    raise AssertionError(f"plan action {chosen!r} missing at node {i}")
        root = vals[0]
        assert root is not None
        payoffs[profile] = root
    return NormalForm(tree.title, tree.players, tuple(labels), payoffs)


def pure_nash(nf: NormalForm) -> set[tuple[str, ...]]:
    """All pure equilibria, as tuples of per-player strategy labels."""
    shape = nf.shape
    out: set[tuple[str, ...]] = set()
    for profile, pay in nf.payoffs.items():
        stable = True
        for who in range(len(nf.players)):
            mine = pay[who]
            for alt in range(shape[who]):
                if alt == profile[who]:
                    continue
                dev = list(profile)
                dev[who] = alt
                if nf.payoffs[tuple(dev)][who] > mine:
                    stable = False
                    break
            if not stable:
                break
        if stable:
            out.add(tuple(nf.labels[who][profile[who]] for who in range(len(nf.players))))
    return out


# ---------------------------------------------------------------------------
# Interchange export


def _fmt_number(x: Fraction) -> str:
    """Exact text: integer, finite decimal when the denominator allows, else p/q."""
    q = x.denominator
    if q == 1:
        return str(x.numerator)
    d = 0
    qq = q
    while qq % 2 == 0:
        qq //= 2
        d += 1
    f = 0
    while qq % 5 == 0:
        qq //= 5
        f += 1
    if qq != 1:
        return f"{x.numerator}/{q}"
    digits = max(d, f)
    scaled = abs(x.numerator) * (10**digits // q)
    text = str(scaled).rjust(digits + 1, "0")
    sign = "-" if x.numerator < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def export_efg(tree: GameTree) -> str:
    """Render the tree in the Gambit extensive-form text format.

    Output is deterministic: nodes in preorder (the tree's id order),
    information sets numbered per player in order of first appearance,
    outcomes numbered by the tree's interned payoff table.
    """
    names = " ".join(f'"{p}"' for p in tree.players)
    lines = [f'EFG 2 R "{tree.title}" {{ {names} }}', ""]
    iso_number: dict[int, int] = {}
    per_player_counter = [0] * len(tree.players)
    chance_counter = 0
    for i in range(len(tree)):
        kind = tree.kind[i]
        if kind == TERMINAL:
            pay = ", ".join(_fmt_number(v) for v in tree.payoff(i))
            lines.append(f't "" {tree.payoff_id[i] + 1} "" {{ {pay} }}')
        elif kind == CHANCE:
            chance_counter += 1
            acts = " ".join(f'"{e.action}" {_fmt_number(e.prob)}' for e in tree.edges(i))
            lines.append(f'c "" {chance_counter} "" {{ {acts} }} 0')
        else:
            s = tree.info_set[i]
            if s not in iso_number:
                per_player_counter[tree.who[i]] += 1
                iso_number[s] = per_player_counter[tree.who[i]]
            acts = " ".join(f'"{e.action}"' for e in tree.edges(i))
            lines.append(f'p "" {tree.who[i] + 1} {iso_number[s]} "" {{ {acts} }} 0')
    return "\n".join(lines) + "\n"


def export_nfg(nf: NormalForm) -> str:
    """Render the table in the Gambit normal-form (payoff list) text format.

    Cells are listed with the first player's strategy index varying
    fastest, each cell giving every player's payoff.
    """
    names = " ".join(f'"{p}"' for p in nf.players)
    strat_lists = " ".join(
        "{ " + " ".join(f'"{s}"' for s in labels) + " }" for labels in nf.labels
    )
    header = f'NFG 1 R "{nf.title}" {{ {names} }} {{ {strat_lists} }}'
    cells: list[str] = []
    shape = nf.shape
    for combo in itertools.product(*(range(k) for k in reversed(shape))):
        profile = tuple(reversed(combo))
        cells.extend(_fmt_number(v) for v in nf.payoffs[profile])
    return header + "\n\n" + " ".join(cells) + "\n"
