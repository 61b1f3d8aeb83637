"""Bounded Petri nets with owned transitions.

The state of a game is a marking: one natural number of tokens per place,
never exceeding the place's declared bound.  Transitions consume tokens
(``pre``) and produce tokens (``post``); a transition is enabled only if its
input tokens are present *and* firing it would not push any place past its
bound.  Every transition is owned either by a player or by a chance group
(a weighted lottery resolved by the environment).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Marking = tuple[int, ...]


class NotEnabled(Exception):
    """Raised when firing a transition that is not enabled in the marking."""


class UnknownPlayer(KeyError):
    """Raised when a player name is not declared in the net."""


@dataclass(frozen=True)
class Chance(object):
    """Ownership marker for environment moves: a weighted member of a lottery group."""

    group: str
    weight: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.weight, Fraction):
            object.__setattr__(self, "weight", Fraction(self.weight))


@dataclass(frozen=True)
class Place:
    """A token container.  ``visible`` lists the players who can observe its count."""

    name: str
    init: int
    bound: int
    visible: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "visible", frozenset(self.visible))


@dataclass(frozen=True)
class Transition:
    name: str
    owner: str | Chance
    pre: Mapping[str, int]
    post: Mapping[str, int]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "pre", dict(self.pre))
        object.__setattr__(self, "post", dict(self.post))
        if not self.label:
            object.__setattr__(self, "label", self.name)

    @property
    def is_chance(self) -> bool:
        return isinstance(self.owner, Chance)


class Net:
    """An immutable bounded Petri net over a fixed player list.

    Construction checks structural sanity (unique names, arcs only to
    declared places, sane bounds) and raises ``ValueError`` on violation;
    game-level checks live in the description validator.
    """

    def __init__(
        self,
        players: Iterable[str],
        places: Iterable[Place],
        transitions: Iterable[Transition],
    ) -> None:
        self.players: tuple[str, ...] = tuple(players)
        self.places: tuple[Place, ...] = tuple(places)
        self.transitions: tuple[Transition, ...] = tuple(transitions)

        if len(set(self.players)) != len(self.players):
            raise ValueError("duplicate player name")
        names = [p.name for p in self.places]
        if len(set(names)) != len(names):
            raise ValueError("duplicate place name")
        tnames = [t.name for t in self.transitions]
        if len(set(tnames)) != len(tnames):
            raise ValueError("duplicate transition name")

        self._place_index: dict[str, int] = {n: i for i, n in enumerate(names)}
        self._transition_index: dict[str, int] = {n: i for i, n in enumerate(tnames)}
        self.bounds: tuple[int, ...] = tuple(p.bound for p in self.places)

        for p in self.places:
            if p.bound < 0 or p.init < 0:
                raise ValueError(f"place '{p.name}': negative init or bound")
            if p.init > p.bound:
                raise ValueError(f"place '{p.name}': init {p.init} exceeds bound {p.bound}")

        player_set = set(self.players)
        by_player: dict[str, list[int]] = {p: [] for p in self.players}
        group_order: list[str] = []
        by_group: dict[str, list[int]] = {}
        for ti, t in enumerate(self.transitions):
            for arc, kind in ((t.pre, "pre"), (t.post, "post")):
                for pname, w in arc.items():
                    if pname not in self._place_index:
                        raise ValueError(
                            f"transition '{t.name}': {kind} arc to undeclared place '{pname}'"
                        )
                    if not isinstance(w, int) or w < 1:
                        raise ValueError(
                            f"transition '{t.name}': {kind} arc weight for '{pname}' must be a positive natural"
                        )
            if isinstance(t.owner, Chance):
                if not 0 < t.owner.weight <= 1:
                    raise ValueError(
                        f"transition '{t.name}': chance weight {t.owner.weight} outside (0, 1]"
                    )
                g = t.owner.group
                if g not in by_group:
                    by_group[g] = []
                    group_order.append(g)
                by_group[g].append(ti)
            else:
                if t.owner not in player_set:
                    raise ValueError(f"transition '{t.name}': undeclared owner '{t.owner}'")
                by_player[t.owner].append(ti)

        self._by_player = {p: tuple(ix) for p, ix in by_player.items()}
        self.chance_groups: tuple[str, ...] = tuple(group_order)
        self._by_group = {g: tuple(ix) for g, ix in by_group.items()}

        # Dense arc vectors for the hot path: nonzero (place index, weight)
        # pairs, plus the positive-delta pairs that can violate a bound.
        self._pre_items: list[tuple[tuple[int, int], ...]] = []
        self._post_items: list[tuple[tuple[int, int], ...]] = []
        self._gain_items: list[tuple[tuple[int, int], ...]] = []
        for t in self.transitions:
            pre = tuple((self._place_index[n], w) for n, w in t.pre.items() if w)
            post = tuple((self._place_index[n], w) for n, w in t.post.items() if w)
            delta: dict[int, int] = {}
            for i, w in pre:
                delta[i] = delta.get(i, 0) - w
            for i, w in post:
                delta[i] = delta.get(i, 0) + w
            gain = tuple((i, d) for i, d in delta.items() if d > 0)
            self._pre_items.append(pre)
            self._post_items.append(post)
            self._gain_items.append(gain)

    # -- lookups -------------------------------------------------------

    def place_index(self, name: str) -> int:
        return self._place_index[name]

    def transition(self, name: str) -> Transition:
        try:
            return self.transitions[self._transition_index[name]]
        except KeyError:
            raise KeyError(f"no transition named '{name}'") from None

    def transition_index(self, name: str) -> int:
        return self._transition_index[name]

    def group_members(self, group: str) -> tuple[Transition, ...]:
        return tuple(self.transitions[i] for i in self._by_group[group])

    def owned_by(self, player: str) -> tuple[Transition, ...]:
        if player not in self._by_player:
            raise UnknownPlayer(player)
        return tuple(self.transitions[i] for i in self._by_player[player])

    @property
    def initial_marking(self) -> Marking:
        return tuple(p.init for p in self.places)

    def marking_from(self, counts: Mapping[str, int]) -> Marking:
        """Build a marking from a (possibly partial) place-count mapping."""
        for name in counts:
            if name not in self._place_index:
                raise KeyError(f"no place named '{name}'")
        return tuple(counts.get(p.name, 0) for p in self.places)

    def counts(self, m: Marking) -> dict[str, int]:
        return {p.name: m[i] for i, p in enumerate(self.places)}

    def tokens(self, m: Marking, place: str) -> int:
        return m[self._place_index[place]]

    # -- firing semantics ----------------------------------------------

    def _enabled_index(self, m: Marking, ti: int) -> bool:
        for i, w in self._pre_items[ti]:
            if m[i] < w:
                return False
        bounds = self.bounds
        for i, d in self._gain_items[ti]:
            if m[i] + d > bounds[i]:
                return False
        return True

    def _fire_index(self, m: Marking, ti: int) -> Marking:
        out = list(m)
        for i, w in self._pre_items[ti]:
            out[i] -= w
        for i, w in self._post_items[ti]:
            out[i] += w
        return tuple(out)

    def _resolve(self, t: Transition | str) -> int:
        name = t if isinstance(t, str) else t.name
        try:
            return self._transition_index[name]
        except KeyError:
            raise KeyError(f"no transition named '{name}'") from None


def is_enabled(net: Net, m: Marking, t: Transition | str) -> bool:
    """True iff ``t`` may fire in ``m``: inputs present and no bound overrun."""
    return net._enabled_index(m, net._resolve(t))


def fire(net: Net, m: Marking, t: Transition | str) -> Marking:
    """Fire one transition, returning the successor marking.

    Raises ``NotEnabled`` when the transition is not enabled (including the
    case where firing would exceed a place bound).
    """
    ti = net._resolve(t)
    if not net._enabled_index(m, ti):
        raise NotEnabled(f"transition '{net.transitions[ti].name}' is not enabled")
    return net._fire_index(m, ti)


def enabled_for(net: Net, m: Marking, player: str) -> tuple[Transition, ...]:
    """The player's enabled transitions in ``m``, in declaration order."""
    if player not in net._by_player:
        raise UnknownPlayer(player)
    return tuple(
        net.transitions[ti] for ti in net._by_player[player] if net._enabled_index(m, ti)
    )


def enabled_in_group(net: Net, m: Marking, group: str) -> tuple[Transition, ...]:
    """The enabled members of a chance group in ``m``, in declaration order."""
    if group not in net._by_group:
        raise KeyError(f"no chance group named '{group}'")
    return tuple(
        net.transitions[ti] for ti in net._by_group[group] if net._enabled_index(m, ti)
    )
