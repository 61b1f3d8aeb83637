"""The game description language: parse, validate, serialize.

A description is plain UTF-8 text, one declaration per line, ``#`` starting
a comment.  Declarations may appear in any order; the canonical form emitted
by :func:`serialize` orders them game / players / time / places /
transitions / payoffs / terminal, with declaration order preserved inside
each block (declaration order is semantic: it fixes the marking vector
layout and the within-chronon resolution order).

Grammar, informally::

    game "Title"
    players P1 P2
    time chronon 1000 horizon 4
    place NAME init NAT bound NAT [visible LIST|all|none]
    transition NAME owner PLAYER pre {p:NAT, ...} post {...} [label "TEXT"]
    chance NAME group GROUP weight RAT pre {...} post {...} [label "TEXT"]
    payoff PLAYER = RAT [('+'|'-') [RAT '*'] PLACE]...
    terminal = tokens(PLACE) OP NAT [and|or ...]        # parens allowed

with NAT a natural number, RAT an integer or ``p/q`` fraction, OP one of
``<  <=  =  >=  >``, and names matching ``[A-Za-z_][A-Za-z0-9_]*``.  A
missing ``visible`` clause means visible to every player; ``none`` means
hidden from all.  Payoffs are affine in the final marking.  The terminal
predicate is optional; the horizon always ends the game.

:func:`parse` raises :class:`ParseError` (carrying line-numbered
diagnostics) for text it cannot read; :func:`validate` returns a list of
:class:`Diagnostic` for semantic problems in a well-formed description.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .nets import Chance, Net, Place, Transition

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.severity}: {self.message}"


class ParseError(Exception):
    """Unreadable description text.  ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# ---------------------------------------------------------------------------
# Payoffs and terminal predicates


@dataclass(frozen=True)
class Payoff:
    """An affine function of the final marking: const + sum(coeff * tokens)."""

    const: Fraction
    coeffs: Mapping[str, Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "const", Fraction(self.const))
        object.__setattr__(
            self, "coeffs", {p: Fraction(c) for p, c in self.coeffs.items() if c}
        )

    def evaluate(self, net: Net, m: tuple[int, ...]) -> Fraction:
        total = self.const
        for place, c in self.coeffs.items():
            total += c * m[net.place_index(place)]
        return total


@dataclass(frozen=True)
class Atom:
    place: str
    op: str  # < <= = >= >
    value: int

    def evaluate(self, net: Net, m: tuple[int, ...]) -> bool:
        n = m[net.place_index(self.place)]
        v = self.value
        if self.op == "<":
            return n < v
        if self.op == "<=":
            return n <= v
        if self.op == "=":
            return n == v
        if self.op == ">=":
            return n >= v
        return n > v


@dataclass(frozen=True)
class And:
    items: tuple["Predicate", ...]

    def evaluate(self, net: Net, m: tuple[int, ...]) -> bool:
        return all(p.evaluate(net, m) for p in self.items)


@dataclass(frozen=True)
class Or:
    items: tuple["Predicate", ...]

    def evaluate(self, net: Net, m: tuple[int, ...]) -> bool:
        return any(p.evaluate(net, m) for p in self.items)


Predicate = Atom | And | Or


def _predicate_places(p: Predicate) -> Iterator[str]:
    if isinstance(p, Atom):
        yield p.place
    else:
        for item in p.items:
            yield from _predicate_places(item)


# ---------------------------------------------------------------------------
# The description object


@dataclass(frozen=True, eq=False)
class GameDescription:
    title: str
    players: tuple[str, ...]
    chronon_ms: int
    horizon: int
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]
    payoffs: Mapping[str, Payoff]
    terminal: Predicate | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "payoffs", dict(self.payoffs))

    @property
    def net(self) -> Net:
        """The underlying net (built lazily; ValueError if structurally broken)."""
        try:
            return object.__getattribute__(self, "_net")
        except AttributeError:
            net = Net(self.players, self.places, self.transitions)
            object.__setattr__(self, "_net", net)
            return net

    def payoff_vector(self, m: tuple[int, ...]) -> tuple[Fraction, ...]:
        """Each player's payoff for a final marking, in player order."""
        net = self.net
        out = []
        for p in self.players:
            po = self.payoffs.get(p)
            out.append(po.evaluate(net, m) if po is not None else Fraction(0))
        return tuple(out)

    def is_terminal_marking(self, m: tuple[int, ...]) -> bool:
        return self.terminal is not None and self.terminal.evaluate(self.net, m)


# ---------------------------------------------------------------------------
# Parsing


_DIRECTIVES = ("game", "players", "time", "place", "transition", "chance", "payoff", "terminal")

# Sentinel visibility: "visible to all players", resolved once the player
# list is known (the places block may precede the players block).
_ALL: frozenset[str] = frozenset({"\0all\0"})


class _LineParser:
    """Cursor over one logical line's tokens."""

    _TOKEN = re.compile(
        r"""\s*(?:
            (?P<string>"[^"]*")
          | (?P<map>\{[^}]*\})
          | (?P<rat>\d+/\d+)
          | (?P<nat>\d+)
          | (?P<ident>[A-Za-z_][A-Za-z0-9_,]*)
          | (?P<op><=|>=|==|=|<|>|\(|\)|\+|-|\*)
        )""",
        re.VERBOSE,
    )

    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.tokens: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            m = self._TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:].strip()
                if rest:
                    raise _Bail(f"unreadable text {rest[:20]!r}")
                break
            pos = m.end()
            kind = m.lastgroup
            assert kind is not None
            self.tokens.append((kind, m.group(kind)))
        self.i = 0

    def done(self) -> bool:
        return self.i >= len(self.tokens)

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self, kind: str | None = None, what: str = "") -> str:
        if self.done():
            raise _Bail(f"expected {what or kind}, got end of line")
        k, v = self.tokens[self.i]
        if kind is not None and k != kind:
            raise _Bail(f"expected {what or kind}, got {v!r}")
        self.i += 1
        return v

    def keyword(self, word: str) -> None:
        got = self.next("ident", f"'{word}'")
        if got != word:
            raise _Bail(f"expected '{word}', got {got!r}")

    def ident(self, what: str = "name") -> str:
        v = self.next("ident", what)
        if not _IDENT.match(v):
            raise _Bail(f"{what} {v!r} is not a valid identifier")
        return v

    def nat(self, what: str = "number") -> int:
        return int(self.next("nat", what))

    def rational(self, what: str = "rational") -> Fraction:
        k, v = self.tokens[self.i] if not self.done() else ("", "")
        if k == "rat":
            self.i += 1
            return Fraction(v)
        return Fraction(self.nat(what))

    def string(self, what: str = "string") -> str:
        return self.next("string", what)[1:-1]

    def arc_map(self, what: str) -> dict[str, int]:
        raw = self.next("map", what)[1:-1].strip()
        out: dict[str, int] = {}
        if not raw:
            return out
        for entry in raw.split(","):
            entry = entry.strip()
            mm = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(\d+)", entry)
            if not mm:
                raise _Bail(f"bad {what} entry {entry!r} (want place:count)")
            name, w = mm.group(1), int(mm.group(2))
            if name in out:
                raise _Bail(f"place '{name}' repeated in {what}")
            if w < 1:
                raise _Bail(f"{what} arc weight for '{name}' must be at least 1")
            out[name] = w
        return out

    def end(self) -> None:
        if not self.done():
            raise _Bail(f"unexpected trailing {self.tokens[self.i][1]!r}")


class _Bail(Exception):
    """Internal: abandon the current line with a message."""


def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            break
        out.append(ch)
    return "".join(out)


def _parse_payoff_expr(lp: _LineParser) -> Payoff:
    const = Fraction(0)
    coeffs: dict[str, Fraction] = {}
    sign = Fraction(1)
    tok = lp.peek()
    if tok and tok[1] == "-":
        lp.next()
        sign = Fraction(-1)
    first = True
    while True:
        if not first:
            tok = lp.peek()
            if tok is None:
                break
            if tok[1] not in ("+", "-"):
                raise _Bail(f"expected '+' or '-', got {tok[1]!r}")
            lp.next()
            sign = Fraction(1) if tok[1] == "+" else Fraction(-1)
        first = False
        tok = lp.peek()
        if tok is None:
            raise _Bail("dangling sign in payoff expression")
        kind = tok[0]
        if kind in ("nat", "rat"):
            value = lp.rational()
            nxt = lp.peek()
            if nxt and nxt[1] == "*":
                lp.next()
                place = lp.ident("place name")
                coeffs[place] = coeffs.get(place, Fraction(0)) + sign * value
            else:
                const += sign * value
        elif kind == "ident":
            place = lp.ident("place name")
            coeffs[place] = coeffs.get(place, Fraction(0)) + sign
        else:
            raise _Bail(f"unexpected {tok[1]!r} in payoff expression")
    return Payoff(const, coeffs)


def _parse_predicate(lp: _LineParser) -> Predicate:
    node = _parse_or(lp)
    lp.end()
    return node


def _parse_or(lp: _LineParser) -> Predicate:
    items = [_parse_and(lp)]
    while True:
        tok = lp.peek()
        if tok and tok == ("ident", "or"):
            lp.next()
            items.append(_parse_and(lp))
        else:
            break
    if len(items) == 1:
        return items[0]
    flat: list[Predicate] = []
    for it in items:
        flat.extend(it.items if isinstance(it, Or) else (it,))
    return Or(tuple(flat))


def _parse_and(lp: _LineParser) -> Predicate:
    items = [_parse_atomish(lp)]
    while True:
        tok = lp.peek()
        if tok and tok == ("ident", "and"):
            lp.next()
            items.append(_parse_atomish(lp))
        else:
            break
    if len(items) == 1:
        return items[0]
    flat: list[Predicate] = []
    for it in items:
        flat.extend(it.items if isinstance(it, And) else (it,))
    return And(tuple(flat))


def _parse_atomish(lp: _LineParser) -> Predicate:
    tok = lp.peek()
    if tok is None:
        raise _Bail("expected predicate, got end of line")
    if tok == ("op", "("):
        lp.next()
        inner = _parse_or(lp)
        closing = lp.next("op", "')'")
        if closing != ")":
            raise _Bail(f"expected ')', got {closing!r}")
        return inner
    lp.keyword("tokens")
    if lp.next("op", "'('") != "(":
        raise _Bail("expected '(' after tokens")
    place = lp.ident("place name")
    if lp.next("op", "')'") != ")":
        raise _Bail("expected ')'")
    op = lp.next("op", "comparison")
    if op == "==":
        op = "="
    if op not in ("<", "<=", "=", ">=", ">"):
        raise _Bail(f"bad comparison {op!r}")
    value = lp.nat("token count")
    return Atom(place, op, value)


def parse(text: str | bytes) -> GameDescription:
    """Parse description text.  Raises ParseError listing every bad line.

    Successful parsing only guarantees the text was readable; run
    :func:`validate` to check the game makes sense.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError([Diagnostic("error", f"not valid UTF-8: {e}")]) from None

    errors: list[Diagnostic] = []
    title: str | None = None
    players: tuple[str, ...] | None = None
    chronon_ms: int | None = None
    horizon: int | None = None
    places: list[Place] = []
    transitions: list[Transition] = []
    payoffs: dict[str, Payoff] = {}
    terminal: Predicate | None = None

    def err(lineno: int, msg: str) -> None:
        errors.append(Diagnostic("error", msg, lineno))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        try:
            lp = _LineParser(line, lineno)
        except _Bail as e:
            err(lineno, str(e))
            continue
        if lp.done():
            continue
        kind, word = lp.tokens[0]
        if kind != "ident" or word not in _DIRECTIVES:
            err(lineno, f"unknown declaration {word!r}")
            continue
        lp.next()
        try:
            if word == "game":
                if title is not None:
                    raise _Bail("duplicate game line")
                title = lp.string("game title")
                lp.end()
            elif word == "players":
                if players is not None:
                    raise _Bail("duplicate players line")
                names = []
                while not lp.done():
                    names.append(lp.ident("player name"))
                if not names:
                    raise _Bail("players line lists no players")
                players = tuple(names)
            elif word == "time":
                if chronon_ms is not None:
                    raise _Bail("duplicate time line")
                lp.keyword("chronon")
                chronon_ms = lp.nat("chronon length in ms")
                lp.keyword("horizon")
                horizon = lp.nat("horizon")
                lp.end()
            elif word == "place":
                name = lp.ident("place name")
                lp.keyword("init")
                init = lp.nat("initial count")
                lp.keyword("bound")
                bound = lp.nat("bound")
                visible: frozenset[str] | None = None
                if not lp.done():
                    lp.keyword("visible")
                    listed = lp.next("ident", "visibility list")
                    if listed == "all":
                        visible = None
                    elif listed == "none":
                        visible = frozenset()
                    else:
                        vnames = [s for s in listed.split(",") if s]
                        for v in vnames:
                            if not _IDENT.match(v):
                                raise _Bail(f"bad player name {v!r} in visible list")
                        visible = frozenset(vnames)
                    lp.end()
                places.append(
                    Place(name, init, bound, visible if visible is not None else _ALL)
                )
            elif word == "transition":
                name = lp.ident("transition name")
                lp.keyword("owner")
                owner = lp.ident("owner")
                lp.keyword("pre")
                pre = lp.arc_map("pre")
                lp.keyword("post")
                post = lp.arc_map("post")
                label = name
                if not lp.done():
                    lp.keyword("label")
                    label = lp.string("label")
                    lp.end()
                transitions.append(Transition(name, owner, pre, post, label))
            elif word == "chance":
                name = lp.ident("transition name")
                lp.keyword("group")
                group = lp.ident("group name")
                lp.keyword("weight")
                weight = lp.rational("weight")
                lp.keyword("pre")
                pre = lp.arc_map("pre")
                lp.keyword("post")
                post = lp.arc_map("post")
                label = name
                if not lp.done():
                    lp.keyword("label")
                    label = lp.string("label")
                    lp.end()
                transitions.append(Transition(name, Chance(group, weight), pre, post, label))
            elif word == "payoff":
                player = lp.ident("player name")
                if lp.next("op", "'='") != "=":
                    raise _Bail("expected '=' after payoff player")
                if player in payoffs:
                    raise _Bail(f"duplicate payoff for '{player}'")
                payoffs[player] = _parse_payoff_expr(lp)
            elif word == "terminal":
                if terminal is not None:
                    raise _Bail("duplicate terminal line")
                if lp.next("op", "'='") != "=":
                    raise _Bail("expected '=' after terminal")
                terminal = _parse_predicate(lp)
        except _Bail as e:
            err(lineno, str(e))

    if title is None:
        errors.append(Diagnostic("error", "missing game line"))
    if players is None:
        errors.append(Diagnostic("error", "missing players line"))
    if chronon_ms is None or horizon is None:
        errors.append(Diagnostic("error", "missing time line"))
    if errors:
        raise ParseError(errors)
    assert title is not None and players is not None
    assert chronon_ms is not None and horizon is not None

    resolved = [
        Place(p.name, p.init, p.bound, frozenset(players)) if p.visible == _ALL else p
        for p in places
    ]
    return GameDescription(
        title=title,
        players=players,
        chronon_ms=chronon_ms,
        horizon=horizon,
        places=tuple(resolved),
        transitions=tuple(transitions),
        payoffs=payoffs,
        terminal=terminal,
    )


# ---------------------------------------------------------------------------
# Validation


def validate(desc: GameDescription) -> list[Diagnostic]:
    """Semantic checks.  Empty result means the description is playable."""
    out: list[Diagnostic] = []

    def error(msg: str) -> None:
        out.append(Diagnostic("error", msg))

    def warn(msg: str) -> None:
        out.append(Diagnostic("warning", msg))

    if not desc.players:
        error("no players declared")
    seen: set[str] = set()
    for p in desc.players:
        if p in seen:
            error(f"duplicate player '{p}'")
        seen.add(p)
        if not _IDENT.match(p):
            error(f"player name {p!r} is not a valid identifier")

    if desc.chronon_ms <= 0:
        error(f"chronon length must be positive, got {desc.chronon_ms}")
    if desc.horizon <= 0:
        error(f"horizon must be positive, got {desc.horizon}")

    place_names: set[str] = set()
    for pl in desc.places:
        if pl.name in place_names:
            error(f"duplicate place '{pl.name}'")
        place_names.add(pl.name)
        if not _IDENT.match(pl.name):
            error(f"place name {pl.name!r} is not a valid identifier")
        if pl.init < 0 or pl.bound < 0:
            error(f"place '{pl.name}': init and bound must be natural numbers")
        elif pl.init > pl.bound:
            error(f"place '{pl.name}': init {pl.init} exceeds bound {pl.bound}")
        for v in pl.visible:
            if v not in desc.players:
                error(f"place '{pl.name}': visible to undeclared player '{v}'")

    tnames: set[str] = set()
    groups: dict[str, Fraction] = {}
    touched: set[str] = set()
    by_place = {p.name: p for p in desc.places}
    for t in desc.transitions:
        if t.name in tnames:
            error(f"duplicate transition '{t.name}'")
        tnames.add(t.name)
        if not _IDENT.match(t.name):
            error(f"transition name {t.name!r} is not a valid identifier")
        for arc, kind in ((t.pre, "pre"), (t.post, "post")):
            for pname, w in arc.items():
                if pname not in place_names:
                    error(f"transition '{t.name}': {kind} arc to undeclared place '{pname}'")
                if w < 1:
                    error(f"transition '{t.name}': {kind} arc weight on '{pname}' must be positive")
                else:
                    touched.add(pname)
        if isinstance(t.owner, Chance):
            w = t.owner.weight
            if w <= 0 or w > 1:
                error(f"chance transition '{t.name}': weight {w} outside (0, 1]")
            groups[t.owner.group] = groups.get(t.owner.group, Fraction(0)) + w
        else:
            if t.owner not in desc.players:
                error(f"transition '{t.name}': owner '{t.owner}' is not a declared player")
        # Statically dead: needs more tokens than a place can ever hold.
        for pname, w in t.pre.items():
            pl = by_place.get(pname)
            if pl is not None and w > pl.bound:
                warn(f"transition '{t.name}' can never fire: needs {w} tokens on '{pname}' (bound {pl.bound})")

    for g, total in groups.items():
        if total != 1:
            error(f"chance group '{g}' weights sum to {total} != 1")

    for player, po in desc.payoffs.items():
        if player not in desc.players:
            error(f"payoff for undeclared player '{player}'")
        for pname in po.coeffs:
            if pname not in place_names:
                error(f"payoff for '{player}' references undeclared place '{pname}'")
    for player in desc.players:
        if player not in desc.payoffs:
            warn(f"no payoff declared for '{player}' (treated as constant 0)")

    if desc.terminal is not None:
        for pname in _predicate_places(desc.terminal):
            if pname not in place_names:
                error(f"terminal predicate references undeclared place '{pname}'")

    for pl in desc.places:
        if pl.name not in touched:
            used_in_payoff = any(pl.name in po.coeffs for po in desc.payoffs.values())
            used_in_terminal = desc.terminal is not None and pl.name in set(
                _predicate_places(desc.terminal)
            )
            if not used_in_payoff and not used_in_terminal:
                warn(f"place '{pl.name}' is never used by a transition, payoff, or terminal")

    return out


# ---------------------------------------------------------------------------
# Canonical serialization


def _fmt_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_arcs(arc: Mapping[str, int]) -> str:
    inner = ", ".join(f"{name}:{arc[name]}" for name in sorted(arc) if arc[name])
    return "{" + inner + "}"


def _fmt_visible(visible: frozenset[str]) -> str:
    return ",".join(sorted(visible)) if visible else "none"


def _fmt_payoff(po: Payoff) -> str:
    parts = [_fmt_rational(po.const)]
    for place in sorted(po.coeffs):
        c = po.coeffs[place]
        sign = "+" if c > 0 else "-"
        mag = abs(c)
        term = place if mag == 1 else f"{_fmt_rational(mag)}*{place}"
        parts.append(f"{sign} {term}")
    return " ".join(parts)


def _fmt_predicate(p: Predicate, parent: str = "or") -> str:
    if isinstance(p, Atom):
        return f"tokens({p.place}) {p.op} {p.value}"
    if isinstance(p, And):
        body = " and ".join(_fmt_predicate(i, "and") for i in p.items)
        return body
    body = " or ".join(_fmt_predicate(i, "or") for i in p.items)
    return f"({body})" if parent == "and" else body


def serialize(desc: GameDescription) -> str:
    """Render the canonical text form.

    Canonicalization is idempotent: ``serialize(parse(s))`` is a fixed point
    of ``parse``/``serialize`` for any readable ``s``, and parsing the output
    reproduces the description exactly.
    """
    lines: list[str] = []
    lines.append(f'game "{desc.title}"')
    lines.append("players " + " ".join(desc.players))
    lines.append(f"time chronon {desc.chronon_ms} horizon {desc.horizon}")
    lines.append("")
    for pl in desc.places:
        lines.append(
            f"place {pl.name} init {pl.init} bound {pl.bound} visible {_fmt_visible(pl.visible)}"
        )
    if desc.places:
        lines.append("")
    for t in desc.transitions:
        label = "" if t.label == t.name else f' label "{t.label}"'
        if isinstance(t.owner, Chance):
            head = f"chance {t.name} group {t.owner.group} weight {_fmt_rational(t.owner.weight)}"
        else:
            head = f"transition {t.name} owner {t.owner}"
        lines.append(f"{head} pre {_fmt_arcs(t.pre)} post {_fmt_arcs(t.post)}{label}")
    if desc.transitions:
        lines.append("")
    for player in desc.players:
        if player in desc.payoffs:
            lines.append(f"payoff {player} = {_fmt_payoff(desc.payoffs[player])}")
    for player in desc.payoffs:
        if player not in desc.players:  # keep round-trip lossless even when invalid
            lines.append(f"payoff {player} = {_fmt_payoff(desc.payoffs[player])}")
    if desc.terminal is not None:
        lines.append(f"terminal = {_fmt_predicate(desc.terminal)}")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"
