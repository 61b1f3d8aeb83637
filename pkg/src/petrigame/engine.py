"""Lockstep session engine, bots, session logs, and replay.

The engine is sans-IO: it owns the game state, the rule of what happens at
each tick, the acceptance rules for submitted actions, and the session log
— but never touches sockets or clocks.  A shell (the websocket server, the
local simulation runner, a test) feeds it joins, actions, and tick calls,
each stamped with a millisecond timestamp of the shell's choosing.

Time model: the session sits in chronon k collecting at most one action
per player; ``tick`` resolves the chronon (players in declaration order,
then every chance group draws one member by weight from the session's
seeded generator) and either advances to k+1 or ends the game.  An action
is judged the moment it arrives: submissions for a future chronon are
``wrong_chronon``, for a past chronon ``late``, a second submission in the
same chronon ``duplicate``, and anything outside the sender's menu at the
chronon's opening marking ``illegal``.  Rejected actions never touch the
state.

The log is JSONL: a header record (protocol version, the full canonical
rules text plus its sha256, the seed), then joins, actions with their
outcomes, one record per tick (moves, draws, resulting marking), and an
end record with exact payoffs.  ``replay`` re-simulates a log from its
header and verifies every recorded step, so a log is both a replayable
artifact and tamper-evident.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

from .lang import Diagnostic, GameDescription, parse, serialize, validate
from .nets import Chance, enabled_for
from .unfold import chronon_step

PROTOCOL_VERSION = 1

REASON_LATE = "late"
REASON_ILLEGAL = "illegal"
REASON_DUPLICATE = "duplicate"
REASON_WRONG_CHRONON = "wrong_chronon"


class InvalidDescription(Exception):
    """Session creation refused: the description has validation errors."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class CorruptLog(Exception):
    pass


class VersionMismatch(Exception):
    pass


@dataclass(frozen=True)
class Accepted:
    player: str
    chronon: int
    transition: str


@dataclass(frozen=True)
class Rejected:
    player: str
    chronon: int
    transition: str
    reason: str


def description_digest(desc: GameDescription) -> str:
    return hashlib.sha256(serialize(desc).encode("utf-8")).hexdigest()


class SessionEngine:
    """Authoritative state of one running session."""

    def __init__(
        self,
        desc: GameDescription,
        seed: int,
        session_id: str | None = None,
        created_ms: int = 0,
    ):
        problems = [d for d in validate(desc) if d.severity == "error"]
        if problems:
            raise InvalidDescription(problems)
        self.desc = desc
        self.net = desc.net
        self.seed = seed
        self.digest = description_digest(desc)
        self.session_id = session_id or f"{self.digest[:8]}-{seed}"
        self.rng = random.Random(seed)
        self.chronon = 0
        self.marking = self.net.initial_marking
        self.pending: dict[str, str] = {}
        self.ended = False
        self.payoffs: tuple[Fraction, ...] | None = None
        self.records: list[dict] = [
            {
                "record": "header",
                "protocol": PROTOCOL_VERSION,
                "session": self.session_id,
                "seed": seed,
                "created_ms": created_ms,
                "title": desc.title,
                "players": list(desc.players),
                "chronon_ms": desc.chronon_ms,
                "horizon": desc.horizon,
                "description": serialize(desc),
                "description_sha256": self.digest,
            }
        ]
        # Lotteries draw every chronon whether or not members are enabled,
        # so the draw sequence depends only on the seed and the rules.
        self._lotteries: dict[str, tuple[list[str], list[int], int]] = {}
        for g in self.net.chance_groups:
            members = self.net.group_members(g)
            weights = [t.owner.weight for t in members if isinstance(t.owner, Chance)]
            denom = lcm(*(w.denominator for w in weights)) if weights else 1
            nums = [int(w * denom) for w in weights]
            self._lotteries[g] = ([t.name for t in members], nums, denom)

    # -- views -----------------------------------------------------------

    def view(self, player: str | None) -> dict[str, int]:
        """Visible place counts; ``None`` (the monitor) sees everything."""
        return {
            p.name: self.marking[i]
            for i, p in enumerate(self.desc.places)
            if player is None or player in p.visible
        }

    def menu(self, player: str) -> list[str]:
        if self.ended:
            return []
        return [t.name for t in enabled_for(self.net, self.marking, player)]

    def tick_message(self, player: str | None, now_ms: int) -> dict:
        msg = {
            "type": "tick",
            "chronon": self.chronon,
            "view": self.view(player),
            "deadline_ms": now_ms + self.desc.chronon_ms,
        }
        if player is not None:
            msg["enabled"] = self.menu(player)
        return msg

    def end_message(self, player: str | None) -> dict:
        assert self.ended and self.payoffs is not None
        return {
            "type": "end",
            "chronon": self.chronon,
            "payoffs": {p: str(v) for p, v in zip(self.desc.players, self.payoffs)},
            "view": self.view(player),
        }

    # -- inputs ----------------------------------------------------------

    def note_join(self, player: str, role: str, now_ms: int) -> None:
        self.records.append(
            {"record": "join", "player": player, "role": role, "at_ms": now_ms}
        )

    def on_action(
        self, player: str, chronon: int, transition: str, now_ms: int
    ) -> Accepted | Rejected:
        """Judge one submission and, if accepted, hold it for the next tick."""
        outcome: Accepted | Rejected
        if self.ended or chronon > self.chronon:
            outcome = Rejected(player, chronon, transition, REASON_WRONG_CHRONON)
        elif chronon < self.chronon:
            outcome = Rejected(player, chronon, transition, REASON_LATE)
        elif player in self.pending:
            outcome = Rejected(player, chronon, transition, REASON_DUPLICATE)
        elif transition not in self.menu(player):
            outcome = Rejected(player, chronon, transition, REASON_ILLEGAL)
        else:
            self.pending[player] = transition
            outcome = Accepted(player, chronon, transition)
        rec = {
            "record": "action",
            "player": player,
            "chronon": chronon,
            "transition": transition,
            "at_ms": now_ms,
            "outcome": "accepted" if isinstance(outcome, Accepted) else "rejected",
        }
        if isinstance(outcome, Rejected):
            rec["reason"] = outcome.reason
        self.records.append(rec)
        return outcome

    # -- the clock edge ----------------------------------------------------

    def draw(self) -> dict[str, str]:
        """One weighted member per chance group, exactly per declared rationals."""
        out: dict[str, str] = {}
        for g in self.net.chance_groups:
            names, nums, denom = self._lotteries[g]
            r = self.rng.randrange(denom)
            acc = 0
            for name, w in zip(names, nums):
                acc += w
                if r < acc:
                    out[g] = name
                    break
        return out

    def tick(self, now_ms: int) -> dict:
        """Resolve the current chronon; returns the tick log record."""
        if self.ended:
            raise RuntimeError("session already ended")
        moves = dict(self.pending)
        draws = self.draw()
        self.marking = chronon_step(self.desc, self.marking, moves, draws)
        rec = {
            "record": "tick",
            "chronon": self.chronon,
            "moves": moves,
            "draws": draws,
            "marking": self.net.counts(self.marking),
            "at_ms": now_ms,
        }
        self.records.append(rec)
        self.pending = {}
        self.chronon += 1
        if self.desc.is_terminal_marking(self.marking) or self.chronon >= self.desc.horizon:
            self.ended = True
            self.payoffs = self.desc.payoff_vector(self.marking)
            self.records.append(
                {
                    "record": "end",
                    "chronon": self.chronon,
                    "payoffs": {p: str(v) for p, v in zip(self.desc.players, self.payoffs)},
                    "at_ms": now_ms,
                }
            )
        return rec

    # -- log -------------------------------------------------------------

    def log_lines(self) -> list[str]:
        return [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.records]


# ---------------------------------------------------------------------------
# Bots


BotFn = Callable[[Sequence[str], dict[str, int], random.Random], str | None]


def bot_random(menu: Sequence[str], view: dict[str, int], rng: random.Random) -> str | None:
    return rng.choice(list(menu)) if menu else None


def bot_first(menu: Sequence[str], view: dict[str, int], rng: random.Random) -> str | None:
    return menu[0] if menu else None


def bot_noop(menu: Sequence[str], view: dict[str, int], rng: random.Random) -> str | None:
    return None


BOTS: dict[str, BotFn] = {"random": bot_random, "first": bot_first, "noop": bot_noop}


def bot_rng(seed: int, player: str) -> random.Random:
    """A player-specific generator that is stable across runs and platforms."""
    digest = hashlib.sha256(f"{seed}:{player}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def run_local_session(
    desc: GameDescription,
    seed: int,
    bots: dict[str, str] | None = None,
    session_id: str | None = None,
) -> SessionEngine:
    """Drive a full session in-process on a logical clock (no sockets, no waiting).

    Every player is controlled by a named bot ("random" by default); each
    bot draws from its own seed-and-name-derived generator, so the whole
    session is a pure function of (description, seed, bots).
    """
    engine = SessionEngine(desc, seed, session_id=session_id, created_ms=0)
    kinds = dict(bots or {})
    rngs = {p: bot_rng(seed, p) for p in desc.players}
    fns = {p: BOTS[kinds.get(p, "random")] for p in desc.players}
    now = 0
    for p in desc.players:
        engine.note_join(p, "bot", now)
    while not engine.ended:
        for p in desc.players:
            choice = fns[p](engine.menu(p), engine.view(p), rngs[p])
            if choice is not None:
                engine.on_action(p, engine.chronon, choice, now)
        now += desc.chronon_ms
        engine.tick(now)
    return engine


# ---------------------------------------------------------------------------
# Replay


@dataclass(frozen=True)
class ReplayResult:
    session_id: str
    seed: int
    desc: GameDescription
    markings: tuple
    moves: tuple
    draws: tuple
    payoffs: tuple[Fraction, ...] | None

    @property
    def ended(self) -> bool:
        return self.payoffs is not None


def replay(lines: Iterable[str] | str) -> ReplayResult:
    """Re-simulate a session log and verify it against itself.

    Accepts the log text or an iterable of lines.  Raises VersionMismatch
    for logs from another protocol and CorruptLog whenever the log cannot
    have been produced by a faithful engine: unreadable JSON, a missing or
    inconsistent header, draws that contradict the seed, markings or
    payoffs that contradict the rules.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    records = []
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise CorruptLog(f"line {i}: not valid JSON ({e})") from None
    if not records or records[0].get("record") != "header":
        raise CorruptLog("log does not start with a header record")
    header = records[0]
    if header.get("protocol") != PROTOCOL_VERSION:
        raise VersionMismatch(
            f"log protocol {header.get('protocol')!r}, supported {PROTOCOL_VERSION}"
        )
    try:
        desc = parse(header["description"])
        seed = header["seed"]
    except KeyError as e:
        raise CorruptLog(f"header lacks {e}") from None
    if header.get("description_sha256") != description_digest(desc):
        raise CorruptLog("description digest does not match the rules text")

    engine = SessionEngine(desc, seed)
    markings = [engine.marking]
    moves_seq = []
    draws_seq = []
    payoffs: tuple[Fraction, ...] | None = None
    saw_end = False
    for rec in records[1:]:
        kind = rec.get("record")
        if kind == "action":
            if rec.get("outcome") == "accepted":
                got = engine.on_action(
                    rec["player"], rec["chronon"], rec["transition"], rec.get("at_ms", 0)
                )
                if not isinstance(got, Accepted):
                    raise CorruptLog(
                        f"logged acceptance of {rec['transition']!r} would be rejected ({got.reason})"
                    )
            # Rejected submissions never touched the state; nothing to do.
        elif kind == "tick":
            if engine.ended:
                raise CorruptLog("tick after the end of the game")
            expected_moves = dict(engine.pending)
            if rec.get("moves") != expected_moves:
                raise CorruptLog(
                    f"tick {rec.get('chronon')}: logged moves {rec.get('moves')} != accepted {expected_moves}"
                )
            tick_rec = engine.tick(rec.get("at_ms", 0))
            if rec.get("draws") != tick_rec["draws"]:
                raise CorruptLog(
                    f"tick {rec['chronon']}: logged draws {rec['draws']} contradict the seed"
                )
            if rec.get("marking") != tick_rec["marking"]:
                raise CorruptLog(f"tick {rec['chronon']}: logged marking diverges")
            markings.append(engine.marking)
            moves_seq.append(expected_moves)
            draws_seq.append(tick_rec["draws"])
        elif kind == "end":
            if not engine.ended or engine.payoffs is None:
                raise CorruptLog("end record while the game is still running")
            logged = rec.get("payoffs")
            actual = {p: str(v) for p, v in zip(desc.players, engine.payoffs)}
            if logged != actual:
                raise CorruptLog(f"logged payoffs {logged} != recomputed {actual}")
            payoffs = engine.payoffs
            saw_end = True
        elif kind in ("join", "header"):
            pass
        else:
            raise CorruptLog(f"unknown record kind {kind!r}")
    if engine.ended and not saw_end:
        raise CorruptLog("game reached its end but the log lacks an end record")
    return ReplayResult(
        session_id=header.get("session", ""),
        seed=seed,
        desc=desc,
        markings=tuple(markings),
        moves=tuple(moves_seq),
        draws=tuple(draws_seq),
        payoffs=payoffs,
    )
