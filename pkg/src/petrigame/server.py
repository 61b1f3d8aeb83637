"""Websocket shell around the session engine.

One server hosts one session of one game.  Clients speak JSON, one message
per frame.  Protocol (version 1):

  client -> server
    {"type": "join", "player": "P1"}          claim a seat
    {"type": "join", "role": "monitor"}       observe everything
    {"type": "action", "chronon": 0, "transition": "name"}

  server -> client
    {"type": "welcome", "protocol": 1, "session": id, "role": ..,
     "player": .., "title": .., "players": [..], "chronon_ms": ..,
     "horizon": .., "rules": <canonical rules text>, "history": [..]}
    {"type": "tick", "chronon": k, "view": {place: count},
     "enabled": [..], "deadline_ms": t}       players: own view and menu
    {"type": "accepted", "chronon": k, "transition": ..}
    {"type": "rejected", "chronon": k, "transition": .., "reason": ..}
    {"type": "end", "chronon": k, "payoffs": {player: "p/q"}, "view": {..}}
    {"type": "error", "message": ..}

The rules text is common knowledge and goes to every client; private state
never does — each tick carries only the places visible to its recipient.
Monitors get the full marking plus the moves and draws that resolved the
previous chronon (their end frame carries the final chronon's).  A player
who drops can rejoin the same seat and receives the messages they missed
in ``history``.

Ticks are equidistant: the resolution deadline for chronon k+1 is exactly
``chronon_ms`` after the deadline for chronon k on the event-loop clock,
independent of how long resolution itself takes.  Unclaimed seats can be
filled by server-side bots; the session starts once every seat is covered.
A session log is written next to the server (or into ``log_dir``) when the
game ends.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
from dataclasses import dataclass, field, replace

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .engine import BOTS, Accepted, PROTOCOL_VERSION, SessionEngine, bot_rng
from .lang import GameDescription, serialize

ENV_PREFIX = "PETRIGAME_"


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0  # 0 picks a free port; read GameServer.port after start()
    seed: int = 0
    bots: dict[str, str] = field(default_factory=dict)  # seat name -> bot kind
    log_dir: str | None = None
    start_delay_ms: int = 100
    session_id: str | None = None


def load_config(path: str | None = None, env: dict[str, str] | None = None) -> ServerConfig:
    """Config file (JSON) layered under PETRIGAME_* environment overrides."""
    cfg = ServerConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(data) - set(cfg.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = replace(cfg, **data)
    env = os.environ if env is None else env
    overrides: dict = {}
    for key in ("host", "log_dir", "session_id"):
        v = env.get(ENV_PREFIX + key.upper())
        if v is not None:
            overrides[key] = v
    for key in ("port", "seed", "start_delay_ms"):
        v = env.get(ENV_PREFIX + key.upper())
        if v is not None:
            overrides[key] = int(v)
    v = env.get(ENV_PREFIX + "BOTS")
    if v is not None:
        # e.g. "P2=random" or "P1=first,P2=noop"
        pairs = [item.split("=", 1) for item in v.split(",") if item]
        overrides["bots"] = {seat: kind for seat, kind in pairs}
    return replace(cfg, **overrides)


class GameServer:
    def __init__(self, desc: GameDescription, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        for seat, kind in self.config.bots.items():
            if seat not in desc.players:
                raise ValueError(f"bot seat {seat!r} is not a player")
            if kind not in BOTS:
                raise ValueError(f"unknown bot kind {kind!r}")
        self.engine = SessionEngine(
            desc,
            self.config.seed,
            session_id=self.config.session_id,
            created_ms=int(time.time() * 1000),
        )
        self.desc = desc
        self.port: int | None = None
        self.log_path: str | None = None
        self.seats: dict[str, object | None] = {p: None for p in desc.players}
        self.history: dict[str, list[dict]] = {p: [] for p in desc.players}
        self.monitors: set = set()
        self.monitor_history: list[dict] = []
        self._bot_rngs = {p: bot_rng(self.config.seed, p) for p in self.config.bots}
        self._seated = asyncio.Event()
        self._done = asyncio.Event()
        self._announced = False
        self._server = None
        self._loop_task = None
        self._t0 = 0.0

    # -- lifecycle ---------------------------------------------------------

    async def start(self) -> None:
        self._server = await serve(self._handle, self.config.host, self.config.port)
        self.port = self._server.sockets[0].getsockname()[1]
        self._t0 = asyncio.get_running_loop().time()
        self._check_seated()  # every seat may already be bot-covered
        self._loop_task = asyncio.create_task(self._run())

    async def wait_closed(self) -> None:
        await self._done.wait()

    async def stop(self) -> None:
        if self._loop_task is not None:
            self._loop_task.cancel()
            try:
                await self._loop_task
            except asyncio.CancelledError:
                pass
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        self._done.set()

    def _now_ms(self) -> int:
        return int((asyncio.get_running_loop().time() - self._t0) * 1000)

    # -- connections ---------------------------------------------------------

    async def _handle(self, ws) -> None:
        role = None
        seat = None
        try:
            async for raw in ws:
                msg = self._decode(raw)
                if msg is None:
                    await self._send(ws, {"type": "error", "message": "not valid JSON"})
                    continue
                kind = msg.get("type")
                if role is None:
                    if kind != "join":
                        await self._send(ws, {"type": "error", "message": "join first"})
                        continue
                    role, seat = await self._join(ws, msg)
                elif kind == "action":
                    await self._action(ws, role, seat, msg)
                elif kind == "join":
                    await self._send(ws, {"type": "error", "message": "already joined"})
                else:
                    await self._send(ws, {"type": "error", "message": f"unknown type {kind!r}"})
        except ConnectionClosed:
            pass
        finally:
            if seat is not None and self.seats.get(seat) is ws:
                self.seats[seat] = None
            self.monitors.discard(ws)

    async def _join(self, ws, msg: dict):
        if msg.get("role") == "monitor":
            self.monitors.add(ws)
            await self._send(ws, self._welcome("monitor", None, self.monitor_history))
            return "monitor", None
        player = msg.get("player")
        if player not in self.seats:
            await self._send(ws, {"type": "error", "message": f"no seat named {player!r}"})
            await ws.close()
            return None, None
        if player in self.config.bots:
            await self._send(ws, {"type": "error", "message": f"seat {player!r} is bot-controlled"})
            await ws.close()
            return None, None
        if self.seats[player] is not None:
            await self._send(ws, {"type": "error", "message": f"seat {player!r} is taken"})
            await ws.close()
            return None, None
        self.seats[player] = ws
        self.engine.note_join(player, "player", self._now_ms())
        await self._send(ws, self._welcome("player", player, self.history[player]))
        self._check_seated()
        return "player", player

    def _welcome(self, role: str, player: str | None, history: list[dict]) -> dict:
        return {
            "type": "welcome",
            "protocol": PROTOCOL_VERSION,
            "session": self.engine.session_id,
            "role": role,
            "player": player,
            "title": self.desc.title,
            "players": list(self.desc.players),
            "chronon_ms": self.desc.chronon_ms,
            "horizon": self.desc.horizon,
            "rules": serialize(self.desc),
            "history": list(history),
        }

    def _check_seated(self) -> None:
        covered = all(
            self.seats[p] is not None or p in self.config.bots for p in self.seats
        )
        if covered:
            self._seated.set()

    async def _action(self, ws, role: str, seat: str | None, msg: dict) -> None:
        if role != "player" or seat is None:
            await self._send(ws, {"type": "error", "message": "monitors cannot act"})
            return
        chronon = msg.get("chronon")
        transition = msg.get("transition")
        if not isinstance(chronon, int) or not isinstance(transition, str):
            await self._send(
                ws, {"type": "error", "message": "action needs an integer chronon and a transition name"}
            )
            return
        if not self._announced:
            await self._send(ws, {"type": "error", "message": "game has not started"})
            return
        outcome = self.engine.on_action(seat, chronon, transition, self._now_ms())
        if isinstance(outcome, Accepted):
            reply = {"type": "accepted", "chronon": chronon, "transition": transition}
        else:
            reply = {
                "type": "rejected",
                "chronon": chronon,
                "transition": transition,
                "reason": outcome.reason,
            }
        self.history[seat].append(reply)
        await self._send(ws, reply)

    # -- the drumbeat ---------------------------------------------------------

    async def _run(self) -> None:
        await self._seated.wait()
        loop = asyncio.get_running_loop()
        await asyncio.sleep(self.config.start_delay_ms / 1000)
        period = self.desc.chronon_ms / 1000
        await self._announce(moves=None, draws=None)
        deadline = loop.time() + period
        while not self.engine.ended:
            await asyncio.sleep(deadline - loop.time())
            rec = self.engine.tick(self._now_ms())
            if self.engine.ended:
                await self._finish(rec["moves"], rec["draws"])
                return
            await self._announce(moves=rec["moves"], draws=rec["draws"])
            deadline += period

    async def _announce(self, moves: dict | None, draws: dict | None) -> None:
        """Open the current chronon for everyone: views, menus, deadline."""
        self._announced = True
        now = self._now_ms()
        for p, sock in self.seats.items():
            msg = self.engine.tick_message(p, now)
            self.history[p].append(msg)
            if sock is not None:
                await self._send(sock, msg)
        mon = self.engine.tick_message(None, now)
        if moves is not None:
            mon["moves"] = moves
            mon["draws"] = draws
        self.monitor_history.append(mon)
        for sock in list(self.monitors):
            await self._send(sock, mon)
        for seat, kind in self.config.bots.items():
            menu = self.engine.menu(seat)
            choice = BOTS[kind](menu, self.engine.view(seat), self._bot_rngs[seat])
            if choice is not None:
                outcome = self.engine.on_action(seat, self.engine.chronon, choice, now)
                assert isinstance(outcome, Accepted)

    async def _finish(self, moves: dict | None = None, draws: dict | None = None) -> None:
        for p, sock in self.seats.items():
            msg = self.engine.end_message(p)
            self.history[p].append(msg)
            if sock is not None:
                await self._send(sock, msg)
        mon = self.engine.end_message(None)
        if moves is not None:  # the last chronon is resolved by end, not by a tick
            mon["moves"] = moves
            mon["draws"] = draws
        self.monitor_history.append(mon)
        for sock in list(self.monitors):
            await self._send(sock, mon)
        self._write_log()
        self._done.set()
        if self._server is not None:
            self._server.close()

    def _write_log(self) -> None:
        log_dir = self.config.log_dir or "."
        os.makedirs(log_dir, exist_ok=True)
        self.log_path = os.path.join(log_dir, f"{self.engine.session_id}.jsonl")
        with open(self.log_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.engine.log_lines()) + "\n")

    # -- plumbing ---------------------------------------------------------

    @staticmethod
    def _decode(raw) -> dict | None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return None
        return msg if isinstance(msg, dict) else None

    @staticmethod
    async def _send(ws, msg: dict) -> None:
        try:
            await ws.send(json.dumps(msg, separators=(",", ":")))
        except ConnectionClosed:
            pass


async def run_server(desc: GameDescription, config: ServerConfig) -> str | None:
    """Serve one session to completion; returns the log path."""
    server = GameServer(desc, config)
    await server.start()
    print(f"listening on ws://{server.config.host}:{server.port} "
          f"(session {server.engine.session_id})", flush=True)
    try:
        await server.wait_closed()
    finally:
        await server.stop()
    return server.log_path
