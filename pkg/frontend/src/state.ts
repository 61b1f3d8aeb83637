// Session view model. Pure data in, pure data out: every mutation of what
// the user sees goes through applyServer / the submit helpers, so the whole
// lifecycle is testable without a socket or a DOM. The view holds only what
// the server said (plus our own submission bookkeeping) — hidden places and
// other seats' pending actions simply never enter it.

import {
  parseRules,
  Rules,
  ServerMessage,
  Tick,
  Welcome,
} from "./protocol.js";

export type Submission =
  | { status: "open" } // may still act this chronon
  | { status: "sent"; transition: string }
  | { status: "accepted"; transition: string }
  | { status: "rejected"; transition: string; reason: string }
  | { status: "late" }; // window missed; the server records a noop

export type RoundRecord = {
  chronon: number;
  view: Record<string, number>;
  enabled: string[];
  submission: Submission;
  moves?: Record<string, string>; // monitors only, known once resolved
  draws?: Record<string, string>;
};

export type SessionView = {
  role: "player" | "monitor";
  seat: string | null;
  session: string;
  title: string;
  players: string[];
  chrononMs: number;
  horizon: number;
  rules: Rules;
  connected: boolean;
  joined: boolean;
  chronon: number; // currently open chronon, -1 before the first tick
  deadlineMs: number; // server-clock deadline for the open chronon
  places: Record<string, number>;
  enabled: string[];
  submission: Submission;
  banner: string | null;
  rounds: RoundRecord[]; // own past chronons, oldest first
  payoffs: Record<string, string> | null;
  endView: Record<string, number> | null;
  ended: boolean;
};

export const LATE_BANNER = "too late — noop recorded";

export function emptyView(): SessionView {
  return {
    role: "player",
    seat: null,
    session: "",
    title: "",
    players: [],
    chrononMs: 0,
    horizon: 0,
    rules: parseRules(""),
    connected: false,
    joined: false,
    chronon: -1,
    deadlineMs: 0,
    places: {},
    enabled: [],
    submission: { status: "open" },
    banner: null,
    rounds: [],
    payoffs: null,
    endView: null,
    ended: false,
  };
}

function archiveRound(view: SessionView): RoundRecord[] {
  if (view.chronon < 0) return view.rounds;
  return [
    ...view.rounds,
    {
      chronon: view.chronon,
      view: view.places,
      enabled: view.enabled,
      submission: view.submission,
    },
  ];
}

function applyWelcome(view: SessionView, msg: Welcome): SessionView {
  let next: SessionView = {
    ...view,
    role: msg.role,
    seat: msg.player,
    session: msg.session,
    title: msg.title,
    players: msg.players,
    chrononMs: msg.chronon_ms,
    horizon: msg.horizon,
    rules: parseRules(msg.rules),
    joined: true,
    connected: true,
  };
  // A rejoin replays everything the seat already saw, in order.
  for (const past of msg.history) next = applyServer(next, past);
  return next;
}

function applyTick(view: SessionView, msg: Tick): SessionView {
  const rounds = archiveRound(view);
  if (view.role === "monitor" && msg.moves !== undefined && rounds.length > 0) {
    // The tick opening chronon k reports what resolved chronon k-1.
    const last = rounds[rounds.length - 1];
    rounds[rounds.length - 1] = { ...last, moves: msg.moves, draws: msg.draws };
  }
  return {
    ...view,
    chronon: msg.chronon,
    deadlineMs: msg.deadline_ms,
    places: msg.view,
    enabled: msg.enabled ?? [],
    submission: { status: "open" },
    banner: null,
    rounds,
  };
}

export function applyServer(view: SessionView, msg: ServerMessage): SessionView {
  switch (msg.type) {
    case "welcome":
      return applyWelcome(view, msg);
    case "tick":
      return applyTick(view, msg);
    case "accepted":
      return { ...view, submission: { status: "accepted", transition: msg.transition } };
    case "rejected":
      if (msg.reason === "late" || msg.reason === "wrong_chronon") {
        // Either way the click missed its window: this client only ever
        // submits the chronon it is looking at, so a wrong_chronon verdict
        // means the session moved on (or ended) before the action landed.
        return { ...view, submission: { status: "late" }, banner: LATE_BANNER };
      }
      return {
        ...view,
        submission: { status: "rejected", transition: msg.transition, reason: msg.reason },
      };
    case "end": {
      const rounds = archiveRound(view);
      if (view.role === "monitor" && msg.moves !== undefined && rounds.length > 0) {
        const last = rounds[rounds.length - 1];
        rounds[rounds.length - 1] = { ...last, moves: msg.moves, draws: msg.draws };
      }
      return {
        ...view,
        rounds,
        chronon: msg.chronon,
        ended: true,
        payoffs: msg.payoffs,
        endView: msg.view,
        enabled: [],
      };
    }
    case "error":
      return { ...view, banner: msg.message };
  }
}

/** Can the user still submit for the open chronon? (one submission per chronon) */
export function maySubmit(view: SessionView): boolean {
  return (
    view.role === "player" &&
    view.joined &&
    !view.ended &&
    view.chronon >= 0 &&
    view.submission.status === "open"
  );
}

/** Mark a submission in flight. Caller has already checked maySubmit + timing. */
export function noteSent(view: SessionView, transition: string): SessionView {
  return { ...view, submission: { status: "sent", transition } };
}

/** A click that came too late to even send. */
export function noteLate(view: SessionView): SessionView {
  return { ...view, submission: { status: "late" }, banner: LATE_BANNER };
}

export function noteDisconnected(view: SessionView): SessionView {
  if (view.ended) return view; // normal close after the end frame
  // keep a more specific banner (e.g. a join refusal) if one is already up
  return { ...view, connected: false, banner: view.banner ?? "connection lost" };
}
