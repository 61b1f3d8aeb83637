// Wire protocol (version 1). One JSON object per websocket frame.
// The server is the authority on every field here; the client never
// fabricates state that did not arrive in one of these messages.

export const PROTOCOL_VERSION = 1;

export type Welcome = {
  type: "welcome";
  protocol: number;
  session: string;
  role: "player" | "monitor";
  player: string | null;
  title: string;
  players: string[];
  chronon_ms: number;
  horizon: number;
  rules: string; // canonical rules text, common knowledge
  history: ServerMessage[]; // everything this seat missed (rejoin support)
};

export type Tick = {
  type: "tick";
  chronon: number;
  view: Record<string, number>; // only places visible to the recipient
  deadline_ms: number; // on the server's session clock, not ours
  enabled?: string[]; // players only: own menu for this chronon
  moves?: Record<string, string>; // monitors only: what resolved last chronon
  draws?: Record<string, string>;
};

export type Accepted = { type: "accepted"; chronon: number; transition: string };

export type Rejected = {
  type: "rejected";
  chronon: number;
  transition: string;
  reason: string; // "late" | "duplicate" | "illegal" | "wrong_chronon"
};

export type End = {
  type: "end";
  chronon: number;
  payoffs: Record<string, string>; // exact rationals as strings, e.g. "5/2"
  view: Record<string, number>;
  moves?: Record<string, string>; // monitors only: what resolved the final chronon
  draws?: Record<string, string>;
};

export type ErrorMsg = { type: "error"; message: string };

export type ServerMessage = Welcome | Tick | Accepted | Rejected | End | ErrorMsg;

export type JoinSeat = { type: "join"; player: string };
export type JoinMonitor = { type: "join"; role: "monitor" };
export type Action = { type: "action"; chronon: number; transition: string };
export type ClientMessage = JoinSeat | JoinMonitor | Action;

function isCounts(x: unknown): x is Record<string, number> {
  return (
    typeof x === "object" &&
    x !== null &&
    Object.values(x).every((v) => typeof v === "number")
  );
}

function isNames(x: unknown): x is Record<string, string> {
  return (
    typeof x === "object" &&
    x !== null &&
    Object.values(x).every((v) => typeof v === "string")
  );
}

/** Decode one frame; null for anything that is not a well-formed server message. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  switch (msg.type) {
    case "welcome":
      if (
        typeof msg.session !== "string" ||
        typeof msg.rules !== "string" ||
        !Array.isArray(msg.players) ||
        !Array.isArray(msg.history) ||
        typeof msg.chronon_ms !== "number" ||
        typeof msg.horizon !== "number"
      )
        return null;
      return msg as Welcome;
    case "tick":
      if (typeof msg.chronon !== "number" || typeof msg.deadline_ms !== "number") return null;
      if (!isCounts(msg.view)) return null;
      if (msg.enabled !== undefined && !Array.isArray(msg.enabled)) return null;
      if (msg.moves !== undefined && !isNames(msg.moves)) return null;
      return msg as Tick;
    case "accepted":
      if (typeof msg.chronon !== "number" || typeof msg.transition !== "string") return null;
      return msg as Accepted;
    case "rejected":
      if (
        typeof msg.chronon !== "number" ||
        typeof msg.transition !== "string" ||
        typeof msg.reason !== "string"
      )
        return null;
      return msg as Rejected;
    case "end":
      if (typeof msg.chronon !== "number" || !isNames(msg.payoffs) || !isCounts(msg.view))
        return null;
      return msg as End;
    case "error":
      if (typeof msg.message !== "string") return null;
      return msg as ErrorMsg;
    default:
      return null;
  }
}

// ---------------------------------------------------------------------------
// Rules text. The welcome frame carries the game's canonical description;
// the client reads it to label buttons and to show a rule summary. It is a
// fixed line-oriented format, so a handful of anchored patterns suffice.

export type Arcs = Record<string, number>;

export type PlaceRule = {
  name: string;
  init: number;
  bound: number;
  visibleTo: string[]; // empty = visible to nobody
};

export type MoveRule = {
  name: string;
  owner: string;
  pre: Arcs;
  post: Arcs;
  label: string; // falls back to the name when the rules give no label
};

export type ChanceRule = {
  name: string;
  group: string;
  weight: string;
  pre: Arcs;
  post: Arcs;
  label: string;
};

export type Rules = {
  title: string;
  players: string[];
  chrononMs: number;
  horizon: number;
  places: PlaceRule[];
  moves: MoveRule[];
  chance: ChanceRule[];
  payoffs: Record<string, string>; // raw right-hand sides
  terminal: string | null;
};

const PLACE_RE = /^place (\S+) init (\d+) bound (\d+) visible (\S+)$/;
const MOVE_RE = /^transition (\S+) owner (\S+) pre \{(.*?)\} post \{(.*?)\}(?: label "(.*)")?$/;
const CHANCE_RE = /^chance (\S+) group (\S+) weight (\S+) pre \{(.*?)\} post \{(.*?)\}(?: label "(.*)")?$/;

function parseArcs(body: string): Arcs {
  const arcs: Arcs = {};
  for (const part of body.split(",")) {
    const item = part.trim();
    if (!item) continue;
    const [place, weight] = item.split(":");
    arcs[place.trim()] = Number(weight);
  }
  return arcs;
}

export function parseRules(text: string): Rules {
  const rules: Rules = {
    title: "",
    players: [],
    chrononMs: 0,
    horizon: 0,
    places: [],
    moves: [],
    chance: [],
    payoffs: {},
    terminal: null,
  };
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    let m: RegExpMatchArray | null;
    if ((m = line.match(/^game "(.*)"$/))) rules.title = m[1];
    else if ((m = line.match(/^players (.+)$/))) rules.players = m[1].split(/\s+/);
    else if ((m = line.match(/^time chronon (\d+) horizon (\d+)$/))) {
      rules.chrononMs = Number(m[1]);
      rules.horizon = Number(m[2]);
    } else if ((m = line.match(PLACE_RE))) {
      rules.places.push({
        name: m[1],
        init: Number(m[2]),
        bound: Number(m[3]),
        visibleTo: m[4] === "none" ? [] : m[4].split(","),
      });
    } else if ((m = line.match(MOVE_RE))) {
      rules.moves.push({
        name: m[1],
        owner: m[2],
        pre: parseArcs(m[3]),
        post: parseArcs(m[4]),
        label: m[5] ?? m[1],
      });
    } else if ((m = line.match(CHANCE_RE))) {
      rules.chance.push({
        name: m[1],
        group: m[2],
        weight: m[3],
        pre: parseArcs(m[4]),
        post: parseArcs(m[5]),
        label: m[6] ?? m[1],
      });
    } else if ((m = line.match(/^payoff (\S+) = (.+)$/))) rules.payoffs[m[1]] = m[2];
    else if ((m = line.match(/^terminal = (.+)$/))) rules.terminal = m[1];
  }
  return rules;
}

/** Button text for a transition name. */
export function labelOf(rules: Rules, name: string): string {
  const move = rules.moves.find((t) => t.name === name);
  return move ? move.label : name;
}
