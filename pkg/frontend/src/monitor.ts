// Read-only dashboard: full marking, per-chronon submission outcomes, the
// chance draws, and a tail of raw frames. Strictly display — it never sends
// anything after the join.

import { SessionView } from "./state.js";

export type MonitorUI = {
  render: (view: SessionView, logTail: string[]) => void;
  countdownEl: HTMLElement;
};

const SKELETON = `
  <header>
    <h1 id="mon-title"></h1>
    <div id="mon-meta"></div>
  </header>
  <section id="mon-round">
    <span id="mon-chronon"></span>
    <span id="mon-countdown" class="countdown"></span>
  </section>
  <section>
    <h2>Marking</h2>
    <table id="mon-marking"></table>
  </section>
  <section>
    <h2>Chronons</h2>
    <table id="mon-rounds"></table>
  </section>
  <section id="mon-payoffs" hidden>
    <h2>Final payoffs</h2>
    <table id="mon-payoff-table"></table>
  </section>
  <section>
    <h2>Log tail</h2>
    <pre id="mon-log"></pre>
  </section>
`;

export function mountMonitorUI(root: HTMLElement): MonitorUI {
  root.innerHTML = SKELETON;
  const q = <T extends HTMLElement>(id: string) => root.querySelector(`#${id}`) as T;

  function render(view: SessionView, logTail: string[]): void {
    q<HTMLHeadingElement>("mon-title").textContent = view.title + " — monitor";
    q<HTMLDivElement>("mon-meta").textContent = view.session
      ? `session ${view.session}`
      : "connecting…";
    q<HTMLSpanElement>("mon-chronon").textContent = view.ended
      ? "ended"
      : view.chronon < 0
        ? "waiting for the game to start"
        : `chronon ${view.chronon} of ${view.horizon}`;

    const marking = q<HTMLTableElement>("mon-marking");
    marking.textContent = "";
    const counts = view.ended && view.endView ? view.endView : view.places;
    for (const [place, count] of Object.entries(counts)) {
      const row = marking.insertRow();
      row.dataset.name = place;
      row.insertCell().textContent = place;
      row.insertCell().textContent = String(count);
    }

    // One row per chronon; a seat's cell is "pending" until the tick that
    // resolves the chronon reveals the move (absence = noop).
    const rounds = q<HTMLTableElement>("mon-rounds");
    rounds.textContent = "";
    const head = rounds.insertRow();
    head.insertCell().textContent = "#";
    for (const player of view.players) head.insertCell().textContent = player;
    head.insertCell().textContent = "draws";
    const addRow = (
      chronon: number,
      moves: Record<string, string> | undefined,
      draws: Record<string, string> | undefined,
      open: boolean,
    ) => {
      const row = rounds.insertRow();
      row.dataset.chronon = String(chronon);
      row.insertCell().textContent = String(chronon);
      for (const player of view.players) {
        const cell = row.insertCell();
        cell.dataset.seat = player;
        cell.textContent = open ? "pending" : (moves?.[player] ?? "noop");
      }
      row.insertCell().textContent = draws
        ? Object.entries(draws).map(([g, t]) => `${g}→${t}`).join(" ")
        : "";
    };
    for (const past of view.rounds) addRow(past.chronon, past.moves, past.draws, past.moves === undefined);
    if (!view.ended && view.chronon >= 0) addRow(view.chronon, undefined, undefined, true);

    q<HTMLElement>("mon-payoffs").hidden = !view.ended;
    if (view.ended && view.payoffs) {
      const table = q<HTMLTableElement>("mon-payoff-table");
      table.textContent = "";
      for (const [player, value] of Object.entries(view.payoffs)) {
        const row = table.insertRow();
        row.insertCell().textContent = player;
        row.insertCell().textContent = value;
      }
    }

    q<HTMLPreElement>("mon-log").textContent = logTail.join("\n");
  }

  return { render, countdownEl: q<HTMLSpanElement>("mon-countdown") };
}
