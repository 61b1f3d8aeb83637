// DOM for the player view. One static skeleton, re-filled on every state
// change; nothing here is game-specific — panels and buttons are generated
// from the rules text and the current tick, so one page serves any game.

import { labelOf, Rules } from "./protocol.js";
import { maySubmit, SessionView, Submission } from "./state.js";

export type PlayerHandlers = {
  onSubmit: (chronon: number, transition: string) => void;
  onReconnect: () => void;
};

export type PlayerUI = {
  render: (view: SessionView) => void;
  countdownEl: HTMLElement;
};

const SKELETON = `
  <header>
    <h1 id="pg-title"></h1>
    <div id="pg-meta"></div>
  </header>
  <div id="pg-banner" class="banner" role="alert" hidden></div>
  <section id="pg-round">
    <span id="pg-chronon"></span>
    <span id="pg-countdown" class="countdown"></span>
  </section>
  <section id="pg-actions" class="actions"></section>
  <div id="pg-status"></div>
  <section id="pg-places">
    <h2>Visible places</h2>
    <div id="pg-place-list" class="places"></div>
  </section>
  <section id="pg-payoffs" hidden>
    <h2>Final payoffs</h2>
    <table id="pg-payoff-table"></table>
  </section>
  <section id="pg-history">
    <h2>Your chronons</h2>
    <ol id="pg-history-list"></ol>
  </section>
  <details id="pg-rules">
    <summary>Rules</summary>
    <div id="pg-rules-body"></div>
  </details>
  <button id="pg-reconnect" hidden>Reconnect</button>
`;

function el<T extends HTMLElement>(root: HTMLElement, id: string): T {
  return root.querySelector(`#${id}`) as T;
}

function statusLine(rules: Rules, sub: Submission): string {
  switch (sub.status) {
    case "open":
      return "";
    case "sent":
      return `submitting ${labelOf(rules, sub.transition)}…`;
    case "accepted":
      return `✓ ${labelOf(rules, sub.transition)} locked in`;
    case "rejected":
      return `rejected (${sub.reason})`;
    case "late":
      return ""; // the banner already says it
  }
}

function renderPlaces(container: HTMLElement, counts: Record<string, number>): void {
  container.textContent = "";
  for (const [name, count] of Object.entries(counts)) {
    const item = document.createElement("div");
    item.className = "place";
    item.dataset.name = name;
    const label = document.createElement("span");
    label.className = "name";
    label.textContent = name;
    const value = document.createElement("span");
    value.className = "count";
    value.textContent = String(count);
    item.append(label, ": ", value);
    container.appendChild(item);
  }
}

function renderRules(container: HTMLElement, rules: Rules): void {
  container.textContent = "";
  const add = (text: string, tag = "div") => {
    const node = document.createElement(tag);
    node.textContent = text;
    container.appendChild(node);
  };
  add(`Players: ${rules.players.join(", ")}`);
  add(`Each chronon lasts ${rules.chrononMs} ms; the game runs at most ${rules.horizon} chronons.`);
  for (const player of rules.players) {
    const own = rules.moves.filter((t) => t.owner === player);
    if (own.length === 0) continue;
    add(`${player} can play:`);
    for (const t of own) {
      const pre = Object.entries(t.pre).map(([p, w]) => `${p}×${w}`).join(", ") || "nothing";
      const post = Object.entries(t.post).map(([p, w]) => `${p}×${w}`).join(", ") || "nothing";
      add(`• ${t.label} — consumes ${pre}; produces ${post}`, "div");
    }
  }
  const groups = [...new Set(rules.chance.map((c) => c.group))];
  for (const group of groups) {
    const members = rules.chance.filter((c) => c.group === group);
    add(
      `Chance "${group}" each chronon: ` +
        members.map((c) => `${c.label} (${c.weight})`).join(" / "),
    );
  }
  for (const [player, expr] of Object.entries(rules.payoffs)) add(`Payoff ${player} = ${expr}`);
  if (rules.terminal) add(`The game ends early when ${rules.terminal}`);
  const hidden = rules.places.filter((p) => p.visibleTo.length < rules.players.length);
  for (const p of hidden) {
    add(
      p.visibleTo.length === 0
        ? `Place ${p.name} is hidden from everyone.`
        : `Place ${p.name} is visible only to ${p.visibleTo.join(", ")}.`,
    );
  }
}

export function mountPlayerUI(root: HTMLElement, handlers: PlayerHandlers): PlayerUI {
  root.innerHTML = SKELETON;
  const banner = el<HTMLDivElement>(root, "pg-banner");
  const chronon = el<HTMLSpanElement>(root, "pg-chronon");
  const actions = el<HTMLElement>(root, "pg-actions");
  const status = el<HTMLDivElement>(root, "pg-status");
  const placeList = el<HTMLDivElement>(root, "pg-place-list");
  const payoffs = el<HTMLElement>(root, "pg-payoffs");
  const payoffTable = el<HTMLTableElement>(root, "pg-payoff-table");
  const historyList = el<HTMLOListElement>(root, "pg-history-list");
  const rulesBody = el<HTMLDivElement>(root, "pg-rules-body");
  const reconnect = el<HTMLButtonElement>(root, "pg-reconnect");
  reconnect.addEventListener("click", () => handlers.onReconnect());

  let rulesRenderedFor = "";

  function render(view: SessionView): void {
    el<HTMLHeadingElement>(root, "pg-title").textContent = view.title;
    el<HTMLDivElement>(root, "pg-meta").textContent = view.joined
      ? `session ${view.session} — you are ${view.seat}`
      : "connecting…";

    banner.hidden = view.banner === null;
    banner.textContent = view.banner ?? "";

    if (view.ended) chronon.textContent = `ended after chronon ${view.chronon - 1}`;
    else if (view.chronon < 0) chronon.textContent = "waiting for the game to start";
    else chronon.textContent = `chronon ${view.chronon} of ${view.horizon}`;

    // Buttons exist only for currently enabled moves: an action the server
    // did not offer cannot be clicked, so no illegal submission can start here.
    actions.textContent = "";
    if (!view.ended) {
      const locked = !maySubmit(view);
      for (const name of view.enabled) {
        const button = document.createElement("button");
        button.textContent = labelOf(view.rules, name);
        button.dataset.transition = name;
        button.dataset.chronon = String(view.chronon);
        button.disabled = locked;
        const stamped = view.chronon; // the chronon this button was offered for
        button.addEventListener("click", () => handlers.onSubmit(stamped, name));
        actions.appendChild(button);
      }
      if (view.chronon >= 0 && view.enabled.length === 0) {
        const note = document.createElement("em");
        note.textContent = "no moves available this chronon";
        actions.appendChild(note);
      }
    }

    status.textContent = statusLine(view.rules, view.submission);
    renderPlaces(placeList, view.ended && view.endView ? view.endView : view.places);

    payoffs.hidden = !view.ended;
    if (view.ended && view.payoffs) {
      payoffTable.textContent = "";
      for (const [player, value] of Object.entries(view.payoffs)) {
        const row = payoffTable.insertRow();
        row.insertCell().textContent = player + (player === view.seat ? " (you)" : "");
        const cell = row.insertCell();
        cell.className = "payoff";
        cell.textContent = value;
      }
    }

    historyList.textContent = "";
    for (const round of view.rounds) {
      const item = document.createElement("li");
      const acted =
        round.submission.status === "accepted"
          ? `played ${labelOf(view.rules, round.submission.transition)}`
          : "no action (noop)";
      const seen = Object.entries(round.view)
        .map(([p, n]) => `${p}=${n}`)
        .join(" ");
      item.textContent = `chronon ${round.chronon}: ${acted} — saw ${seen}`;
      historyList.appendChild(item);
    }

    if (view.rules.title && rulesRenderedFor !== view.session) {
      renderRules(rulesBody, view.rules);
      rulesRenderedFor = view.session;
    }

    reconnect.hidden = view.connected || view.ended;
  }

  return { render, countdownEl: el<HTMLSpanElement>(root, "pg-countdown") };
}
