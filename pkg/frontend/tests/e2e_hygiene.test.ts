// @vitest-environment happy-dom
//
// Information hygiene against a live server on a game with a hidden place
// ("coin" is visible to P1 only). P2's DOM is scanned at every stage: it must
// never contain the hidden count or the opponent's move for the open chronon.
// The same session also exercises rejoin-with-replay and the stale-button
// late path.

import { WebSocket as NodeWebSocket } from "ws";
import { afterAll, describe, expect, it } from "vitest";
import { GameClient } from "../src/client.js";
import { LATE_BANNER } from "../src/state.js";
import { gameText, readLog, startServer, until, withChronon } from "./harness.js";

(globalThis as any).WebSocket = NodeWebSocket;

function mountRoot(): HTMLElement {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

const text = (root: HTMLElement, sel: string) => root.querySelector(sel)?.textContent ?? "";
const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

// Everything the client shows outside the rules summary. The rules legitimately
// name every place and move (structure is public; counts and choices are not).
function liveText(root: HTMLElement): string {
  const clone = root.cloneNode(true) as HTMLElement;
  clone.querySelector("#pg-rules")?.remove();
  return clone.textContent ?? "";
}

function scanP2(root: HTMLElement): void {
  expect(root.querySelector('.place[data-name="coin"]')).toBeNull();
  const visible = liveText(root);
  expect(visible).not.toContain("coin");
  // P1's moves, by name or label, must never surface in P2's live regions
  for (const leak of ["brag", "stay", "Signal high", "Stay quiet"]) {
    expect(visible).not.toContain(leak);
  }
}

function payoffsInDom(root: HTMLElement, tableId: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const row of root.querySelectorAll<HTMLTableRowElement>(`#${tableId} tr`)) {
    const player = (row.cells[0]?.textContent ?? "").replace(" (you)", "");
    out[player] = row.cells[1]?.textContent ?? "";
  }
  return out;
}

describe("hidden information stays hidden end to end", () => {
  const clients: GameClient[] = [];
  afterAll(() => {
    for (const c of clients) c.close();
  });

  it("P2 never sees the coin; rejoin replays; a stale click lands as noop", async () => {
    const server = await startServer(withChronon(await gameText("hidden_signal"), 350), {
      seed: 5,
    });
    try {
      const rootA = mountRoot();
      const rootB = mountRoot();
      const rootM = mountRoot();
      const a = new GameClient({ url: server.url, root: rootA, seat: "P1" });
      const b = new GameClient({ url: server.url, root: rootB, seat: "P2" });
      const mon = new GameClient({ url: server.url, root: rootM });
      clients.push(a, b, mon);
      a.connect();
      b.connect();
      mon.connect();

      await until(
        "the first chronon",
        () =>
          text(rootA, "#pg-chronon") === "chronon 0 of 3" &&
          text(rootB, "#pg-chronon") === "chronon 0 of 3",
      );
      scanP2(rootB);
      // the rules summary is allowed to explain the asymmetry
      expect(text(rootB, "#pg-rules-body")).toContain("visible only to P1");

      // a latecomer asking for an occupied seat is told so, and the server's
      // hangup must not bury the reason under a generic banner
      const rootD = mountRoot();
      const d = new GameClient({ url: server.url, root: rootD, seat: "P2" });
      clients.push(d);
      d.connect();
      await until("the seat refusal", () => text(rootD, "#pg-banner").includes("is taken"));
      await sleep(100); // let the server-side close land
      expect(text(rootD, "#pg-banner")).toBe("seat 'P2' is taken");
      expect(rootD.querySelector<HTMLElement>("#pg-reconnect")!.hidden).toBe(false);

      // P1 drops; the seat frees; a new connection picks it back up and is
      // caught up from the replayed history
      a.close();
      await sleep(100);
      const rootA2 = mountRoot();
      const a2 = new GameClient({ url: server.url, root: rootA2, seat: "P1" });
      clients.push(a2);
      a2.connect();
      await until("the rejoin", () => text(rootA2, "#pg-meta").includes("you are P1"));
      await until("replayed state", () => /^chronon \d of 3$/.test(text(rootA2, "#pg-chronon")));

      await until("P1's menu", () => text(rootA2, "#pg-chronon") === "chronon 1 of 3");
      const staleButton = rootA2.querySelector<HTMLButtonElement>('button[data-transition="stay"]')!;
      expect(staleButton).not.toBeNull();
      // deliberately sit the chronon out, keeping a handle on the dead button
      scanP2(rootB);

      await until("the next chronon", () => text(rootA2, "#pg-chronon") === "chronon 2 of 3");
      staleButton.click(); // a full chronon too late
      const bannerA2 = rootA2.querySelector<HTMLElement>("#pg-banner")!;
      expect(bannerA2.textContent).toBe(LATE_BANNER);

      await until("P2's menu", () => rootB.querySelectorAll("#pg-actions button").length === 2);
      scanP2(rootB);
      rootB.querySelector<HTMLButtonElement>('button[data-transition="call"]')!.click();
      await until("P2's acceptance", () => text(rootB, "#pg-status").includes("locked in"));

      await until(
        "the end frames",
        () =>
          !rootB.querySelector<HTMLElement>("#pg-payoffs")!.hidden &&
          !rootA2.querySelector<HTMLElement>("#pg-payoffs")!.hidden &&
          !rootM.querySelector<HTMLElement>("#mon-payoffs")!.hidden,
      );
      scanP2(rootB);
      await server.exited;

      // the replay really happened: A2 joined after chronon 0 was announced,
      // so its first round can only have come from the welcome history
      expect(text(rootA2, "#pg-history-list")).toContain("chronon 0:");
      expect(text(rootA2, "#pg-history-list")).toContain("chronon 1: no action (noop)");
      expect(bannerA2.textContent).toBe(LATE_BANNER);

      // P1 sees the coin — the scan would catch it if P2 did
      expect(rootA2.querySelector('.place[data-name="coin"]')).not.toBeNull();

      const log = await readLog(server.logPath);
      const endRec = log.find((r) => r.record === "end")!;
      const round1 = log.find((r) => r.record === "tick" && r.chronon === 1)!;
      const round2 = log.find((r) => r.record === "tick" && r.chronon === 2)!;
      expect(round1.moves).toEqual({}); // the skipped chronon resolved as noop
      expect(round2.moves).toEqual({ P2: "call" });
      // the stale click never left the client
      expect(log.filter((r) => r.record === "action" && r.player === "P1")).toEqual([]);

      expect(payoffsInDom(rootA2, "pg-payoff-table")).toEqual(endRec.payoffs);
      expect(payoffsInDom(rootB, "pg-payoff-table")).toEqual(endRec.payoffs);
      expect(payoffsInDom(rootM, "mon-payoff-table")).toEqual(endRec.payoffs);

      // the monitor, by contrast, is entitled to everything
      expect(rootM.querySelector('#mon-marking tr[data-name="coin"]')).not.toBeNull();
      const monRow1 = rootM.querySelector<HTMLTableRowElement>('#mon-rounds tr[data-chronon="1"]')!;
      expect(monRow1.querySelector('[data-seat="P1"]')!.textContent).toBe("noop");
      const monRow2 = rootM.querySelector<HTMLTableRowElement>('#mon-rounds tr[data-chronon="2"]')!;
      expect(monRow2.querySelector('[data-seat="P2"]')!.textContent).toBe("call");
      expect(monRow2.querySelector('[data-seat="P1"]')!.textContent).toBe("noop");
    } finally {
      server.stop();
    }
  }, 20_000);
});
