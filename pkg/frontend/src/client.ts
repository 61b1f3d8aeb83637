// Socket-to-DOM glue. All game state lives in the SessionView and changes
// only through the reducers in state.ts; this class owns the connection,
// the clock mapping, and when to repaint.

import { Countdown, ServerClock } from "./clock.js";
import { mountMonitorUI, MonitorUI } from "./monitor.js";
import { Action, JoinMonitor, JoinSeat, parseServerMessage } from "./protocol.js";
import {
  applyServer,
  emptyView,
  maySubmit,
  noteDisconnected,
  noteLate,
  noteSent,
  SessionView,
} from "./state.js";
import { mountPlayerUI, PlayerUI } from "./ui.js";

export type ClientOptions = {
  url: string;
  root: HTMLElement;
  seat?: string; // omit to join as monitor
  now?: () => number;
};

const LOG_TAIL = 50;

export class GameClient {
  view: SessionView;
  private clock = new ServerClock();
  private countdown: Countdown;
  private ui: PlayerUI | null = null;
  private monitorUi: MonitorUI | null = null;
  private ws: WebSocket | null = null;
  private logTail: string[] = [];
  private readonly now: () => number;

  constructor(private opts: ClientOptions) {
    this.now = opts.now ?? Date.now;
    this.view = emptyView();
    if (opts.seat === undefined) {
      this.monitorUi = mountMonitorUI(opts.root);
      this.countdown = new Countdown(this.monitorUi.countdownEl, this.clock, this.now);
    } else {
      this.ui = mountPlayerUI(opts.root, {
        onSubmit: (chronon, transition) => this.submit(chronon, transition),
        onReconnect: () => this.connect(),
      });
      this.countdown = new Countdown(this.ui.countdownEl, this.clock, this.now);
    }
    this.render();
  }

  connect(): void {
    const ws = new WebSocket(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      const join: JoinSeat | JoinMonitor =
        this.opts.seat === undefined
          ? { type: "join", role: "monitor" }
          : { type: "join", player: this.opts.seat };
      ws.send(JSON.stringify(join));
      this.view = { ...this.view, connected: true, banner: null };
      this.render();
    };
    ws.onmessage = (event) => {
      const raw = typeof event.data === "string" ? event.data : String(event.data);
      this.handleFrame(raw);
    };
    ws.onclose = () => {
      if (this.ws !== ws) return; // superseded by a reconnect
      this.view = noteDisconnected(this.view);
      this.render();
    };
    ws.onerror = () => {
      if (this.ws !== ws) return;
      this.view = noteDisconnected(this.view);
      this.render();
    };
  }

  /** From a click on an action button stamped with the chronon it was offered for. */
  submit(chronon: number, transition: string): void {
    if (!maySubmit(this.view)) return;
    const stale = chronon !== this.view.chronon;
    const expired =
      this.clock.synced() &&
      (this.clock.remainingMs(this.view.deadlineMs, this.now()) ?? 1) <= 0;
    if (stale || expired) {
      // Nothing is sent: the server would only tell us the same thing.
      this.view = noteLate(this.view);
      this.render();
      return;
    }
    const action: Action = { type: "action", chronon, transition };
    this.ws?.send(JSON.stringify(action));
    this.view = noteSent(this.view, transition);
    this.render();
  }

  private handleFrame(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) return; // not ours to interpret
    if (msg.type === "tick") {
      // deadline - chronon_ms is the instant the server opened the chronon,
      // i.e. approximately "now" on its clock when the frame was sent.
      const chrononMs = this.view.chrononMs || 0;
      if (chrononMs > 0) this.clock.sync(msg.deadline_ms - chrononMs, this.now());
    }
    this.logTail.push(raw);
    if (this.logTail.length > LOG_TAIL) this.logTail.shift();
    this.view = applyServer(this.view, msg);
    this.render();
  }

  private render(): void {
    if (this.ui !== null) this.ui.render(this.view);
    if (this.monitorUi !== null) this.monitorUi.render(this.view, this.logTail);
    if (this.view.ended || this.view.chronon < 0) this.countdown.show(null);
    else this.countdown.show(this.view.deadlineMs);
  }

  close(): void {
    this.countdown.stop();
    const ws = this.ws;
    this.ws = null; // silence the close handler; this is deliberate
    ws?.close();
  }
}
