// Page entry: read the join parameters from the query string, or show a
// small form when they are missing. ?url=ws://host:port&seat=P1 joins a
// seat; ?url=...&role=monitor opens the dashboard.

import { GameClient } from "./client.js";

function boot(root: HTMLElement, url: string, seat: string | undefined): void {
  const client = new GameClient({ url, root, seat });
  client.connect();
}

function joinForm(root: HTMLElement): void {
  root.innerHTML = `
    <h1>Join a session</h1>
    <form id="join-form">
      <label>Server <input name="url" value="ws://127.0.0.1:8765" size="30"></label>
      <label>Seat <input name="seat" placeholder="P1"></label>
      <label><input type="checkbox" name="monitor"> monitor</label>
      <button type="submit">Join</button>
    </form>
  `;
  const form = root.querySelector("#join-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const url = String(data.get("url") || "");
    const monitor = data.get("monitor") !== null;
    const seat = monitor ? undefined : String(data.get("seat") || "");
    if (!url || (!monitor && !seat)) return;
    boot(root, url, seat);
  });
}

export function start(root: HTMLElement, search: string): void {
  const params = new URLSearchParams(search);
  const url = params.get("url");
  if (url === null) {
    joinForm(root);
    return;
  }
  const seat = params.get("role") === "monitor" ? undefined : (params.get("seat") ?? "");
  if (seat === "") {
    joinForm(root);
    return;
  }
  boot(root, url, seat);
}

const appRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot !== null) start(appRoot, window.location.search);
