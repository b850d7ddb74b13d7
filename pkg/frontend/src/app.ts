/**
 * DOM wiring. One way in (server messages -> reducer -> state) and one
 * way out (button clicks -> protocol messages). Rendering rebuilds each
 * section from state, which keeps it boring and obviously consistent.
 */

import { base64ToBytes, decodeNetpbm } from "./netpbm.js";
import {
  commandMessage,
  decisionMessage,
  helloMessage,
  parseMessage,
} from "./protocol.js";
import {
  apply,
  DashboardState,
  initialState,
  setConnected,
} from "./state.js";
import { Transport } from "./transport.js";

export interface App {
  root: HTMLElement;
  getState(): DashboardState;
}

export function createApp(doc: Document, transport: Transport,
                          mount?: HTMLElement): App {
  let state = initialState();

  const root = mount ?? doc.createElement("main");
  root.classList.add("dashboard");
  if (!mount) doc.body.appendChild(root);

  const status = section(doc, root, "status");
  const devices = section(doc, root, "devices", "Devices");
  const entries = section(doc, root, "entries", "Entry requests");
  const feed = section(doc, root, "feed", "Activity");

  function update(next: DashboardState) {
    state = next;
    render();
  }

  transport.onStatus((connected) => {
    update(setConnected(state, connected));
    if (connected) transport.send(helloMessage());
  });

  transport.onMessage((raw) => {
    const msg = parseMessage(raw);
    if (msg) update(apply(state, msg));
  });

  function render() {
    status.textContent = state.connected
      ? `connected${state.peer ? ` as ${state.peer}` : ""}`
      : "disconnected";
    status.className = state.connected ? "status online" : "status offline";
    renderDevices();
    renderEntries();
    renderFeed();
  }

  function renderDevices() {
    clearItems(devices);
    for (const [id, info] of Object.entries(state.devices).sort()) {
      const tile = doc.createElement("div");
      tile.className = `device ${info.state}`;
      tile.dataset.device = id;

      const label = doc.createElement("span");
      label.textContent = `${id} (${info.kind}): ${info.state}`;
      tile.appendChild(label);

      if (info.kind !== "door") {
        // the door only moves through entry decisions
        const next = info.state === "on" ? "off" : "on";
        const button = doc.createElement("button");
        button.textContent = `turn ${next}`;
        button.dataset.action = next;
        button.addEventListener("click", () =>
          transport.send(commandMessage(id, next)));
        tile.appendChild(button);
      }
      devices.appendChild(tile);
    }
  }

  function renderEntries() {
    clearItems(entries);
    for (const card of [...state.entries].reverse()) {
      const el = doc.createElement("div");
      el.className = `entry ${card.status}`;
      el.dataset.entry = card.id;

      el.appendChild(snapshot(doc, card.imageB64));

      const caption = doc.createElement("span");
      caption.textContent = card.status === "pending"
        ? `${card.id}: waiting`
        : `${card.id}: ${card.status}${card.decidedBy ? ` by ${card.decidedBy}` : ""}`;
      el.appendChild(caption);

      if (card.status === "pending") {
        for (const allow of [true, false]) {
          const button = doc.createElement("button");
          button.textContent = allow ? "Allow" : "Deny";
          button.dataset.decision = allow ? "allow" : "deny";
          button.addEventListener("click", () =>
            transport.send(decisionMessage(card.id, allow)));
          el.appendChild(button);
        }
      }
      entries.appendChild(el);
    }
  }

  function renderFeed() {
    clearItems(feed);
    const list = doc.createElement("ul");
    for (const line of state.feed.slice(-30)) {
      const item = doc.createElement("li");
      item.textContent = line.text;
      list.appendChild(item);
    }
    feed.appendChild(list);
  }

  render();
  return { root, getState: () => state };
}

function section(doc: Document, root: HTMLElement, name: string,
                 title?: string): HTMLElement {
  const el = doc.createElement("section");
  el.className = name;
  if (title) {
    const heading = doc.createElement("h2");
    heading.textContent = title;
    el.appendChild(heading);
  }
  root.appendChild(el);
  return el;
}

function clearItems(sectionEl: HTMLElement) {
  for (const child of [...sectionEl.children]) {
    if (child.tagName !== "H2") child.remove();
  }
}

/** Decode the doorbell snapshot onto a canvas; broken images degrade to text. */
function snapshot(doc: Document, imageB64: string): HTMLElement {
  try {
    const image = decodeNetpbm(base64ToBytes(imageB64));
    const canvas = doc.createElement("canvas");
    canvas.width = image.width;
    canvas.height = image.height;
    canvas.className = "snapshot";
    const ctx = canvas.getContext && canvas.getContext("2d");
    if (ctx) {
      try {
        const pixels = new Uint8ClampedArray(image.rgba);
        ctx.putImageData(new ImageData(pixels, image.width, image.height), 0, 0);
      } catch {
        // headless DOMs stub the 2d context; the sized canvas still renders
      }
    }
    return canvas;
  } catch {
    const broken = doc.createElement("span");
    broken.className = "snapshot broken";
    broken.textContent = "(image unreadable)";
    return broken;
  }
}
