/**
 * Dashboard state and its reducer. The server is the source of truth;
 * every transition here mirrors a message it sent. The reducer is pure
 * so the whole flow is testable without a DOM or a socket.
 */

import { ServerMessage } from "./protocol.js";

export type EntryStatus = "pending" | "allowed" | "denied";

export interface EntryCard {
  id: string;
  ts: number;
  imageB64: string;
  status: EntryStatus;
  decidedBy?: string;
}

export interface FeedLine {
  at: number;
  text: string;
}

export interface DashboardState {
  connected: boolean;
  peer: string | null;
  devices: Record<string, { kind: string; state: string }>;
  entries: EntryCard[];
  feed: FeedLine[];
}

export const FEED_LIMIT = 200;

export function initialState(): DashboardState {
  return { connected: false, peer: null, devices: {}, entries: [], feed: [] };
}

function pushFeed(state: DashboardState, text: string, at: number): DashboardState {
  const feed = [...state.feed, { at, text }];
  if (feed.length > FEED_LIMIT) feed.splice(0, feed.length - FEED_LIMIT);
  return { ...state, feed };
}

function settleEntry(state: DashboardState, id: string, allow: boolean,
                     decidedBy: string | undefined): DashboardState {
  const entries = state.entries.map((card) =>
    card.id === id
      ? { ...card, status: (allow ? "allowed" : "denied") as EntryStatus,
          decidedBy }
      : card);
  return { ...state, entries };
}

export function apply(state: DashboardState, msg: ServerMessage,
                      now: number = Date.now()): DashboardState {
  switch (msg.type) {
    case "hello": {
      const entries = msg.pending.map((p) => ({
        id: p.id, ts: p.ts, imageB64: p.image_b64, status: "pending" as EntryStatus,
      }));
      return {
        ...state,
        peer: msg.peer,
        devices: { ...msg.devices },
        entries,
      };
    }

    case "device_state": {
      const devices = {
        ...state.devices,
        [msg.device_id]: { kind: msg.kind, state: msg.state },
      };
      const next = { ...state, devices };
      return msg.changed
        ? pushFeed(next, `${msg.device_id} -> ${msg.state}`, now)
        : next;
    }

    case "entry_request": {
      if (state.entries.some((card) => card.id === msg.id)) return state;
      const card: EntryCard = {
        id: msg.id, ts: msg.ts, imageB64: msg.image_b64, status: "pending",
      };
      return pushFeed({ ...state, entries: [...state.entries, card] },
                      `entry request ${msg.id}`, now);
    }

    case "entry_decision":
      return pushFeed(
        settleEntry(state, msg.id, msg.allow, msg.decided_by),
        `entry ${msg.id}: ${msg.allow ? "allowed" : "denied"} by ${msg.decided_by}`,
        now);

    case "ack": {
      // Our own decision comes back as an ack carrying the standing
      // result, so a losing race still converges on the winner's call.
      if (msg.of === "entry_decision" && msg.id !== undefined
          && typeof msg.allow === "boolean") {
        let next = settleEntry(state, msg.id, msg.allow, msg.decided_by);
        if (msg.outcome === "stale-decision") {
          next = pushFeed(next, `entry ${msg.id}: decision already made`, now);
        }
        return next;
      }
      return state;
    }

    case "motion_alert":
      return pushFeed(state,
        `motion: ${msg.changed} pixels${msg.frame !== undefined ? ` (frame ${msg.frame})` : ""}`,
        now);

    case "gesture_event":
      return pushFeed(state,
        `gesture ${msg.g}${msg.frame !== undefined ? ` (frame ${msg.frame})` : ""}`,
        now);

    case "error":
      return pushFeed(state, `error ${msg.code}: ${msg.detail}`, now);

    default:
      return state;
  }
}

export function setConnected(state: DashboardState, connected: boolean): DashboardState {
  if (state.connected === connected) return state;
  return { ...state, connected };
}
