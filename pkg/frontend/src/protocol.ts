/**
 * Message shapes for the line-JSON control protocol, as seen from a
 * dashboard client. Everything arrives over one WebSocket; the bridge
 * relays frames to the TCP bus unchanged.
 */

export interface DeviceSnapshot {
  kind: string;
  state: string;
}

export interface HelloReply {
  type: "hello";
  role: string;
  peer: string;
  devices: Record<string, DeviceSnapshot>;
  pending: PendingEntry[];
}

export interface PendingEntry {
  id: string;
  image_b64: string;
  ts: number;
}

export interface DeviceState {
  type: "device_state";
  device_id: string;
  kind: string;
  state: string;
  changed: boolean;
}

export interface EntryRequest {
  type: "entry_request";
  id: string;
  image_b64: string;
  ts: number;
}

export interface EntryDecision {
  type: "entry_decision";
  id: string;
  allow: boolean;
  decided_by: string;
}

export interface Ack {
  type: "ack";
  of: string;
  id?: string;
  status?: string;
  outcome?: string;
  allow?: boolean;
  decided_by?: string;
}

export interface MotionAlert {
  type: "motion_alert";
  changed: number;
  frame?: number;
}

export interface GestureEvent {
  type: "gesture_event";
  g: number;
  frame?: number;
}

export interface WireError {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage =
  | HelloReply
  | DeviceState
  | EntryRequest
  | EntryDecision
  | Ack
  | MotionAlert
  | GestureEvent
  | WireError;

const has = (obj: Record<string, unknown>, key: string, kind: string) =>
  typeof obj[key] === kind;

/** Narrow a decoded JSON value to a known server message, or null. */
export function parseMessage(raw: unknown): ServerMessage | null {
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "hello":
      if (has(msg, "peer", "string") && typeof msg.devices === "object"
          && Array.isArray(msg.pending)) {
        return msg as unknown as HelloReply;
      }
      return null;
    case "device_state":
      if (has(msg, "device_id", "string") && has(msg, "state", "string")) {
        return msg as unknown as DeviceState;
      }
      return null;
    case "entry_request":
      if (has(msg, "id", "string") && has(msg, "image_b64", "string")
          && has(msg, "ts", "number")) {
        return msg as unknown as EntryRequest;
      }
      return null;
    case "entry_decision":
      if (has(msg, "id", "string") && has(msg, "allow", "boolean")) {
        return msg as unknown as EntryDecision;
      }
      return null;
    case "ack":
      if (has(msg, "of", "string")) return msg as unknown as Ack;
      return null;
    case "motion_alert":
      if (has(msg, "changed", "number")) return msg as unknown as MotionAlert;
      return null;
    case "gesture_event":
      if (has(msg, "g", "number")) return msg as unknown as GestureEvent;
      return null;
    case "error":
      if (has(msg, "code", "string")) return msg as unknown as WireError;
      return null;
    default:
      return null;
  }
}

export const helloMessage = () => ({ type: "hello", role: "dashboard" });

export const commandMessage = (deviceId: string, action: string) => ({
  type: "device_command",
  device_id: deviceId,
  action,
});

export const decisionMessage = (id: string, allow: boolean) => ({
  type: "entry_decision",
  id,
  allow,
});
