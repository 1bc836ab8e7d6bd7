// Wire protocol: JSON text frames over the /ws WebSocket.

export interface WireParticle {
  m?: number;
  pos: number[];
  vel: number[];
}

export interface WireSpring {
  kind: string;
  i: number;
  j: number;
  rest: number;
  ks: number;
  kd: number;
}

export interface TopologyMsg {
  type: "topology";
  dimension: number;
  particles: WireParticle[];
  springs: WireSpring[];
  faces: number[][];
}

export interface SnapshotMsg {
  type: "snapshot";
  step: number;
  time: number;
  particles: WireParticle[];
  volume_inner: number | null;
  volume_outer: number | null;
  ke: number;
  pe: number;
  max_norm: number;
  collisions: number;
  drag: { active: boolean; anchor: number[]; target: number } | null;
  diverged: boolean;
}

export interface EventMsg {
  type: "event";
  level: string;
  text: string;
}

export type ServerMessage = TopologyMsg | SnapshotMsg | EventMsg;

export type ClientMessage =
  | { type: "drag_start"; x: number; y: number; z?: number }
  | { type: "drag_move"; x: number; y: number; z?: number }
  | { type: "drag_end" }
  | { type: "set_param"; key: string; value: number }
  | { type: "set_integrator"; kind: string }
  | ({ type: "select_body"; kind: string } & Record<string, unknown>);

/** Parse one incoming frame; returns null for anything malformed. */
export function parseServerMessage(text: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as { type?: unknown };
  if (msg.type === "topology" || msg.type === "snapshot" || msg.type === "event") {
    return doc as ServerMessage;
  }
  return null;
}
