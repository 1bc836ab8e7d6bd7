// ViewState: everything the renderer needs, fed exclusively by server
// frames. No physics happens here; the client mutates nothing locally.

import { Camera2D, Camera3D } from "./camera.js";
import type { ServerMessage, SnapshotMsg, TopologyMsg } from "./protocol.js";

export interface DragSession {
  active: boolean;
  pointerId: number | null;
  anchorWorld: number[] | null;
}

export class ViewState {
  topology: TopologyMsg | null = null;
  snapshot: SnapshotMsg | null = null;
  camera2d: Camera2D;
  camera3d: Camera3D;
  drag: DragSession = { active: false, pointerId: null, anchorWorld: null };
  params: Record<string, number> = {};
  events: string[] = [];

  constructor(width: number, height: number) {
    this.camera2d = new Camera2D(width, height);
    this.camera3d = new Camera3D(width, height);
  }

  get dimension(): number {
    return this.topology?.dimension ?? 2;
  }

  get is3d(): boolean {
    return this.dimension === 3;
  }

  /** Apply one server frame. Snapshots only ever move forward; a stale
   * frame (lower step after a body rebuild resets to 0) replaces the
   * cache entirely when a new topology arrives. */
  applyServer(msg: ServerMessage): void {
    if (msg.type === "topology") {
      this.topology = msg;
      this.snapshot = null;
    } else if (msg.type === "snapshot") {
      if (this.snapshot === null || msg.step >= this.snapshot.step) {
        this.snapshot = msg;
      }
    } else {
      this.events.push(`${msg.level}: ${msg.text}`);
      if (this.events.length > 20) this.events.shift();
      const ack = /^set (\w+)=(.+)$/.exec(msg.text);
      if (ack) {
        const value = Number(ack[2]);
        if (Number.isFinite(value)) this.params[ack[1]] = value;
      }
    }
  }

  /** Positions to draw: latest snapshot if present, else rest pose. */
  positions(): number[][] | null {
    if (this.snapshot) return this.snapshot.particles.map((p) => p.pos);
    if (this.topology) return this.topology.particles.map((p) => p.pos);
    return null;
  }

  pointerToWorld(px: number, py: number): number[] {
    if (this.is3d) {
      return this.camera3d.pixelToWorldOnViewPlane(px, py);
    }
    const { x, y } = this.camera2d.pixelToWorld(px, py);
    return [x, y];
  }

  project(pos: number[]): { px: number; py: number } {
    if (this.is3d) {
      return this.camera3d.worldToPixel([pos[0], pos[1], pos[2] ?? 0]);
    }
    return this.camera2d.worldToPixel(pos[0], pos[1]);
  }
}
