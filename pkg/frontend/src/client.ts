// Socket wiring and input mapping. The socket is injected as a narrow
// interface so the harness can drive the client without a browser.

import type { ClientMessage } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";
import type { ViewState } from "./state.js";

export interface SocketLike {
  send(data: string): void;
}

export class ViewerClient {
  constructor(
    public state: ViewState,
    private socket: SocketLike,
  ) {}

  /** Feed one raw frame from the socket into the view state. */
  onFrame(text: string): void {
    const msg = parseServerMessage(text);
    if (msg) this.state.applyServer(msg);
  }

  private sendMsg(msg: ClientMessage): void {
    this.socket.send(JSON.stringify(msg));
  }

  private dragMsg(kind: "drag_start" | "drag_move", world: number[]): ClientMessage {
    const msg: ClientMessage = { type: kind, x: world[0], y: world[1] };
    if (this.state.is3d) (msg as { z?: number }).z = world[2];
    return msg;
  }

  pointerDown(px: number, py: number, pointerId = 0): void {
    const world = this.state.pointerToWorld(px, py);
    this.state.drag = { active: true, pointerId, anchorWorld: world };
    this.sendMsg(this.dragMsg("drag_start", world));
  }

  pointerMove(px: number, py: number, pointerId = 0): void {
    if (!this.state.drag.active || this.state.drag.pointerId !== pointerId) return;
    const world = this.state.pointerToWorld(px, py);
    this.state.drag.anchorWorld = world;
    this.sendMsg(this.dragMsg("drag_move", world));
  }

  pointerUp(pointerId = 0): void {
    if (!this.state.drag.active || this.state.drag.pointerId !== pointerId) return;
    this.state.drag = { active: false, pointerId: null, anchorWorld: null };
    this.sendMsg({ type: "drag_end" });
  }

  setParam(key: string, value: number): void {
    this.sendMsg({ type: "set_param", key, value });
  }

  setIntegrator(kind: string): void {
    this.sendMsg({ type: "set_integrator", kind });
  }

  selectBody(kind: string, params: Record<string, unknown> = {}): void {
    this.sendMsg({ type: "select_body", kind, ...params });
  }
}
