// Headless protocol harness against the real Python service: connect,
// expect topology then snapshots, and verify a scripted drag pulls the
// targeted particle toward the anchor across ten frames.

import { spawn, type ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { ViewerClient } from "../src/client.js";
import type { ServerMessage, SnapshotMsg, TopologyMsg } from "../src/protocol.js";
import { parseServerMessage } from "../src/protocol.js";
import { ViewState } from "../src/state.js";

let server: ChildProcess;
let port: number;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (typeof address === "object" && address) {
        const p = address.port;
        srv.close(() => resolve(p));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitHealthy(p: number, timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`http://127.0.0.1:${p}/health`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("service never became healthy");
}

beforeAll(async () => {
  port = await freePort();
  server = spawn("python3", ["-m", "squish.cli", "serve", "--port", String(port), "--fps", "60"], {
    cwd: new URL("../..", import.meta.url).pathname,
    stdio: "ignore",
  });
  await waitHealthy(port);
});

afterAll(() => {
  server?.kill("SIGTERM");
});

interface Harness {
  ws: WebSocket;
  state: ViewState;
  client: ViewerClient;
  next(predicate: (m: ServerMessage) => boolean, timeoutMs?: number): Promise<ServerMessage>;
  close(): void;
}

async function connect(): Promise<Harness> {
  const ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
  const state = new ViewState(900, 640);
  const client = new ViewerClient(state, { send: (d) => ws.send(d) });
  const backlog: ServerMessage[] = [];
  const waiters: Array<{ predicate: (m: ServerMessage) => boolean; resolve: (m: ServerMessage) => void }> = [];
  ws.on("message", (data) => {
    const msg = parseServerMessage(String(data));
    if (!msg) return;
    client.onFrame(String(data));
    for (let k = 0; k < waiters.length; k++) {
      if (waiters[k].predicate(msg)) {
        waiters.splice(k, 1)[0].resolve(msg);
        return;
      }
    }
    backlog.push(msg);
    if (backlog.length > 500) backlog.shift();
  });
  await new Promise<void>((resolve, reject) => {
    ws.once("open", () => resolve());
    ws.once("error", reject);
  });
  return {
    ws,
    state,
    client,
    next(predicate, timeoutMs = 10000) {
      const got = backlog.find(predicate);
      if (got) {
        backlog.splice(backlog.indexOf(got), 1);
        return Promise.resolve(got);
      }
      return new Promise((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("timed out waiting for frame")), timeoutMs);
        waiters.push({
          predicate,
          resolve: (m) => {
            clearTimeout(timer);
            resolve(m);
          },
        });
      });
    },
    close() {
      ws.close();
    },
  };
}

describe("protocol harness", () => {
  it("receives topology first, then snapshots", async () => {
    const ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
    const order: string[] = [];
    await new Promise<void>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("no frames")), 10000);
      ws.on("message", (data) => {
        const msg = parseServerMessage(String(data));
        if (!msg) return;
        order.push(msg.type);
        if (order.length >= 4) {
          clearTimeout(timer);
          resolve();
        }
      });
      ws.once("error", reject);
    });
    ws.close();
    expect(order[0]).toBe("topology");
    expect(order.slice(1)).toContain("snapshot");
    const steps = order.filter((t) => t === "snapshot");
    expect(steps.length).toBeGreaterThanOrEqual(1);
  });

  it("a scripted drag displaces the target toward the anchor over 10 frames", async () => {
    const h = await connect();
    try {
      await h.next((m) => m.type === "topology");
      // Freeze forces, then rebuild so the body starts at rest.
      h.client.setParam("g", 0);
      await h.next((m) => m.type === "event" && m.text.includes("set g"));
      h.client.setParam("pressure_nrt", 0);
      await h.next((m) => m.type === "event" && m.text.includes("pressure_nrt"));
      h.client.selectBody("ring2d", { kind: "ring2d", n: 12 });
      const topo = (await h.next(
        (m) => m.type === "topology" && m.particles.length === 24,
      )) as TopologyMsg;
      h.state.applyServer(topo);

      // Top outer particle, dragged 3 world units straight up through
      // the pointer pipeline (pixel coords -> world -> protocol).
      const target = 12 + 3;
      const pos = topo.particles[target].pos;
      const at = h.state.project(pos);
      const up = h.state.project([pos[0], pos[1] + 3.0]);
      h.client.pointerDown(at.px, at.py);
      h.client.pointerMove(up.px, up.py);

      const engaged = (await h.next(
        (m) => m.type === "snapshot" && m.drag !== null,
      )) as SnapshotMsg;
      const ys = [engaged.particles[target].pos[1]];
      let lastStep = engaged.step;
      while (ys.length < 10) {
        const snap = (await h.next(
          (m) => m.type === "snapshot" && m.step > lastStep,
        )) as SnapshotMsg;
        lastStep = snap.step;
        ys.push(snap.particles[target].pos[1]);
      }
      const anchorY = pos[1] + 3.0;
      expect(Math.abs(anchorY - ys[ys.length - 1])).toBeLessThan(Math.abs(anchorY - ys[0]));
      expect(ys[ys.length - 1]).toBeGreaterThan(ys[0]);
      h.client.pointerUp();
    } finally {
      h.close();
    }
  });

  it("rejects an out-of-bounds parameter with an event frame", async () => {
    const h = await connect();
    try {
      await h.next((m) => m.type === "topology");
      h.client.setParam("ks", -5);
      const evt = await h.next((m) => m.type === "event" && m.text.includes("rejected"));
      expect(evt.type).toBe("event");
    } finally {
      h.close();
    }
  });
});
