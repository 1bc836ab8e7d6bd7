// Shared wire-document builders matching the server's export schema.

import type { SnapshotMsg, TopologyMsg, WireSpring } from "../src/protocol.js";

/** Two-layer ring export document, the same schema the server emits. */
export function ringTopology(n: number): TopologyMsg {
  const particles = [];
  for (const radius of [1.5, 2.0]) {
    for (let i = 0; i < n; i++) {
      const angle = (i * 2 * Math.PI) / n;
      particles.push({
        m: 1,
        pos: [radius * Math.cos(angle), 5 + radius * Math.sin(angle)],
        vel: [0, 0],
      });
    }
  }
  const springs: WireSpring[] = [];
  const spring = (kind: string, i: number, j: number): WireSpring => ({
    kind, i, j, rest: 1, ks: 800, kd: 15,
  });
  for (let i = 0; i < n; i++) springs.push(spring("structural", i, (i + 1) % n));
  for (let i = 0; i < n; i++) springs.push(spring("structural", n + i, n + ((i + 1) % n)));
  for (let i = 0; i < n; i++) springs.push(spring("radius", i, n + i));
  for (let i = 0; i < n; i++) springs.push(spring("shear_left", i, n + ((i + 1) % n)));
  for (let i = 0; i < n; i++) springs.push(spring("shear_right", (i + 1) % n, n + i));
  const faces: number[][] = [];
  for (let i = 0; i < n; i++) {
    faces.push([i, n + i, n + ((i + 1) % n)]);
    faces.push([i, n + ((i + 1) % n), (i + 1) % n]);
  }
  return { type: "topology", dimension: 2, particles, springs, faces };
}

export function snapshotFor(topo: TopologyMsg, diverged = false): SnapshotMsg {
  return {
    type: "snapshot",
    step: 1,
    time: 0.003,
    particles: topo.particles,
    volume_inner: 7,
    volume_outer: 12,
    ke: 0,
    pe: 0,
    max_norm: 7,
    collisions: 0,
    drag: null,
    diverged,
  };
}
