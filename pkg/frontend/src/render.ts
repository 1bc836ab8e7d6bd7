// Canvas renderer: springs as segments colored by kind, optional face
// fill, drag line, HUD, and a divergence banner. Works against a
// minimal context interface so tests can count drawing calls without a
// DOM.

import type { ViewState } from "./state.js";

export interface MinimalContext {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export const SPRING_COLORS: Record<string, string> = {
  structural: "#d62728",
  radius: "#2ca02c",
  shear_left: "#e377c2",
  shear_right: "#9467bd",
};

export interface RenderOptions {
  fillFaces?: boolean;
  showHud?: boolean;
}

export function render(
  state: ViewState,
  ctx: MinimalContext,
  width: number,
  height: number,
  options: RenderOptions = {},
): void {
  ctx.fillStyle = "#11151c";
  ctx.fillRect(0, 0, width, height);
  const topo = state.topology;
  const positions = state.positions();
  if (!topo || !positions) {
    ctx.fillStyle = "#888";
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for topology...", 16, 24);
    return;
  }

  if (options.fillFaces) {
    ctx.fillStyle = "#2a3346";
    ctx.globalAlpha = 0.55;
    for (const face of topo.faces) {
      const a = state.project(positions[face[0]]);
      const b = state.project(positions[face[1]]);
      const c = state.project(positions[face[2]]);
      ctx.beginPath();
      ctx.moveTo(a.px, a.py);
      ctx.lineTo(b.px, b.py);
      ctx.lineTo(c.px, c.py);
      ctx.closePath();
      ctx.fill();
    }
    ctx.globalAlpha = 1;
  }

  ctx.lineWidth = 1.5;
  for (const spring of topo.springs) {
    const a = state.project(positions[spring.i]);
    const b = state.project(positions[spring.j]);
    ctx.strokeStyle = SPRING_COLORS[spring.kind] ?? "#cccccc";
    ctx.beginPath();
    ctx.moveTo(a.px, a.py);
    ctx.lineTo(b.px, b.py);
    ctx.stroke();
  }

  const snap = state.snapshot;
  if (snap?.drag?.active) {
    const target = state.project(positions[snap.drag.target]);
    const anchor = state.project(snap.drag.anchor);
    ctx.strokeStyle = "#f5c518";
    ctx.beginPath();
    ctx.moveTo(target.px, target.py);
    ctx.lineTo(anchor.px, anchor.py);
    ctx.stroke();
  }

  if (options.showHud !== false) {
    ctx.fillStyle = "#9aa4b2";
    ctx.font = "12px monospace";
    if (snap) {
      const vol = snap.volume_outer === null ? "-" : snap.volume_outer.toFixed(3);
      ctx.fillText(
        `step ${snap.step}  t=${snap.time.toFixed(3)}s  V=${vol}  ke=${snap.ke.toFixed(3)}`,
        12,
        height - 12,
      );
    }
  }

  if (snap?.diverged) {
    ctx.fillStyle = "#b3261e";
    ctx.fillRect(0, 0, width, 34);
    ctx.fillStyle = "#ffffff";
    ctx.font = "bold 14px sans-serif";
    ctx.fillText("simulation diverged: pick a smaller timestep or another integrator", 12, 22);
  }
}
