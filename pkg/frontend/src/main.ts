// Browser entry: canvas + pointer handlers + parameter panel, all
// state driven by the WebSocket stream.

import { ViewerClient } from "./client.js";
import { render } from "./render.js";
import { ViewState } from "./state.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const state = new ViewState(canvas.width, canvas.height);

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const socket = new WebSocket(wsUrl);
const client = new ViewerClient(state, socket);

socket.onmessage = (ev) => client.onFrame(String(ev.data));
socket.onclose = () => {
  const banner = document.getElementById("status");
  if (banner) banner.textContent = "disconnected";
};

canvas.addEventListener("pointerdown", (ev) => {
  canvas.setPointerCapture(ev.pointerId);
  const rect = canvas.getBoundingClientRect();
  client.pointerDown(ev.clientX - rect.left, ev.clientY - rect.top, ev.pointerId);
});
canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  client.pointerMove(ev.clientX - rect.left, ev.clientY - rect.top, ev.pointerId);
});
canvas.addEventListener("pointerup", (ev) => client.pointerUp(ev.pointerId));
canvas.addEventListener("pointercancel", (ev) => client.pointerUp(ev.pointerId));
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = ev.deltaY < 0 ? 1.1 : 1 / 1.1;
  state.camera2d.zoomBy(factor);
  state.camera3d.zoomBy(factor);
});

const PARAM_KEYS = ["ks", "kd", "rks", "rkd", "mks", "mkd", "pressure_nrt", "mass", "g", "dt", "e", "f"];
const panel = document.getElementById("panel")!;
for (const key of PARAM_KEYS) {
  const row = document.createElement("label");
  row.className = "row";
  const span = document.createElement("span");
  span.textContent = key;
  const input = document.createElement("input");
  input.type = "number";
  input.step = "any";
  input.dataset.key = key;
  input.addEventListener("change", () => client.setParam(key, Number(input.value)));
  row.append(span, input);
  panel.append(row);
}

const bodySelect = document.getElementById("body") as HTMLSelectElement;
bodySelect.addEventListener("change", () => {
  const presets: Record<string, Record<string, unknown>> = {
    "1d": { kind: "1d" },
    ring2d: { kind: "ring2d", n: 12, r_inner: 1.5, r_outer: 2.0 },
    sphere_octa: { kind: "sphere_octa", iterations: 1, r_inner: 1.5, r_outer: 2.0 },
    sphere_polar: { kind: "sphere_polar", slices: 10, stacks: 10, r_inner: 1.5, r_outer: 2.0 },
  };
  const preset = presets[bodySelect.value];
  client.selectBody(preset.kind as string, preset);
});

const integratorSelect = document.getElementById("integrator") as HTMLSelectElement;
integratorSelect.addEventListener("change", () => client.setIntegrator(integratorSelect.value));

const fillFaces = document.getElementById("faces") as HTMLInputElement;

function frame(): void {
  render(state, ctx, canvas.width, canvas.height, { fillFaces: fillFaces.checked });
  // Reflect acknowledged parameter values back into idle panel inputs.
  for (const input of panel.querySelectorAll<HTMLInputElement>("input[data-key]")) {
    const key = input.dataset.key!;
    if (document.activeElement !== input && state.params[key] !== undefined) {
      input.value = String(state.params[key]);
    }
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
