"""Interactive session service.

One shared simulation advances on an asyncio task; connected WebSocket
clients receive the topology document on connect (and whenever the
body is rebuilt) followed by snapshot frames at the broadcast cadence.
Client frames are queued and drained at step boundaries only, so a
snapshot never reflects a half-applied event. Slow clients drop old
frames rather than stalling the loop; a client never sees step indices
go backwards.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
from collections import deque
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import Simulation, build_body, build_config
from .integrate import IntegratorKind
from .mesh import body_to_json

DEFAULT_BODY = {"kind": "ring2d", "n": 12, "r_inner": 1.5, "r_outer": 2.0}


def _event(level: str, text: str) -> str:
    return json.dumps({"type": "event", "level": level, "text": text})


class Outbox:
    """Per-client outgoing frame buffer.

    Snapshots collapse to the latest pending one (a slow client skips
    frames, never sees them reordered); topology and event frames are
    never dropped.
    """

    def __init__(self) -> None:
        self._frames: deque[tuple[str, str]] = deque()
        self._ready = asyncio.Event()

    def push(self, kind: str, frame: str) -> None:
        if kind == "snapshot":
            while self._frames and self._frames[-1][0] == "snapshot":
                self._frames.pop()
        self._frames.append((kind, frame))
        self._ready.set()

    async def pop(self) -> str:
        while not self._frames:
            self._ready.clear()
            await self._ready.wait()
        return self._frames.popleft()[1]


class Session:
    """Shared simulation state plus client registry and input queue."""

    def __init__(self, body_spec: Optional[dict], dt: Optional[float], fps: float,
                 steps_per_frame: Optional[int] = None):
        overrides: dict = {}
        if dt is not None:
            overrides["dt"] = dt
        self.cfg = build_config(overrides)
        self.body_spec = dict(body_spec or DEFAULT_BODY)
        self.sim = Simulation(build_body(self.body_spec, self.cfg), self.cfg)
        self.fps = fps
        # Interactive mode throttles sim time to the frame budget.
        if steps_per_frame is None:
            steps_per_frame = max(1, round((1.0 / fps) / self.cfg.dt))
        self.steps_per_frame = steps_per_frame
        self.inputs: asyncio.Queue[tuple[WebSocket, dict]] = asyncio.Queue()
        self.clients: dict[WebSocket, Outbox] = {}
        self._drag_owner: Optional[WebSocket] = None
        self._task: Optional[asyncio.Task] = None

    # -- client management -------------------------------------------------

    def register(self, ws: WebSocket) -> Outbox:
        outbox = Outbox()
        self.clients[ws] = outbox
        outbox.push("topology", self.topology_frame())
        outbox.push("snapshot", self.snapshot_frame())
        return outbox

    def unregister(self, ws: WebSocket) -> None:
        self.clients.pop(ws, None)
        if self._drag_owner is ws:
            self.sim.drag_end()
            self._drag_owner = None

    def broadcast(self, kind: str, frame: str) -> None:
        for outbox in self.clients.values():
            outbox.push(kind, frame)

    def topology_frame(self) -> str:
        doc = body_to_json(self.sim.body)
        doc["type"] = "topology"
        return json.dumps(doc, separators=(",", ":"))

    def snapshot_frame(self) -> str:
        doc = self.sim.snapshot().to_dict()
        doc["type"] = "snapshot"
        return json.dumps(doc, separators=(",", ":"))

    # -- message handling ----------------------------------------------------

    def handle(self, ws: WebSocket, msg: dict) -> Optional[str]:
        """Apply one client frame at a step boundary. Returns an event
        frame to send back to the sender, or None."""
        mtype = msg.get("type")
        try:
            if mtype == "drag_start":
                anchor = self._anchor(msg)
                target = self.sim.drag_start(anchor)
                self._drag_owner = ws
                return _event("info", f"drag target {target}")
            if mtype == "drag_move":
                self.sim.drag_move(self._anchor(msg),
                                   interval=self.cfg.dt * self.steps_per_frame)
                return None
            if mtype == "drag_end":
                self.sim.drag_end()
                self._drag_owner = None
                return None
            if mtype == "set_param":
                self.sim.set_param(str(msg["key"]), msg["value"])
                return _event("info", f"set {msg['key']}={msg['value']}")
            if mtype == "set_integrator":
                self.sim.set_integrator(IntegratorKind(msg["kind"]))
                return _event("info", f"integrator {msg['kind']}")
            if mtype == "select_body":
                # Accept both flat fields and a nested params object.
                spec = {k: v for k, v in msg.items() if k not in ("type", "params")}
                spec.update(msg.get("params") or {})
                body = build_body(spec, self.cfg)
                self.sim = Simulation(body, self.cfg)
                self.body_spec = spec
                self.broadcast("topology", self.topology_frame())
                return None
            return _event("warning", f"unknown type {mtype!r}")
        except (KeyError, TypeError, ValueError) as exc:
            return _event("error", f"rejected: {exc}")

    def _anchor(self, msg: dict) -> list[float]:
        anchor = [float(msg["x"]), float(msg["y"])]
        if self.sim.body.space == 3:
            anchor.append(float(msg.get("z", 0.0)))
        return anchor

    # -- simulation loop ---------------------------------------------------

    async def loop(self) -> None:
        frame_dt = 1.0 / self.fps
        while True:
            start = asyncio.get_event_loop().time()
            for _ in range(self.steps_per_frame):
                # Drain inputs at each step boundary.
                while not self.inputs.empty():
                    ws, msg = self.inputs.get_nowait()
                    reply = self.handle(ws, msg)
                    if reply is not None and ws in self.clients:
                        self.clients[ws].push("event", reply)
                if not self.sim.diverged:
                    self.sim.step()
            self.broadcast("snapshot", self.snapshot_frame())
            elapsed = asyncio.get_event_loop().time() - start
            await asyncio.sleep(max(0.0, frame_dt - elapsed))


def create_app(body_spec: Optional[dict] = None, dt: Optional[float] = None,
               fps: float = 30.0, steps_per_frame: Optional[int] = None) -> FastAPI:
    session = Session(body_spec, dt, fps, steps_per_frame)

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        session._task = asyncio.create_task(session.loop())
        try:
            yield
        finally:
            session._task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await session._task

    app = FastAPI(title="squish", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    async def health() -> JSONResponse:
        return JSONResponse({"ok": True})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        outbox = session.register(ws)

        async def sender() -> None:
            while True:
                frame = await outbox.pop()
                await ws.send_text(frame)

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("frame must be an object with a 'type'")
                except (json.JSONDecodeError, ValueError) as exc:
                    outbox.push("event", _event("error", f"parse_error: {exc}"))
                    continue
                await session.inputs.put((ws, msg))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            session.unregister(ws)

    viewer_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if viewer_dir.is_dir():
        app.mount("/", StaticFiles(directory=viewer_dir, html=True), name="viewer")
    return app
