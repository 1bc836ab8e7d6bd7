"""Simulation orchestration: the per-step pipeline (accumulate ->
integrate -> collide -> contain), metrics and divergence detection,
scenario scripting, and the stability sweep."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import mesh
from .collide import WorldBox, contain_inner, resolve_world
from .config import SimConfig, apply_param, validate_param
from .forces import DragState, volume_gauss
from .integrate import IntegratorKind, step_body
from .mesh import Dimension, LayeredBody

DIVERGENCE_FACTOR = 1e3  # divergence bound = factor * world diagonal
SETTLE_VELOCITY = 1e-4   # m/s; max velocity norm below which a body counts as settled


@dataclass
class Snapshot:
    """Per-step body state and derived scalars, serializable to one
    JSON line of the snapshot stream / wire protocol."""

    step: int
    time: float
    positions: np.ndarray
    velocities: np.ndarray
    volume_inner: Optional[float]
    volume_outer: Optional[float]
    ke: float
    pe: float
    max_norm: float
    collisions: int
    drag: Optional[dict]
    diverged: bool

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "time": self.time,
            "particles": [
                {"pos": p.tolist(), "vel": v.tolist()}
                for p, v in zip(self.positions, self.velocities)
            ],
            "volume_inner": self.volume_inner,
            "volume_outer": self.volume_outer,
            "ke": self.ke,
            "pe": self.pe,
            "max_norm": self.max_norm,
            "collisions": self.collisions,
            "drag": self.drag,
            "diverged": self.diverged,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def metrics_row(self) -> str:
        vi = "" if self.volume_inner is None else repr(self.volume_inner)
        vo = "" if self.volume_outer is None else repr(self.volume_outer)
        return (f"{self.step},{self.time!r},{vi},{vo},"
                f"{self.ke!r},{self.pe!r},{self.max_norm!r},{self.collisions}")


METRICS_HEADER = "step,time,volume_inner,volume_outer,ke,pe,max_norm,collisions"


class Simulation:
    """One body advancing under one config. Not thread-safe: a single
    logical thread steps the simulation; readers take completed
    snapshots."""

    def __init__(self, body: LayeredBody, cfg: Optional[SimConfig] = None):
        self.body = body
        self.cfg = cfg if cfg is not None else SimConfig()
        self.world: WorldBox = self.cfg.world_for(body.space)
        self.drag: Optional[DragState] = None
        self.step_index = 0
        self.time = 0.0
        self.diverged = False
        self._divergence_bound = DIVERGENCE_FACTOR * self.world.diagonal
        self._last_collisions = 0

    # -- live controls ---------------------------------------------------

    def drag_start(self, anchor) -> int:
        self.drag = DragState.begin(self.body, anchor, self.cfg)
        self.body.closest_outer_index = self.drag.target
        return self.drag.target

    def drag_move(self, anchor, interval: Optional[float] = None) -> None:
        if self.drag is not None and self.drag.active:
            self.drag.move(anchor, self.cfg.dt if interval is None else interval)

    def drag_end(self) -> None:
        if self.drag is not None:
            self.drag.end()
        self.drag = None
        self.body.closest_outer_index = None

    def set_param(self, key: str, value: float) -> None:
        apply_param(self.cfg, key, value)
        if key in ("ks", "kd", "rks", "rkd"):
            self.body.retune(self.cfg.ks, self.cfg.kd, self.cfg.rks, self.cfg.rkd)
        elif key == "mass":
            self.body.mass[:] = self.cfg.mass
        elif key in ("mks", "mkd") and self.drag is not None:
            self.drag.ks_m = self.cfg.mks
            self.drag.kd_m = self.cfg.mkd

    def set_integrator(self, kind: IntegratorKind | str) -> None:
        self.cfg.integrator = IntegratorKind(kind) if isinstance(kind, str) else kind

    # -- stepping ------------------------------------------------------------

    def step(self) -> Snapshot:
        """Advance one timestep and return the snapshot. Once diverged,
        stepping refuses to advance further."""
        if self.diverged:
            raise RuntimeError("simulation diverged; step refused")
        step_body(self.cfg.integrator, self.body, self.cfg, self.drag, self.cfg.dt)
        self._last_collisions = resolve_world(self.body, self.world, self.cfg.collision)
        if self.body.dimension != Dimension.ONE:
            contain_inner(self.body)
        self.step_index += 1
        self.time = self.step_index * self.cfg.dt
        snap = self.snapshot()
        if not np.isfinite(self.body.pos).all() or not np.isfinite(self.body.vel).all() \
                or snap.max_norm > self._divergence_bound:
            self.diverged = True
            snap.diverged = True
        return snap

    def snapshot(self) -> Snapshot:
        body = self.body
        with np.errstate(over="ignore", invalid="ignore"):
            ke = float(0.5 * np.sum(body.mass * np.sum(body.vel ** 2, axis=1)))
            pe = 0.0
            for name, _ in body.spring_containers():
                cache = body.cache(name)
                if cache.i.size == 0:
                    continue
                lengths = np.linalg.norm(body.pos[cache.j] - body.pos[cache.i], axis=1)
                pe += float(np.sum(0.5 * cache.ks * (lengths - cache.rest) ** 2))
            finite = np.isfinite(body.pos).all()
            max_norm = float(np.max(np.linalg.norm(body.pos, axis=1))) if finite else float("inf")
            vi = vo = None
            if body.dimension != Dimension.ONE and finite:
                if body.inner_springs:
                    vi = volume_gauss(body, "inner")
                if body.outer_springs:
                    vo = volume_gauss(body, "outer")
        drag = None
        if self.drag is not None and self.drag.active:
            drag = {"active": True, "anchor": self.drag.anchor.tolist(),
                    "target": self.drag.target}
        return Snapshot(
            step=self.step_index, time=self.time,
            positions=body.pos.copy(), velocities=body.vel.copy(),
            volume_inner=vi, volume_outer=vo, ke=ke, pe=pe,
            max_norm=max_norm, collisions=self._last_collisions,
            drag=drag, diverged=self.diverged,
        )

    def settled(self) -> bool:
        return float(np.max(np.linalg.norm(self.body.vel, axis=1))) < SETTLE_VELOCITY


# -- scenario scripting --------------------------------------------------------


_EVENT_TYPES = frozenset({"drag_start", "drag_move", "drag_end", "set_param", "set_integrator"})


@dataclass(frozen=True)
class ScenarioEvent:
    step: int
    type: str
    payload: dict

    def __post_init__(self) -> None:
        if self.type not in _EVENT_TYPES:
            raise ValueError(f"unknown event type {self.type!r}")
        if self.step < 0:
            raise ValueError("event step must be >= 0")
        if self.type in ("drag_start", "drag_move") and "anchor" not in self.payload:
            raise ValueError(f"{self.type} needs an 'anchor'")
        if self.type == "set_param":
            validate_param(self.payload.get("key", ""), self.payload.get("value", 0.0))
        if self.type == "set_integrator":
            IntegratorKind(self.payload.get("kind", ""))


@dataclass
class ScenarioScript:
    """Headless replay: body spec, config overrides, timed events,
    duration, and snapshot cadence."""

    body: dict
    config: dict = field(default_factory=dict)
    events: list[ScenarioEvent] = field(default_factory=list)
    steps: int = 0
    snapshot_every: int = 1

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        self.events = sorted(self.events, key=lambda e: e.step)
        build_config(self.config)  # validates overrides eagerly

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioScript":
        events = [ScenarioEvent(int(e["step"]), str(e["type"]), dict(e.get("payload", {})))
                  for e in doc.get("events", [])]
        return cls(
            body=dict(doc["body"]),
            config=dict(doc.get("config", {})),
            events=events,
            steps=int(doc.get("steps", 0)),
            snapshot_every=int(doc.get("snapshot_every", 1)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ScenarioScript":
        return cls.from_dict(json.loads(text))


def build_config(overrides: dict) -> SimConfig:
    cfg = SimConfig()
    for key, value in overrides.items():
        if key == "integrator":
            cfg.integrator = IntegratorKind(value)
        elif key == "uniformity_correction":
            cfg.uniformity_correction = bool(value)
        elif key == "world":
            cfg.world = WorldBox.box(*value)
        else:
            apply_param(cfg, key, value)
    return cfg


def build_body(spec: dict, cfg: SimConfig) -> LayeredBody:
    """Construct the scripted body. Supported kinds: 1d, ring2d,
    sphere_polar, sphere_octa; an optional `center` translates the
    finished body into place."""
    kind = spec.get("kind")
    params = {k: v for k, v in spec.items() if k not in ("kind", "center")}
    if kind == "1d":
        body = mesh.build_1d(params.get("p0", (0.0, 2.0)), params.get("p1", (0.0, 1.0)),
                             mass=cfg.mass, ks=cfg.ks, kd=cfg.kd)
    elif kind == "ring2d":
        body = mesh.build_ring_2d(int(params.get("n", 12)),
                                  float(params.get("r_inner", 1.5)),
                                  float(params.get("r_outer", 2.0)), cfg)
    elif kind == "sphere_octa":
        body = mesh.build_layered_sphere_octa(int(params.get("iterations", 1)),
                                              float(params.get("r_inner", 1.5)),
                                              float(params.get("r_outer", 2.0)), cfg)
    elif kind == "sphere_polar":
        body = mesh.build_layered_sphere_polar(int(params.get("slices", 10)),
                                               int(params.get("stacks", 10)),
                                               float(params.get("r_inner", 1.5)),
                                               float(params.get("r_outer", 2.0)), cfg)
    else:
        raise ValueError(f"unknown body kind {kind!r}")
    center = spec.get("center")
    if center is None:
        # Default placement: body center mid-box, clear of the floor.
        center = [0.0, 5.0] if body.space == 2 else [0.0, 5.0, 0.0]
    mesh.translate(body, center)
    return body


@dataclass
class RunResult:
    steps_completed: int
    diverged: bool
    final: Snapshot


def run(script: ScenarioScript) -> Iterator[Snapshot]:
    """Deterministic replay of a scenario; yields snapshots at the
    cadence (always including the initial state and the final step)."""
    cfg = build_config(script.config)
    body = build_body(script.body, cfg)
    sim = Simulation(body, cfg)
    events = list(script.events)
    yield sim.snapshot()
    if script.steps == 0:
        return
    pointer = 0
    for s in range(script.steps):
        while pointer < len(events) and events[pointer].step == s:
            _apply_event(sim, events[pointer])
            pointer += 1
        snap = sim.step()
        if snap.step % script.snapshot_every == 0 or snap.step == script.steps or snap.diverged:
            yield snap
        if snap.diverged:
            return


def _apply_event(sim: Simulation, event: ScenarioEvent) -> None:
    if event.type == "drag_start":
        sim.drag_start(event.payload["anchor"])
    elif event.type == "drag_move":
        sim.drag_move(event.payload["anchor"])
    elif event.type == "drag_end":
        sim.drag_end()
    elif event.type == "set_param":
        sim.set_param(event.payload["key"], event.payload["value"])
    elif event.type == "set_integrator":
        sim.set_integrator(event.payload["kind"])


def run_to_result(script: ScenarioScript) -> tuple[list[Snapshot], RunResult]:
    snaps = list(run(script))
    final = snaps[-1]
    return snaps, RunResult(steps_completed=final.step, diverged=final.diverged, final=final)


# -- stability sweep -------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    dt: float
    integrator: IntegratorKind
    survived: bool
    steps_to_divergence: Optional[int]

    def row(self) -> str:
        std = "" if self.steps_to_divergence is None else str(self.steps_to_divergence)
        return f"{self.dt!r},{self.integrator.value},{'survived' if self.survived else 'diverged'},{std}"


SWEEP_HEADER = "dt,integrator,outcome,steps_to_divergence"

DEFAULT_SWEEP_BODY = {"kind": "sphere_octa", "iterations": 1, "r_inner": 1.5, "r_outer": 2.0}


def stability_sweep(body_spec: Optional[dict] = None,
                    dt_list: tuple[float, ...] = (0.003, 0.03, 0.3),
                    integrators: tuple[IntegratorKind, ...] = (
                        IntegratorKind.EULER, IntegratorKind.MIDPOINT, IntegratorKind.RK4),
                    steps: int = 5000,
                    config: Optional[dict] = None) -> list[SweepCell]:
    """Run the full dt x integrator cross product from identical initial
    conditions and report survival per cell."""
    body_spec = dict(DEFAULT_SWEEP_BODY if body_spec is None else body_spec)
    cells = []
    for dt in dt_list:
        for kind in integrators:
            overrides = dict(config or {})
            overrides["dt"] = dt
            overrides["integrator"] = kind.value
            cfg = build_config(overrides)
            body = build_body(body_spec, cfg)
            sim = Simulation(body, cfg)
            diverged_at: Optional[int] = None
            for _ in range(steps):
                snap = sim.step()
                if snap.diverged:
                    diverged_at = snap.step
                    break
            cells.append(SweepCell(dt=dt, integrator=kind,
                                   survived=diverged_at is None,
                                   steps_to_divergence=diverged_at))
    return cells
