"""Simulation configuration: every tunable plus timestep, world and
integrator choice."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .collide import CollisionParams, WorldBox
from .integrate import IntegratorKind


@dataclass
class SimConfig:
    ks: float = 800.0      # structural spring stiffness
    kd: float = 15.0       # structural spring damping
    rks: float = 700.0     # radius + shear spring stiffness
    rkd: float = 50.0      # radius + shear spring damping
    mks: float = 150.0     # drag (mouse) spring stiffness
    mkd: float = 25.0      # drag (mouse) spring damping
    pressure_nrt: float = 20.0  # combined N*R*T gas constant
    mass: float = 1.0      # per-particle mass
    g: float = 9.8         # gravity, opposite the y axis
    dt: float = 0.003
    integrator: IntegratorKind = IntegratorKind.RK4
    collision: CollisionParams = field(default_factory=lambda: CollisionParams(e=0.5, f=0.9))
    uniformity_correction: bool = False
    world: Optional[WorldBox] = None

    def __post_init__(self) -> None:
        for name in ("ks", "kd", "rks", "rkd", "mks", "mkd", "pressure_nrt"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.mass <= 0:
            raise ValueError("mass must be > 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if isinstance(self.integrator, str):
            self.integrator = IntegratorKind(self.integrator)

    @property
    def e(self) -> float:
        return self.collision.e

    @property
    def f(self) -> float:
        return self.collision.f

    def copy(self) -> "SimConfig":
        return replace(self, collision=CollisionParams(self.collision.e, self.collision.f))

    def world_for(self, space: int) -> WorldBox:
        if self.world is not None:
            return self.world
        return WorldBox.default(space)


# Keys accepted by live set_param events, with bounds checks.
_PARAM_KEYS = frozenset({
    "ks", "kd", "rks", "rkd", "mks", "mkd",
    "pressure_nrt", "mass", "g", "dt", "e", "f",
})


def validate_param(key: str, value: float) -> float:
    """Bounds-check one live parameter update; raises ValueError on a
    bad key or out-of-range value and returns the coerced float."""
    if key not in _PARAM_KEYS:
        raise ValueError(f"unknown parameter {key!r}")
    v = float(value)
    if key in ("ks", "kd", "rks", "rkd", "mks", "mkd", "pressure_nrt") and v < 0:
        raise ValueError(f"{key} must be >= 0")
    if key == "mass" and v <= 0:
        raise ValueError("mass must be > 0")
    if key == "dt" and v <= 0:
        raise ValueError("dt must be > 0")
    if key in ("e", "f") and not (0.0 <= v <= 1.0):
        raise ValueError(f"{key} must be in [0, 1]")
    return v


def apply_param(cfg: SimConfig, key: str, value: float) -> None:
    """Apply a validated parameter update in place."""
    v = validate_param(key, value)
    if key == "e":
        cfg.collision = CollisionParams(v, cfg.collision.f)
    elif key == "f":
        cfg.collision = CollisionParams(cfg.collision.e, v)
    else:
        setattr(cfg, key, v)
