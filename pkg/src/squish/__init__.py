"""Two-layer mass-spring-pressure soft-body simulation."""

from .collide import CollisionParams, Plane, WorldBox
from .config import SimConfig
from .engine import ScenarioScript, Simulation, Snapshot, run, stability_sweep
from .forces import DragState, PressureParams, find_closest_point, volume_gauss
from .integrate import IntegratorKind, Oscillator, order_of_accuracy
from .mesh import (
    Dimension,
    Face,
    LayeredBody,
    Mesh,
    Particle,
    Spring,
    SpringKind,
    build_1d,
    build_ring_2d,
    build_sphere_octa,
    build_sphere_polar,
    link_layers,
    spring_force_scale,
)

__version__ = "0.1.0"

__all__ = [
    "CollisionParams", "Plane", "WorldBox", "SimConfig",
    "ScenarioScript", "Simulation", "Snapshot", "run", "stability_sweep",
    "DragState", "PressureParams", "find_closest_point", "volume_gauss",
    "IntegratorKind", "Oscillator", "order_of_accuracy",
    "Dimension", "Face", "LayeredBody", "Mesh", "Particle", "Spring", "SpringKind",
    "build_1d", "build_ring_2d", "build_sphere_octa", "build_sphere_polar",
    "link_layers", "spring_force_scale",
]
