"""Force computations and the accumulation pipeline.

Gravity, Hooke springs, viscous damping, the mouse drag spring, and
the internal gas-pressure force (ideal gas law P = nrt / V with the
enclosed volume estimated from spring normals). Per-spring operations
exist in both scalar form (the documented contracts, used by tests and
oracles) and vectorized form (the hot path used by accumulation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from .mesh import Dimension, LayeredBody, Particle, Spring

if TYPE_CHECKING:
    from .config import SimConfig


@dataclass
class PressureParams:
    """Combined N*R*T gas constant; disabled for open (1D) bodies."""

    nrt: float = 20.0
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.nrt < 0:
            raise ValueError("nrt must be >= 0")


@dataclass
class DragState:
    """Mouse-spring state: an elastic link from a world-space anchor to
    the closest outer-layer particle picked at drag start. Inactive
    state contributes zero force."""

    anchor: np.ndarray
    target: int
    ks_m: float = 150.0
    kd_m: float = 25.0
    rest_m: float = 0.0
    active: bool = True
    anchor_velocity: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.anchor = np.asarray(self.anchor, dtype=float)
        if self.anchor_velocity is None:
            self.anchor_velocity = np.zeros_like(self.anchor)

    @classmethod
    def begin(cls, body: LayeredBody, anchor, cfg: "SimConfig") -> "DragState":
        anchor = np.asarray(anchor, dtype=float)
        return cls(anchor=anchor, target=find_closest_point(body, anchor),
                   ks_m=cfg.mks, kd_m=cfg.mkd)

    def move(self, anchor, interval: float) -> None:
        """Update the anchor; mouse velocity is the finite difference of
        successive anchor positions over the elapsed interval."""
        anchor = np.asarray(anchor, dtype=float)
        if interval > 0:
            self.anchor_velocity = (anchor - self.anchor) / interval
        self.anchor = anchor

    def end(self) -> None:
        self.active = False
        self.anchor_velocity = np.zeros_like(self.anchor)


def find_closest_point(body: LayeredBody, anchor) -> int:
    """Index of the outer-layer particle nearest the anchor; ties break
    toward the lowest index (argmin returns the first minimum)."""
    outer = body.pos[body.outer_slice]
    if outer.shape[0] == 0:
        raise ValueError("body has no outer particles")
    anchor = np.asarray(anchor, dtype=float)
    d2 = np.sum((outer - anchor) ** 2, axis=1)
    return int(np.argmin(d2)) + body.n_inner


# -- per-spring forces (scalar contracts) -------------------------------------


def gravity_force(p: Particle, g: float) -> np.ndarray:
    """Constant field m*g pointing opposite the y axis."""
    out = np.zeros(p.position.shape[0])
    out[1] = -p.mass * g
    return out


def hooke_force(s: Spring, positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear spring force pair (on sp1, on sp2).

    f = -(len - rest) * ks applied along u = (r2 - r1)/len; the signs
    make an extended spring pull its endpoints together. Coincident
    endpoints yield a zero pair (the caller records the degenerate
    event).
    """
    r1, r2 = positions[s.i], positions[s.j]
    delta = r2 - r1
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        z = np.zeros_like(delta)
        return z, z.copy()
    u = delta / length
    f = -(length - s.rest_length) * s.ks
    return -f * u, f * u


def damping_force(s: Spring, positions: np.ndarray, velocities: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Viscous damping pair: d = dot(v2 - v1, u) * kd along the spring
    axis, applied equal-and-opposite so it always resists the relative
    motion."""
    r1, r2 = positions[s.i], positions[s.j]
    delta = r2 - r1
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        z = np.zeros_like(delta)
        return z, z.copy()
    u = delta / length
    d = float(np.dot(velocities[s.j] - velocities[s.i], u)) * s.kd
    return d * u, -d * u


def drag_force(d: DragState, body: LayeredBody) -> np.ndarray:
    """Spring+damper force toward the anchor, applied to the target
    particle only. Zero when inactive or when the anchor coincides with
    the particle."""
    if not d.active:
        return np.zeros(body.space)
    r_i = body.pos[d.target]
    v_i = body.vel[d.target]
    delta = d.anchor - r_i
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        return np.zeros(body.space)
    u = delta / length
    stretch = (length - d.rest_m) * d.ks_m
    damp = float(np.dot(d.anchor_velocity - v_i, u)) * d.kd_m
    return (stretch + damp) * u


# -- normals -------------------------------------------------------------


def spring_normal_2d(s: Spring, positions: np.ndarray) -> np.ndarray:
    """Spring rotated 90 degrees about z: (-(y2-y1), x2-x1). Unnormalized;
    its length equals the spring length."""
    delta = positions[s.j] - positions[s.i]
    return np.array([-delta[1], delta[0]])


def spring_normal_3d(s: Spring, positions: np.ndarray) -> np.ndarray:
    """Estimated 3D spring normal (z2-z1, y2-y1, -(x2-x1)).

    This is a fast rotation-matrix estimate, not a true face normal; it
    is wrong for y-dominant springs but cheap, and 3D volume/pressure
    accuracy inherits that error by design.
    """
    delta = positions[s.j] - positions[s.i]
    return np.array([delta[2], delta[1], -delta[0]])


def _raw_normals(space: int, delta: np.ndarray) -> np.ndarray:
    """Vectorized unnormalized normals for (M, space) edge vectors."""
    if space == 2:
        return np.column_stack([-delta[:, 1], delta[:, 0]])
    return np.column_stack([delta[:, 2], delta[:, 1], -delta[:, 0]])


def _oriented_layer_normals(body: LayeredBody, layer: str
                            ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Outward unit normals for a layer's structural springs. Returns
    (unit_normals, lengths, midpoints). Zero-length springs get a zero
    normal and an event.

    2D layers traverse the ring spring-by-spring, so the rotation
    normals share one side; the whole set is flipped at once if its
    signed enclosed area comes out negative, which orients every edge
    outward for any simple ring. In 3D no winding exists and each
    estimated normal is flipped outward from the layer centroid
    (adequate for the convex sphere layers the builders produce).
    """
    name = "inner_springs" if layer == "inner" else "outer_springs"
    cache = body.cache(name)
    p1 = body.pos[cache.i]
    p2 = body.pos[cache.j]
    delta = p2 - p1
    lengths = np.linalg.norm(delta, axis=1)
    raw = _raw_normals(body.space, delta)
    unit = np.zeros_like(raw)
    ok = lengths > 0.0
    if not np.all(ok):
        body.record_event("degenerate_spring", f"{layer}: {int((~ok).sum())} zero-length")
    raw_norm = np.linalg.norm(raw, axis=1)
    safe = raw_norm > 0.0
    unit[safe] = raw[safe] / raw_norm[safe, None]
    mid = 0.5 * (p1 + p2)
    if body.space == 2:
        centroid_x = body.pos[body.layer_indices(layer), 0].mean()
        signed = np.sum((mid[:, 0] - centroid_x) * unit[:, 0] * lengths)
        if signed < 0.0:
            unit = -unit
    else:
        centroid = body.pos[body.layer_indices(layer)].mean(axis=0)
        flip = np.einsum("ij,ij->i", unit, mid - centroid) < 0.0
        unit[flip] = -unit[flip]
    return unit, lengths, mid


# -- volume --------------------------------------------------------------


def _volume_from_normals(body: LayeredBody, layer: str, unit: np.ndarray,
                         lengths: np.ndarray, mid: np.ndarray) -> float:
    centroid_x = body.pos[body.layer_indices(layer), 0].mean()
    total = np.sum((mid[:, 0] - centroid_x) * unit[:, 0] * lengths)
    return float(abs(total))


def volume_gauss(body: LayeredBody, layer: str) -> float:
    """Enclosed volume (area in 2D) from the layer's structural springs.

    Per spring, the divergence-theorem term x_mid * n_x * length with
    the outward unit normal; x is measured from the layer centroid so
    the estimate is translation-invariant. For simple closed 2D rings
    this equals the shoelace area exactly; in 3D it inherits the
    estimated-normal error and is an acknowledged approximation.
    """
    if body.dimension == Dimension.ONE:
        raise ValueError("open 1D topology has no enclosed volume")
    springs = body.layer_springs(layer)
    if not springs:
        raise ValueError(f"layer {layer!r} has no structural springs")
    unit, lengths, mid = _oriented_layer_normals(body, layer)
    return _volume_from_normals(body, layer, unit, lengths, mid)


def volume_faces(body: LayeredBody, layer: str) -> float:
    """Exact divergence-theorem volume from the layer's triangles,
    V = |sum p1 . (p2 x p3)| / 6. Test oracle for the 3D spring sum."""
    faces = body.inner_faces if layer == "inner" else body.outer_faces
    if not faces:
        raise ValueError(f"layer {layer!r} has no faces")
    total = 0.0
    for f in faces:
        p1, p2, p3 = (body.pos[v] for v in f.vertices)
        total += float(np.dot(p1, np.cross(p2, p3)))
    return abs(total) / 6.0


# -- accumulation ----------------------------------------------------------


def _accumulate_container(body: LayeredBody, name: str,
                          out: Optional[np.ndarray] = None) -> None:
    """Add hooke+damping pairs for one spring container into `out`
    (defaults to the body force accumulators)."""
    cache = body.cache(name)
    if cache.i.size == 0:
        return
    target = body.force if out is None else out
    p1 = body.pos[cache.i]
    p2 = body.pos[cache.j]
    delta = p2 - p1
    lengths = np.linalg.norm(delta, axis=1)
    ok = lengths > 0.0
    if not np.all(ok):
        body.record_event("degenerate_spring", f"{name}: {int((~ok).sum())} zero-length")
    u = np.zeros_like(delta)
    u[ok] = delta[ok] / lengths[ok, None]
    rel_v = body.vel[cache.j] - body.vel[cache.i]
    f = -(lengths - cache.rest) * cache.ks
    d = np.einsum("ij,ij->i", rel_v, u) * cache.kd
    # Force on sp2 along u is (f - d); sp1 receives the negation.
    on_j = (f - d)[:, None] * u
    np.add.at(target, cache.i, -on_j)
    np.add.at(target, cache.j, on_j)


def _structural_degree(body: LayeredBody) -> np.ndarray:
    """Number of structural springs touching each particle."""
    deg = np.zeros(body.n_particles, dtype=float)
    for name in ("inner_springs", "outer_springs"):
        cache = body.cache(name)
        np.add.at(deg, cache.i, 1.0)
        np.add.at(deg, cache.j, 1.0)
    return deg


def total_spring_forces(body: LayeredBody, uniformity_correction: bool = False) -> None:
    """Accumulate hooke+damping for every spring container into the
    particle force fields. With the correction enabled, per-particle
    structural sums are scaled by 6/n_connected before accumulation."""
    if uniformity_correction:
        tmp = np.zeros_like(body.force)
        _accumulate_container(body, "inner_springs", tmp)
        _accumulate_container(body, "outer_springs", tmp)
        deg = _structural_degree(body)
        scale = np.ones_like(deg)
        touched = deg > 0
        scale[touched] = 6.0 / deg[touched]
        body.force += tmp * scale[:, None]
    else:
        _accumulate_container(body, "inner_springs")
        _accumulate_container(body, "outer_springs")
    _accumulate_container(body, "radius_springs")
    _accumulate_container(body, "shear_left")
    _accumulate_container(body, "shear_right")


_VOLUME_FLOOR_FRACTION = 1e-6


def _volume_floor(body: LayeredBody, layer: str) -> float:
    initial = body.initial_volumes.get(layer)
    if initial is None:
        initial = volume_gauss(body, layer)
        body.initial_volumes[layer] = initial
    return _VOLUME_FLOOR_FRACTION * initial


def pressure_forces(body: LayeredBody, pp: PressureParams) -> None:
    """Ideal-gas pressure per layer: P = nrt / V, applied per structural
    spring as P * n * length with outward normals, half to each
    endpoint. Volumes below the floor are clamped (with an event) to
    avoid the P -> infinity singularity."""
    if not pp.enabled or pp.nrt == 0.0:
        return
    for layer in body.layers():
        unit, lengths, mid = _oriented_layer_normals(body, layer)
        volume = _volume_from_normals(body, layer, unit, lengths, mid)
        floor = _volume_floor(body, layer)
        if volume < floor:
            body.record_event("volume_floor", f"{layer}: {volume:.3e} clamped to {floor:.3e}")
            volume = floor
        pressure = pp.nrt / volume
        contrib = 0.5 * pressure * unit * lengths[:, None]
        name = "inner_springs" if layer == "inner" else "outer_springs"
        cache = body.cache(name)
        np.add.at(body.force, cache.i, contrib)
        np.add.at(body.force, cache.j, contrib)


def accumulate_forces(body: LayeredBody, cfg: "SimConfig",
                      drag: Optional[DragState] = None) -> None:
    """Run the full force pass in order: zero accumulators, gravity,
    structural/radius/shear springs, normals+volumes+pressure (skipped
    for open 1D bodies), drag. Integration and collision are not part
    of this pass."""
    body.force[:] = 0.0
    if cfg.g != 0.0:
        body.force[:, 1] -= body.mass * cfg.g
    total_spring_forces(body, cfg.uniformity_correction)
    if body.dimension != Dimension.ONE:
        pressure_forces(body, PressureParams(cfg.pressure_nrt, enabled=True))
    if drag is not None and drag.active:
        body.force[drag.target] += drag_force(drag, body)
