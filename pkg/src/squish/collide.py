"""Plane-set collision: detection by sign of the implicit plane
equation, penalty response (project back to the surface, reflect and
attenuate velocity), and inner-layer containment."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .mesh import LayeredBody

EPS_SURFACE = 1e-9
EPS_LAYER = 1e-3


class Classification(enum.Enum):
    INSIDE = "inside"
    ON_SURFACE = "on_surface"
    PENETRATING = "penetrating"


@dataclass(frozen=True)
class Plane:
    """Implicit plane a*x + b*y + c*z + d; the legal half-space is
    P(x) > 0. 2D worlds use c = 0 and ignore the z term."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if self.a == 0.0 and self.b == 0.0 and self.c == 0.0:
            raise ValueError("plane normal must be non-zero")

    def normal(self, space: int) -> np.ndarray:
        n = np.array([self.a, self.b, self.c][:space])
        return n / np.linalg.norm(n)

    def value(self, p: np.ndarray) -> float:
        coeffs = np.array([self.a, self.b, self.c][: len(p)])
        return float(np.dot(coeffs, p) + self.d)

    def values(self, points: np.ndarray) -> np.ndarray:
        coeffs = np.array([self.a, self.b, self.c][: points.shape[1]])
        return points @ coeffs + self.d


@dataclass(frozen=True)
class CollisionParams:
    """Restitution e (normal velocity retained, negated) and tangential
    retention f, both in [0, 1]."""

    e: float
    f: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.e <= 1.0):
            raise ValueError("e must be in [0, 1]")
        if not (0.0 <= self.f <= 1.0):
            raise ValueError("f must be in [0, 1]")


@dataclass(frozen=True)
class WorldBox:
    """Axis-aligned bounding planes: floor, ceiling, then walls."""

    planes: tuple[Plane, ...]
    extents: tuple[float, ...]  # (xmin, xmax, ymin, ymax[, zmin, zmax])

    @classmethod
    def box(cls, xmin: float, xmax: float, ymin: float, ymax: float,
            zmin: float | None = None, zmax: float | None = None) -> "WorldBox":
        if xmin >= xmax or ymin >= ymax:
            raise ValueError("degenerate world box")
        planes = [
            Plane(0.0, 1.0, 0.0, -ymin),   # floor
            Plane(0.0, -1.0, 0.0, ymax),   # ceiling
            Plane(1.0, 0.0, 0.0, -xmin),   # wall x-
            Plane(-1.0, 0.0, 0.0, xmax),   # wall x+
        ]
        extents = [xmin, xmax, ymin, ymax]
        if zmin is not None and zmax is not None:
            if zmin >= zmax:
                raise ValueError("degenerate world box")
            planes.append(Plane(0.0, 0.0, 1.0, -zmin))
            planes.append(Plane(0.0, 0.0, -1.0, zmax))
            extents.extend([zmin, zmax])
        return cls(tuple(planes), tuple(extents))

    @classmethod
    def default(cls, space: int) -> "WorldBox":
        if space == 2:
            return cls.box(-5.0, 5.0, 0.0, 10.0)
        return cls.box(-5.0, 5.0, 0.0, 10.0, -5.0, 5.0)

    @property
    def diagonal(self) -> float:
        spans = [self.extents[k + 1] - self.extents[k] for k in range(0, len(self.extents), 2)]
        return math.sqrt(sum(s * s for s in spans))


def classify(p: np.ndarray, plane: Plane, eps: float = EPS_SURFACE) -> Classification:
    """Sign test with surface tolerance."""
    value = plane.value(np.asarray(p, dtype=float))
    if value > eps:
        return Classification.INSIDE
    if value < -eps:
        return Classification.PENETRATING
    return Classification.ON_SURFACE


def reflect(offset: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror reflection 2((P-P').n)n - (P-P'); magnitude preserved."""
    offset = np.asarray(offset, dtype=float)
    n = np.asarray(n, dtype=float)
    return 2.0 * np.dot(offset, n) * n - offset


def respond(body: "LayeredBody", index: int, plane: Plane, cp: CollisionParams,
            eps: float = EPS_SURFACE) -> bool:
    """Penalty response for one particle against one plane.

    Penetrating (or on-surface with inward velocity): the position is
    projected back to the surface and the velocity split v = v_n + v_t
    becomes -e*v_n + f*v_t. Returns whether a response was applied.
    """
    p = body.pos[index]
    value = plane.value(p)
    n = plane.normal(body.space)
    vn_scalar = float(np.dot(body.vel[index], n))
    if value < -eps or (abs(value) <= eps and vn_scalar < 0.0):
        body.pos[index] = p - value * n
        v_n = vn_scalar * n
        v_t = body.vel[index] - v_n
        body.vel[index] = -cp.e * v_n + cp.f * v_t
        return True
    return False


def resolve_world(body: "LayeredBody", world: WorldBox, cp: CollisionParams,
                  eps: float = EPS_SURFACE) -> int:
    """Test every outer-layer particle against every world plane in
    order (floor, ceiling, then walls) and apply the penalty response
    per violation; returns the number of responses applied."""
    count = 0
    sl = body.outer_slice
    for plane in world.planes:
        pts = body.pos[sl]
        vals = plane.values(pts)
        n = plane.normal(body.space)
        vn = body.vel[sl] @ n
        mask = (vals < -eps) | ((np.abs(vals) <= eps) & (vn < 0.0))
        if not mask.any():
            continue
        idx = np.nonzero(mask)[0]
        body.pos[sl][idx] -= vals[idx, None] * n
        v = body.vel[sl][idx]
        v_n = vn[idx, None] * n
        v_t = v - v_n
        body.vel[sl][idx] = -cp.e * v_n + cp.f * v_t
        count += int(idx.size)
    return count


def contain_inner(body: "LayeredBody", eps_layer: float = EPS_LAYER) -> int:
    """Keep each inner particle inside its paired outer particle's
    radius about the outer-layer centroid. Inverted pairs are projected
    onto the centroid->outer segment at fraction (1 - eps) and their
    radial velocity component is zeroed; returns adjustments made."""
    if body.n_inner == 0:
        return 0
    centroid = body.pos[body.outer_slice].mean(axis=0)
    inner = body.pos[body.inner_slice]
    outer = body.pos[body.outer_slice]
    r_in = np.linalg.norm(inner - centroid, axis=1)
    r_out = np.linalg.norm(outer - centroid, axis=1)
    mask = r_in > r_out
    if not mask.any():
        return 0
    idx = np.nonzero(mask)[0]
    radial = outer[idx] - centroid
    norms = np.linalg.norm(radial, axis=1)
    ok = norms > 0.0
    idx = idx[ok]
    if idx.size == 0:
        return 0
    radial = radial[ok] / norms[ok, None]
    body.pos[idx] = centroid + (1.0 - eps_layer) * (outer[idx] - centroid)
    v = body.vel[idx]
    v_rad = np.einsum("ij,ij->i", v, radial)[:, None] * radial
    body.vel[idx] = v - v_rad
    return int(idx.size)
