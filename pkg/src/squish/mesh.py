"""Domain types and procedural builders for layered elastic bodies.

A body is a set of point masses joined by springs of several kinds:
structural springs form each layer's surface, radius springs join
corresponding inner/outer particles, and the two shear families run
diagonally across the layers to resist fold-over. Builders cover the
1D two-particle object, the 2D two-layer ring, and two sphere
constructions (polar grid and recursive octahedron subdivision).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from .config import SimConfig


class ConstructionError(ValueError):
    """Raised when builder inputs cannot produce a valid body."""


class Dimension(enum.IntEnum):
    ONE = 1
    TWO = 2
    THREE = 3


class SpringKind(enum.Enum):
    STRUCTURAL = "structural"
    RADIUS = "radius"
    SHEAR_LEFT = "shear_left"
    SHEAR_RIGHT = "shear_right"
    # Transient kinds: never stored in body containers.
    DRAG = "drag"
    COLLISION = "collision"


@dataclass(frozen=True)
class Spring:
    """Two-particle link. `i` is the head (sp1), `j` the tail (sp2).

    Endpoint indices are global particle indices within the owning body
    (inner block first, then outer). Rest length equals the endpoint
    distance at construction time.
    """

    i: int
    j: int
    kind: SpringKind
    rest_length: float
    ks: float
    kd: float

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ConstructionError(f"spring endpoints must differ, got {self.i}")
        if self.rest_length < 0:
            raise ConstructionError("negative rest length")

    @property
    def pair(self) -> frozenset[int]:
        """Unordered endpoint key used for dedup."""
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class Face:
    """Triangle over particle indices; `edges` (when known) are indices
    into the owning layer's structural-spring container whose endpoint
    pairs match (v1,v2), (v2,v3), (v3,v1) as unordered pairs. Faces
    used purely for display carry `edges=None`."""

    vertices: tuple[int, int, int]
    edges: Optional[tuple[int, int, int]] = None

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != 3:
            raise ConstructionError(f"face vertices must be distinct: {self.vertices}")


class Particle:
    """View of one point mass inside a body.

    Exposes mass/position/velocity/force plus the derivative scratch
    (d_position, d_velocity) written by the integrator's last
    derivative evaluation. Mutations write through to the body arrays.
    """

    __slots__ = ("_body", "index")

    def __init__(self, body: "LayeredBody", index: int):
        self._body = body
        self.index = index

    @property
    def mass(self) -> float:
        return float(self._body.mass[self.index])

    @property
    def position(self) -> np.ndarray:
        return self._body.pos[self.index]

    @property
    def velocity(self) -> np.ndarray:
        return self._body.vel[self.index]

    @property
    def force(self) -> np.ndarray:
        return self._body.force[self.index]

    @property
    def d_position(self) -> np.ndarray:
        return self._body.dpos[self.index]

    @property
    def d_velocity(self) -> np.ndarray:
        return self._body.dvel[self.index]

    def __repr__(self) -> str:  # pragma: no cover
        return f"Particle(index={self.index}, pos={self.position})"


@dataclass
class Mesh:
    """Single-layer geometry: positions, structural springs, faces.

    Intermediate product of the sphere/ring builders; two meshes with
    identical topology are combined into a LayeredBody by link_layers.
    """

    space: int
    positions: np.ndarray  # (V, space)
    springs: list[Spring]
    faces: list[Face]

    @property
    def vertex_count(self) -> int:
        return int(self.positions.shape[0])


class _SpringSetCache:
    """Vectorized view of one spring container (built lazily, reset on retune)."""

    __slots__ = ("i", "j", "rest", "ks", "kd")

    def __init__(self, springs: Sequence[Spring]):
        self.i = np.array([s.i for s in springs], dtype=np.intp)
        self.j = np.array([s.j for s in springs], dtype=np.intp)
        self.rest = np.array([s.rest_length for s in springs], dtype=float)
        self.ks = np.array([s.ks for s in springs], dtype=float)
        self.kd = np.array([s.kd for s in springs], dtype=float)


class LayeredBody:
    """A simulated object at any dimensionality.

    Particle state lives in contiguous arrays with the inner block
    first ([0, n_inner)) and the outer block after it. Topology
    (springs, faces) is immutable once built; particle state is
    mutated by the force/integration/collision pipeline. A body may be
    handed between threads but must be mutated by one at a time.
    """

    def __init__(
        self,
        dimension: Dimension,
        space: int,
        positions: np.ndarray,
        n_inner: int,
        masses: np.ndarray,
    ):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != space:
            raise ConstructionError("positions must be (N, space)")
        self.dimension = dimension
        self.space = space
        self.n_inner = int(n_inner)
        self.pos = positions.copy()
        self.vel = np.zeros_like(self.pos)
        self.force = np.zeros_like(self.pos)
        self.dpos = np.zeros_like(self.pos)
        self.dvel = np.zeros_like(self.pos)
        self.mass = np.asarray(masses, dtype=float).copy()
        if np.any(self.mass <= 0):
            raise ConstructionError("particle mass must be > 0")

        self.inner_springs: list[Spring] = []
        self.outer_springs: list[Spring] = []
        self.radius_springs: list[Spring] = []
        self.shear_left: list[Spring] = []
        self.shear_right: list[Spring] = []
        self.inner_faces: list[Face] = []
        self.outer_faces: list[Face] = []
        self.closest_outer_index: Optional[int] = None
        self.events: list[tuple[str, str]] = []
        self.initial_volumes: dict[str, float] = {}
        self._caches: dict[str, _SpringSetCache] = {}

    # -- particle access ------------------------------------------------

    @property
    def n_particles(self) -> int:
        return int(self.pos.shape[0])

    @property
    def n_outer(self) -> int:
        return self.n_particles - self.n_inner

    @property
    def inner_slice(self) -> slice:
        return slice(0, self.n_inner)

    @property
    def outer_slice(self) -> slice:
        return slice(self.n_inner, self.n_particles)

    def particle(self, index: int) -> Particle:
        return Particle(self, index)

    @property
    def inner_points(self) -> list[Particle]:
        return [Particle(self, k) for k in range(self.n_inner)]

    @property
    def outer_points(self) -> list[Particle]:
        return [Particle(self, k) for k in range(self.n_inner, self.n_particles)]

    # -- spring access ----------------------------------------------------

    _CONTAINERS = ("inner_springs", "outer_springs", "radius_springs", "shear_left", "shear_right")

    def spring_containers(self) -> list[tuple[str, list[Spring]]]:
        return [(name, getattr(self, name)) for name in self._CONTAINERS]

    def all_springs(self) -> list[Spring]:
        out: list[Spring] = []
        for _, container in self.spring_containers():
            out.extend(container)
        return out

    def cache(self, name: str) -> _SpringSetCache:
        """Vectorized arrays for one spring container."""
        got = self._caches.get(name)
        if got is None:
            got = _SpringSetCache(getattr(self, name))
            self._caches[name] = got
        return got

    def retune(self, ks: float, kd: float, rks: float, rkd: float) -> None:
        """Replace spring coefficients after a live parameter change.

        Topology and rest lengths are untouched; structural springs get
        (ks, kd), radius and shear springs get (rks, rkd).
        """
        for name, container in self.spring_containers():
            if name in ("inner_springs", "outer_springs"):
                new_ks, new_kd = ks, kd
            else:
                new_ks, new_kd = rks, rkd
            container[:] = [
                Spring(s.i, s.j, s.kind, s.rest_length, new_ks, new_kd) for s in container
            ]
        self._caches.clear()

    def add_springs(self, name: str, springs: Iterable[Spring]) -> None:
        container: list[Spring] = getattr(self, name)
        seen = {s.pair for s in container}
        for s in springs:
            if s.pair in seen:
                raise ConstructionError(f"duplicate spring {set(s.pair)} in {name}")
            seen.add(s.pair)
            container.append(s)
        self._caches.pop(name, None)

    def record_event(self, kind: str, detail: str) -> None:
        # Non-fatal events (degenerate springs, volume clamps); bounded
        # so long interactive sessions cannot grow it without limit.
        self.events.append((kind, detail))
        if len(self.events) > 1000:
            del self.events[:500]

    def layer_indices(self, layer: str) -> slice:
        if layer == "inner":
            return self.inner_slice
        if layer == "outer":
            return self.outer_slice
        raise ValueError(f"unknown layer {layer!r}")

    def layer_springs(self, layer: str) -> list[Spring]:
        return self.inner_springs if layer == "inner" else self.outer_springs

    def layers(self) -> list[str]:
        """Layers that carry structural springs (inner absent for 1D)."""
        out = []
        if self.inner_springs:
            out.append("inner")
        if self.outer_springs:
            out.append("outer")
        return out


# -- helpers --------------------------------------------------------------


def _distance(a: np.ndarray, b: np.ndarray) -> float:
    # Matches the vectorized row-norm used by the force path bit-for-bit,
    # so construction-time rest lengths are exact at the rest pose.
    delta = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return float(np.sqrt(np.sum(delta * delta)))


def _structural(i: int, j: int, positions: np.ndarray, ks: float, kd: float) -> Spring:
    return Spring(i, j, SpringKind.STRUCTURAL, _distance(positions[i], positions[j]), ks, kd)


def spring_force_scale(n_connected: int) -> float:
    """Uniformity correction factor 6/n for a particle touching n
    structural springs (octahedron kernel points touch 4, subdivision
    points 6). Applied only when the correction is enabled; the default
    configuration leaves it off."""
    if n_connected < 1:
        raise ValueError("n_connected must be >= 1")
    return 6.0 / n_connected


# -- builders ---------------------------------------------------------------


def build_1d(
    p0: Sequence[float],
    p1: Sequence[float],
    mass: float = 1.0,
    ks: float = 800.0,
    kd: float = 15.0,
) -> LayeredBody:
    """Two particles joined by one structural spring.

    The pair lives in the outer containers; cross-layer and face
    containers stay empty. Coincident endpoints are rejected.
    """
    a = np.asarray(p0, dtype=float)
    b = np.asarray(p1, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] not in (2, 3):
        raise ConstructionError("endpoints must both be 2- or 3-vectors")
    rest = _distance(a, b)
    if rest == 0.0:
        raise ConstructionError("1D endpoints coincide")
    positions = np.stack([a, b])
    body = LayeredBody(Dimension.ONE, a.shape[0], positions, 0, np.full(2, float(mass)))
    body.add_springs("outer_springs", [Spring(0, 1, SpringKind.STRUCTURAL, rest, ks, kd)])
    return body


def _ring_positions(n: int, radius: float) -> np.ndarray:
    angles = np.arange(n) * (2.0 * math.pi / n)
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


def ring_mesh(n: int, radius: float, ks: float, kd: float) -> Mesh:
    """Single circle of n particles closed by n structural springs."""
    if n < 3:
        raise ConstructionError("ring needs n >= 3")
    if radius <= 0:
        raise ConstructionError("ring radius must be > 0")
    positions = _ring_positions(n, radius)
    springs = [_structural(i, (i + 1) % n, positions, ks, kd) for i in range(n)]
    return Mesh(2, positions, springs, [])


def build_ring_2d(n: int, r_inner: float, r_outer: float, cfg: "SimConfig") -> LayeredBody:
    """Two concentric rings of n particles linked into one body.

    Particles sit at angles i * (360/n) degrees; the closing structural
    spring joins index n-1 back to 0. Radius spring i joins inner i to
    outer i; shear-left joins inner i to outer i+1 (mod n) and
    shear-right inner i+1 to outer i. Annulus triangles are attached
    for display.
    """
    if n < 3:
        raise ConstructionError("ring needs n >= 3")
    if not (0 < r_inner < r_outer):
        raise ConstructionError("need 0 < r_inner < r_outer")
    inner = ring_mesh(n, r_inner, cfg.ks, cfg.kd)
    outer = ring_mesh(n, r_outer, cfg.ks, cfg.kd)
    body = link_layers(inner, outer, rks=cfg.rks, rkd=cfg.rkd, mass=cfg.mass)
    body.dimension = Dimension.TWO
    # Display triangulation of the annulus; vertices only, since the
    # triangle sides live in three different spring containers.
    faces = []
    for i in range(n):
        i1 = (i + 1) % n
        faces.append(Face((i, n + i, n + i1)))
        faces.append(Face((i, n + i1, i1)))
    body.outer_faces.extend(faces)
    return body


def build_sphere_polar(n_slices: int, n_stacks: int, radius: float,
                       ks: float = 800.0, kd: float = 15.0) -> Mesh:
    """Latitude/longitude sphere: one shared particle per pole, rings of
    n_slices particles at each interior latitude. Quadrilateral facets on
    the body are stored as display triangle pairs; the pole caps are
    true triangles whose sides are structural springs.
    """
    if n_slices < 3 or n_stacks < 2:
        raise ConstructionError("need n_slices >= 3 and n_stacks >= 2")
    if radius <= 0:
        raise ConstructionError("sphere radius must be > 0")
    d_theta = 2.0 * math.pi / n_slices
    d_phi = math.pi / n_stacks

    pts: list[np.ndarray] = [np.array([0.0, 0.0, -radius])]  # south pole, index 0
    for k in range(1, n_stacks):
        phi = -0.5 * math.pi + k * d_phi
        for j in range(n_slices):
            theta = j * d_theta
            pts.append(radius * np.array([
                math.sin(theta) * math.cos(phi),
                math.cos(theta) * math.cos(phi),
                math.sin(phi),
            ]))
    pts.append(np.array([0.0, 0.0, radius]))  # north pole
    positions = np.stack(pts)
    north = len(pts) - 1

    def ring_index(k: int, j: int) -> int:
        return 1 + (k - 1) * n_slices + (j % n_slices)

    springs: list[Spring] = []
    seen: dict[frozenset[int], int] = {}

    def add_edge(a: int, b: int) -> int:
        key = frozenset((a, b))
        idx = seen.get(key)
        if idx is None:
            idx = len(springs)
            seen[key] = idx
            springs.append(_structural(a, b, positions, ks, kd))
        return idx

    faces: list[Face] = []
    # South cap triangles.
    for j in range(n_slices):
        a, b = ring_index(1, j), ring_index(1, j + 1)
        e1 = add_edge(0, a)
        e2 = add_edge(a, b)
        e3 = add_edge(b, 0)
        faces.append(Face((0, a, b), (e1, e2, e3)))
    # Body quads, split into display triangles (the quad diagonal is not
    # a spring, so those faces carry vertices only).
    for k in range(1, n_stacks - 1):
        for j in range(n_slices):
            a, b = ring_index(k, j), ring_index(k, j + 1)
            c, d = ring_index(k + 1, j + 1), ring_index(k + 1, j)
            add_edge(a, b)
            add_edge(b, c)
            add_edge(c, d)
            add_edge(d, a)
            faces.append(Face((a, b, c)))
            faces.append(Face((a, c, d)))
    # North cap triangles.
    for j in range(n_slices):
        a, b = ring_index(n_stacks - 1, j), ring_index(n_stacks - 1, j + 1)
        e1 = add_edge(a, b)
        e2 = add_edge(b, north)
        e3 = add_edge(north, a)
        faces.append(Face((a, b, north), (e1, e2, e3)))

    return Mesh(3, positions, springs, faces)


_OCTA_FACES = ((0, 3, 4), (0, 4, 5), (0, 5, 2), (0, 2, 3),
               (1, 4, 3), (1, 5, 4), (1, 2, 5), (1, 3, 2))
_OCTA_EDGES = ((0, 3), (3, 4), (4, 0), (4, 5), (5, 0), (5, 2),
               (2, 0), (2, 3), (1, 4), (1, 3), (1, 5), (2, 1))


def build_sphere_octa(iterations: int, radius: float,
                      ks: float = 800.0, kd: float = 15.0) -> Mesh:
    """Recursive octahedron subdivision onto the sphere.

    The kernel has 6 particles (two poles on z, four equatorial points
    normalized by 1/sqrt(2)), 8 faces and 12 structural springs. Each
    iteration splits every face into four: edge midpoints are shared
    across adjacent faces via an undirected-edge map and projected to
    the sphere by normalization; the face list replaces each parent
    with its center child and appends the other three.
    """
    if iterations < 0:
        raise ConstructionError("iterations must be >= 0")
    if radius <= 0:
        raise ConstructionError("sphere radius must be > 0")
    s = 1.0 / math.sqrt(2.0)
    verts: list[np.ndarray] = [
        radius * np.array(v)
        for v in ((0.0, 0.0, 1.0), (0.0, 0.0, -1.0),
                  (-s, -s, 0.0), (s, -s, 0.0), (s, s, 0.0), (-s, s, 0.0))
    ]
    faces: list[tuple[int, int, int]] = list(_OCTA_FACES)

    for _ in range(iterations):
        midpoint: dict[frozenset[int], int] = {}

        def mid(a: int, b: int) -> int:
            key = frozenset((a, b))
            idx = midpoint.get(key)
            if idx is None:
                p = 0.5 * (verts[a] + verts[b])
                p = p * (radius / np.linalg.norm(p))
                idx = len(verts)
                verts.append(p)
                midpoint[key] = idx
            return idx

        centers: list[tuple[int, int, int]] = []
        corners: list[tuple[int, int, int]] = []
        for (a, b, c) in faces:
            ma, mb, mc = mid(a, b), mid(b, c), mid(c, a)
            centers.append((ma, mb, mc))
            corners.extend([(a, ma, mc), (ma, b, mb), (mc, mb, c)])
        faces = centers + corners

    positions = np.stack(verts)
    springs: list[Spring] = []
    seen: dict[frozenset[int], int] = {}
    out_faces: list[Face] = []
    if iterations == 0:
        # Kernel spring order follows the original edge listing.
        for (a, b) in _OCTA_EDGES:
            seen[frozenset((a, b))] = len(springs)
            springs.append(_structural(a, b, positions, ks, kd))
    for (a, b, c) in faces:
        edge_ids = []
        for (u, v) in ((a, b), (b, c), (c, a)):
            key = frozenset((u, v))
            idx = seen.get(key)
            if idx is None:
                idx = len(springs)
                seen[key] = idx
                springs.append(_structural(u, v, positions, ks, kd))
            edge_ids.append(idx)
        out_faces.append(Face((a, b, c), tuple(edge_ids)))

    return Mesh(3, positions, springs, out_faces)


def link_layers(inner: Mesh, outer: Mesh, rks: float = 700.0, rkd: float = 50.0,
                mass: float = 1.0) -> LayeredBody:
    """Join two same-topology meshes into a two-layer body.

    Radius spring i joins inner i to outer i. Shear springs generalize
    the ring's neighbor rule by structural-spring index j: shear-left
    joins inner sp1(j) to outer sp2(j), shear-right inner sp2(j) to
    outer sp1(j).
    """
    if inner.vertex_count != outer.vertex_count:
        raise ConstructionError("layer vertex counts differ")
    if len(inner.springs) != len(outer.springs):
        raise ConstructionError("layer spring counts differ")
    for si, so in zip(inner.springs, outer.springs):
        if si.pair != so.pair:
            raise ConstructionError("layer topologies differ")
    n = inner.vertex_count
    positions = np.vstack([inner.positions, outer.positions])
    dim = Dimension.TWO if inner.space == 2 else Dimension.THREE
    body = LayeredBody(dim, inner.space, positions, n, np.full(2 * n, float(mass)))

    body.add_springs("inner_springs", inner.springs)
    body.add_springs(
        "outer_springs",
        [Spring(s.i + n, s.j + n, s.kind, s.rest_length, s.ks, s.kd) for s in outer.springs],
    )
    radius = []
    for i in range(n):
        rest = _distance(positions[i], positions[n + i])
        if rest == 0.0:
            raise ConstructionError("inner and outer layers coincide; need r_inner < r_outer")
        radius.append(Spring(i, n + i, SpringKind.RADIUS, rest, rks, rkd))
    body.add_springs("radius_springs", radius)

    left, right = [], []
    for s in inner.springs:
        left.append(Spring(s.i, n + s.j, SpringKind.SHEAR_LEFT,
                           _distance(positions[s.i], positions[n + s.j]), rks, rkd))
        right.append(Spring(s.j, n + s.i, SpringKind.SHEAR_RIGHT,
                            _distance(positions[s.j], positions[n + s.i]), rks, rkd))
    body.add_springs("shear_left", left)
    body.add_springs("shear_right", right)

    body.inner_faces.extend(inner.faces)
    body.outer_faces.extend(
        Face(tuple(v + n for v in f.vertices), f.edges) for f in outer.faces
    )
    return body


def build_layered_sphere_octa(iterations: int, r_inner: float, r_outer: float,
                              cfg: "SimConfig") -> LayeredBody:
    """Two-layer uniform sphere (octa subdivision at both radii)."""
    if not (0 < r_inner < r_outer):
        raise ConstructionError("need 0 < r_inner < r_outer")
    inner = build_sphere_octa(iterations, r_inner, cfg.ks, cfg.kd)
    outer = build_sphere_octa(iterations, r_outer, cfg.ks, cfg.kd)
    return link_layers(inner, outer, rks=cfg.rks, rkd=cfg.rkd, mass=cfg.mass)


def build_layered_sphere_polar(n_slices: int, n_stacks: int, r_inner: float,
                               r_outer: float, cfg: "SimConfig") -> LayeredBody:
    """Two-layer polar sphere."""
    if not (0 < r_inner < r_outer):
        raise ConstructionError("need 0 < r_inner < r_outer")
    inner = build_sphere_polar(n_slices, n_stacks, r_inner, cfg.ks, cfg.kd)
    outer = build_sphere_polar(n_slices, n_stacks, r_outer, cfg.ks, cfg.kd)
    return link_layers(inner, outer, rks=cfg.rks, rkd=cfg.rkd, mass=cfg.mass)


def translate(body: LayeredBody, offset: Sequence[float]) -> LayeredBody:
    """Shift every particle by `offset` (used to place bodies in the world)."""
    off = np.asarray(offset, dtype=float)
    if off.shape != (body.space,):
        raise ConstructionError(f"offset must be a {body.space}-vector")
    body.pos += off
    return body


# -- export ------------------------------------------------------------------


def body_to_json(body: LayeredBody) -> dict:
    """Mesh export document, also used for snapshots' topology frames."""
    springs = []
    for _, container in body.spring_containers():
        for s in container:
            springs.append({
                "kind": s.kind.value,
                "i": s.i,
                "j": s.j,
                "rest": s.rest_length,
                "ks": s.ks,
                "kd": s.kd,
            })
    return {
        "dimension": int(body.dimension),
        "particles": [
            {"m": float(body.mass[k]), "pos": body.pos[k].tolist(), "vel": body.vel[k].tolist()}
            for k in range(body.n_particles)
        ],
        "springs": springs,
        "faces": [list(f.vertices) for f in body.inner_faces + body.outer_faces],
    }


def mesh_to_json(mesh: Mesh) -> dict:
    """Export document for a bare single-layer mesh."""
    return {
        "dimension": 3 if mesh.space == 3 else 2,
        "particles": [
            {"m": 1.0, "pos": mesh.positions[k].tolist(), "vel": [0.0] * mesh.space}
            for k in range(mesh.vertex_count)
        ],
        "springs": [
            {"kind": s.kind.value, "i": s.i, "j": s.j, "rest": s.rest_length,
             "ks": s.ks, "kd": s.kd}
            for s in mesh.springs
        ],
        "faces": [list(f.vertices) for f in mesh.faces],
    }
