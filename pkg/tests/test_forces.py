import numpy as np
import pytest

from squish.config import SimConfig
from squish.engine import build_body, build_config
from squish.forces import (
    DragState,
    PressureParams,
    accumulate_forces,
    damping_force,
    drag_force,
    find_closest_point,
    gravity_force,
    hooke_force,
    pressure_forces,
    spring_normal_2d,
    spring_normal_3d,
    total_spring_forces,
    volume_faces,
    volume_gauss,
)
from squish.mesh import (
    Dimension,
    LayeredBody,
    Spring,
    SpringKind,
    build_1d,
    build_ring_2d,
    build_sphere_octa,
    link_layers,
)


def ring_body_from_points(pts, ks=1.0, kd=0.0):
    """Bare single-layer ring body over explicit points (test scaffold)."""
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    springs = []
    for i in range(n):
        j = (i + 1) % n
        rest = float(np.sqrt(np.sum((pts[j] - pts[i]) ** 2)))
        springs.append(Spring(i, j, SpringKind.STRUCTURAL, rest, ks, kd))
    body = LayeredBody(Dimension.TWO, 2, pts, 0, np.ones(n))
    body.add_springs("outer_springs", springs)
    return body


def shoelace(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


class TestGravity:
    def test_hand_evaluation_3d(self):
        body = link_layers(build_sphere_octa(0, 1.0), build_sphere_octa(0, 2.0))
        np.testing.assert_allclose(gravity_force(body.particle(0), 9.8), [0.0, -9.8, 0.0])

    def test_zero_field(self):
        body = build_1d((0.0, 2.0), (0.0, 1.0))
        np.testing.assert_allclose(gravity_force(body.particle(0), 0.0), [0.0, 0.0])

    def test_default_mass_magnitude(self):
        body = build_1d((0.0, 2.0), (0.0, 1.0), mass=1.0)
        assert np.linalg.norm(gravity_force(body.particle(1), 9.8)) == pytest.approx(9.8)


class TestHooke:
    def test_resting_spring(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 800.0, 0.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        f1, f2 = hooke_force(s, pos)
        np.testing.assert_array_equal(f1, [0.0, 0.0])
        np.testing.assert_array_equal(f2, [0.0, 0.0])

    def test_extension_pulls_inward(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 2.0, 800.0, 0.0)
        pos = np.array([[0.0, 0.0], [3.0, 0.0]])
        f1, f2 = hooke_force(s, pos)
        np.testing.assert_allclose(f1, [800.0, 0.0])   # toward sp2
        np.testing.assert_allclose(f2, [-800.0, 0.0])  # toward sp1

    def test_contraction_pushes_apart(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 2.0, 800.0, 0.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        f1, f2 = hooke_force(s, pos)
        np.testing.assert_allclose(f1, [-800.0, 0.0])
        np.testing.assert_allclose(f2, [800.0, 0.0])

    def test_degenerate_zero(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 800.0, 0.0)
        pos = np.zeros((2, 2))
        f1, f2 = hooke_force(s, pos)
        np.testing.assert_array_equal(f1, [0.0, 0.0])
        np.testing.assert_array_equal(f2, [0.0, 0.0])

    def test_action_reaction_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            pos = rng.normal(size=(2, 3))
            s = Spring(0, 1, SpringKind.STRUCTURAL, float(rng.uniform(0.1, 2.0)), 800.0, 0.0)
            f1, f2 = hooke_force(s, pos)
            np.testing.assert_array_equal(f1, -f2)


class TestDamping:
    def test_no_relative_motion(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 0.0, 15.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        vel = np.array([[3.0, 1.0], [3.0, 1.0]])
        f1, f2 = damping_force(s, pos, vel)
        np.testing.assert_array_equal(f1, [0.0, 0.0])
        np.testing.assert_array_equal(f2, [0.0, 0.0])

    def test_hand_evaluation(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 0.0, 15.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        vel = np.array([[0.0, 0.0], [2.0, 0.0]])  # separating at 2 m/s
        f1, f2 = damping_force(s, pos, vel)
        # scalar 30 opposing separation: sp2 pushed back toward sp1
        np.testing.assert_allclose(f1, [30.0, 0.0])
        np.testing.assert_allclose(f2, [-30.0, 0.0])

    def test_tangential_motion_ignored(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 0.0, 15.0)
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        vel = np.array([[0.0, 0.0], [0.0, 5.0]])
        f1, f2 = damping_force(s, pos, vel)
        np.testing.assert_allclose(f1, [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(f2, [0.0, 0.0], atol=1e-15)


class TestTotalSpringForces:
    def test_rest_pose_unchanged(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        body.force[:] = 0.0
        total_spring_forces(body)
        assert np.abs(body.force).max() < 1e-9

    def test_single_spring_equal_opposite(self):
        body = build_1d((0.0, 0.0), (1.0, 0.0))
        body.pos[1, 0] = 1.5
        body.force[:] = 0.0
        total_spring_forces(body)
        np.testing.assert_array_equal(body.force[0], -body.force[1])
        assert np.linalg.norm(body.force[0]) > 0

    def test_inflated_ring_symmetry(self):
        # Symmetry oracle: evaluate each structural spring independently.
        body = build_ring_2d(4, 1.0, 2.0, SimConfig())
        center = np.array([0.0, 0.0])
        body.pos[:] = center + (body.pos - center) * 1.1
        per_particle = np.zeros_like(body.pos)
        for s in body.outer_springs:
            f1, f2 = hooke_force(s, body.pos)
            per_particle[s.i] += f1
            per_particle[s.j] += f2
        outer = per_particle[4:]
        mags = np.linalg.norm(outer, axis=1)
        assert np.allclose(mags, mags[0], rtol=1e-9)
        for k in range(4):
            radial = body.pos[4 + k] / np.linalg.norm(body.pos[4 + k])
            assert float(np.dot(outer[k], radial)) < 0  # points inward

    def test_uniformity_correction_scales_structural(self):
        inner = build_sphere_octa(1, 1.5)
        outer = build_sphere_octa(1, 2.0)
        body = link_layers(inner, outer)
        rng = np.random.default_rng(3)
        body.pos += rng.normal(0.0, 0.05, body.pos.shape)
        base = np.zeros_like(body.pos)
        body.force[:] = 0.0
        total_spring_forces(body, uniformity_correction=False)
        base[:] = body.force
        body.force[:] = 0.0
        total_spring_forces(body, uniformity_correction=True)
        # Kernel vertices touch 4 structural springs -> structural part
        # scaled by 6/4; with radius/shear springs removed the comparison
        # is direct per particle.
        def structural_only():
            b = link_layers(inner, outer)
            b.pos[:] = body.pos
            b.force[:] = 0.0
            b.radius_springs.clear()
            b.shear_left.clear()
            b.shear_right.clear()
            b._caches.clear()
            return b

        body2 = structural_only()
        total_spring_forces(body2, uniformity_correction=True)
        body3 = structural_only()
        total_spring_forces(body3, uniformity_correction=False)
        np.testing.assert_allclose(body2.force[0], body3.force[0] * 1.5, rtol=1e-12)


class TestDrag:
    def test_resting_drag_spring(self):
        body = build_ring_2d(4, 1.0, 2.0, SimConfig())
        d = DragState(anchor=body.pos[4].copy(), target=4, rest_m=0.0)
        np.testing.assert_array_equal(drag_force(d, body), [0.0, 0.0])

    def test_anchor_above(self):
        body = build_ring_2d(4, 1.0, 2.0, SimConfig())
        d = DragState(anchor=body.pos[4] + np.array([0.0, 1.0]), target=4,
                      ks_m=150.0, kd_m=25.0)
        np.testing.assert_allclose(drag_force(d, body), [0.0, 150.0])

    def test_inactive_contributes_nothing(self):
        cfg = build_config({"g": 0.0, "pressure_nrt": 0.0})
        body = build_body({"kind": "ring2d", "center": [0.0, 0.0]}, cfg)
        d = DragState(anchor=np.array([10.0, 10.0]), target=12, active=False)
        accumulate_forces(body, cfg, d)
        assert np.abs(body.force).max() < 1e-9

    def test_locality(self):
        cfg = build_config({"g": 0.0, "pressure_nrt": 0.0})
        body = build_body({"kind": "ring2d", "center": [0.0, 0.0]}, cfg)
        d = DragState(anchor=np.array([10.0, 10.0]), target=15)
        accumulate_forces(body, cfg, None)
        base = body.force.copy()
        accumulate_forces(body, cfg, d)
        changed = np.any(np.abs(body.force - base) > 0, axis=1)
        assert changed[15] and changed.sum() == 1


class TestFindClosestPoint:
    def test_exact_hit(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        assert find_closest_point(body, body.pos[12 + 5]) == 12 + 5

    def test_exhaustive_oracle(self):
        body = build_ring_2d(4, 1.0, 2.0, SimConfig())
        anchor = np.array([10.0, 0.0])
        d = np.linalg.norm(body.pos[body.outer_slice] - anchor, axis=1)
        assert find_closest_point(body, anchor) == 4 + int(np.argmin(d))
        assert find_closest_point(body, anchor) == 4  # particle at (r, 0)

    def test_tie_lowest_index(self):
        body = build_ring_2d(4, 1.0, 2.0, SimConfig())
        # (0, 10) is equidistant from outer particles 1 (0,1)... use x axis:
        # anchor on +y axis between outer 1 (0,2) and ... construct symmetric tie
        anchor = np.array([0.0, 0.0])  # equidistant from all four outer particles
        assert find_closest_point(body, anchor) == 4


class TestNormals:
    def test_2d_rotation(self):
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 1.0, 0.0)
        np.testing.assert_allclose(spring_normal_2d(s, pos), [0.0, 1.0])
        pos2 = np.array([[0.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(spring_normal_2d(s, pos2), [-1.0, 0.0])

    def test_2d_zero_length(self):
        pos = np.zeros((2, 2))
        s = Spring(0, 1, SpringKind.STRUCTURAL, 0.0, 1.0, 0.0)
        np.testing.assert_array_equal(spring_normal_2d(s, pos), [0.0, 0.0])

    def test_2d_length_and_orthogonality(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pos = rng.normal(size=(2, 2))
            s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 1.0, 0.0)
            n = spring_normal_2d(s, pos)
            delta = pos[1] - pos[0]
            assert np.linalg.norm(n) == pytest.approx(np.linalg.norm(delta), abs=1e-15)
            assert abs(float(np.dot(n, delta))) < 1e-12

    def test_3d_estimate(self):
        s = Spring(0, 1, SpringKind.STRUCTURAL, 1.0, 1.0, 0.0)
        pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        np.testing.assert_allclose(spring_normal_3d(s, pos), [0.0, 0.0, -1.0])
        pos = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        # The estimate returns the vector itself here; implemented as-is.
        np.testing.assert_allclose(spring_normal_3d(s, pos), [0.0, 1.0, 0.0])
        pos = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(spring_normal_3d(s, pos), [1.0, 0.0, 0.0])


class TestVolume:
    def test_square_ring(self):
        body = ring_body_from_points([[1, 0], [0, 1], [-1, 0], [0, -1]])
        assert volume_gauss(body, "outer") == pytest.approx(2.0, abs=1e-12)

    def test_gauss_matches_shoelace_on_random_rings(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(4, 40))
            angles = np.sort(rng.uniform(0, 2 * np.pi, n))
            radii = rng.uniform(0.3, 3.0, n)
            center = rng.uniform(-2, 2, 2)
            pts = np.column_stack([center[0] + radii * np.cos(angles),
                                   center[1] + radii * np.sin(angles)])
            body = ring_body_from_points(pts)
            area = shoelace(pts)
            assert abs(volume_gauss(body, "outer") - area) <= 1e-9 * area

    def test_regular_64gon_near_pi(self):
        angles = np.arange(64) * 2 * np.pi / 64
        pts = np.column_stack([np.cos(angles), np.sin(angles)])
        v = volume_gauss(ring_body_from_points(pts), "outer")
        assert abs(v - np.pi) / np.pi < 0.005

    def test_collapsed_ring(self):
        body = ring_body_from_points([[0, 0], [0, 0], [0, 0], [0, 0]])
        assert volume_gauss(body, "outer") == 0.0
        assert any(k == "degenerate_spring" for k, _ in body.events)

    def test_open_topology_rejected(self):
        body = build_1d((0.0, 2.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            volume_gauss(body, "outer")

    def test_translation_invariance(self):
        angles = np.arange(16) * 2 * np.pi / 16
        pts = np.column_stack([np.cos(angles), np.sin(angles)])
        v0 = volume_gauss(ring_body_from_points(pts), "outer")
        v1 = volume_gauss(ring_body_from_points(pts + np.array([100.0, -40.0])), "outer")
        assert v1 == pytest.approx(v0, rel=1e-9)

    def test_3d_face_oracle(self):
        # Exact divergence-theorem volume of the unit octahedron is 4/3
        # (8 faces, |p1.(p2xp3)| = 1 each).
        body = link_layers(build_sphere_octa(0, 1.0), build_sphere_octa(0, 2.0))
        assert volume_faces(body, "inner") == pytest.approx(4.0 / 3.0, rel=1e-12)


class TestPressure:
    def test_zero_nrt_no_change(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        body.force[:] = 0.0
        pressure_forces(body, PressureParams(0.0, enabled=True))
        assert np.abs(body.force).max() == 0.0

    def test_closed_ring_net_force_vanishes(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        body.force[:] = 0.0
        pressure_forces(body, PressureParams(20.0, enabled=True))
        np.testing.assert_allclose(body.force.sum(axis=0), [0.0, 0.0], atol=1e-12)

    def test_outward_push(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        body.force[:] = 0.0
        pressure_forces(body, PressureParams(20.0, enabled=True))
        outer = body.force[body.outer_slice]
        radial = body.pos[body.outer_slice]
        radial = radial / np.linalg.norm(radial, axis=1)[:, None]
        assert np.all(np.einsum("ij,ij->i", outer, radial) > 0)

    def test_volume_floor_event(self):
        body = build_ring_2d(12, 1.5, 2.0, SimConfig())
        volume_gauss(body, "outer")
        body.initial_volumes["outer"] = volume_gauss(body, "outer")
        body.initial_volumes["inner"] = volume_gauss(body, "inner")
        body.pos[:] *= 1e-9  # collapse far below the floor
        body.force[:] = 0.0
        pressure_forces(body, PressureParams(20.0, enabled=True))
        assert any(k == "volume_floor" for k, _ in body.events)
        assert np.isfinite(body.force).all()


class TestAccumulate:
    def test_1d_skips_pressure(self):
        cfg = build_config({"g": 0.0})
        body = build_1d((0.0, 2.0), (0.0, 1.0))
        accumulate_forces(body, cfg, None)
        # At rest with g=0, only pressure could act; it must not.
        assert np.abs(body.force).max() < 1e-9

    def test_all_disabled_zero(self):
        cfg = build_config({"g": 0.0, "pressure_nrt": 0.0})
        body = build_body({"kind": "ring2d", "center": [0.0, 0.0]}, cfg)
        accumulate_forces(body, cfg, None)
        assert np.abs(body.force).max() < 1e-9

    def test_pairwise_newton_third_law(self):
        # Oracle: independent per-spring evaluation; each pair must cancel
        # exactly, so the pairwise total is exactly zero.
        cfg = SimConfig()
        body = build_body({"kind": "sphere_octa", "iterations": 1}, cfg)
        rng = np.random.default_rng(0)
        body.pos += rng.normal(0, 0.1, body.pos.shape)
        body.vel += rng.normal(0, 1.0, body.vel.shape)
        total = np.zeros(3)
        for s in body.all_springs():
            f1, f2 = hooke_force(s, body.pos)
            d1, d2 = damping_force(s, body.pos, body.vel)
            pair_sum = (f1 + f2) + (d1 + d2)
            np.testing.assert_array_equal(f1, -f2)
            np.testing.assert_array_equal(d1, -d2)
            total += pair_sum
        np.testing.assert_array_equal(total, np.zeros(3))

    def test_zero_velocity_no_damping(self):
        cfg = build_config({"ks": 0.0, "rks": 0.0, "g": 0.0, "pressure_nrt": 0.0})
        body = build_body({"kind": "ring2d"}, cfg)
        rng = np.random.default_rng(5)
        body.pos += rng.normal(0, 0.2, body.pos.shape)  # stretched, but static
        accumulate_forces(body, cfg, None)
        assert np.abs(body.force).max() == 0.0

    def test_resting_null_invariant(self):
        cfg = build_config({"g": 0.0, "pressure_nrt": 0.0})
        body = build_body({"kind": "ring2d"}, cfg)
        accumulate_forces(body, cfg, None)
        assert np.abs(body.force).max() < 1e-9 * cfg.ks
