"""World geometry: raycasting against the marching oracle, collision queries."""

import math

import numpy as np
import pytest

from fieldnav.geometry import (
    Bounds,
    CollisionEvent,
    DiscBody,
    GeometryError,
    ScanConfig,
    WorldModel,
    collisions,
    point_in_polygon,
    raycast,
)

BIG = WorldModel(Bounds(-100, -100, 100, 100))
CFG = ScanConfig(ray_count=100, max_range=10.0)


def march_ray_length(world, others, origin, direction, max_range, step=0.001):
    """Test-only oracle: walk the ray in 1 mm steps until a point lands inside
    an obstacle, outside the arena, or inside a disc. Vectorized over the
    sample points but still a plain fine-step march."""
    d = np.asarray(direction) / np.linalg.norm(direction)
    ts = np.arange(0.0, max_range + step, step)
    pts = origin[None, :] + ts[:, None] * d[None, :]
    b = world.bounds
    blocked = ~(
        (pts[:, 0] >= b.x_min)
        & (pts[:, 0] <= b.x_max)
        & (pts[:, 1] >= b.y_min)
        & (pts[:, 1] <= b.y_max)
    )
    for poly in world.obstacles:
        x1, y1 = poly[:, 0], poly[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        inside = np.zeros(len(pts), dtype=bool)
        for e in range(len(poly)):
            cond = (y1[e] > pts[:, 1]) != (y2[e] > pts[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = x1[e] + (pts[:, 1] - y1[e]) * (x2[e] - x1[e]) / (y2[e] - y1[e])
            inside ^= cond & (pts[:, 0] < x_cross)
        blocked |= inside
    for disc in others:
        blocked |= np.linalg.norm(pts - np.asarray(disc.center)[None, :], axis=1) < disc.radius
    hits = np.nonzero(blocked)[0]
    return min(float(ts[hits[0]]), max_range) if len(hits) else max_range


def test_empty_world_all_rays_max_range():
    scan = raycast(BIG, [], (0.0, 0.0, 0.0), CFG)
    assert np.allclose(scan.ranges, 10.0)
    assert not scan.hit_mask.any()


def test_square_room_axis_aligned_wall():
    room = WorldModel(Bounds(-8, -8, 8, 8))
    scan = raycast(room, [], (0.0, 0.0, 0.0), CFG)
    assert scan.ranges[0] == pytest.approx(8.0, abs=1e-12)
    assert scan.hit_mask[0]


def test_disc_hit_straight_ahead():
    scan = raycast(BIG, [DiscBody(center=(5.0, 0.0), radius=0.17)], (0.0, 0.0, 0.0), CFG)
    assert scan.ranges[0] == pytest.approx(4.83, abs=1e-12)
    assert scan.hit_mask[0]


def test_ray_at_exact_max_range_is_not_a_hit():
    room = WorldModel(Bounds(-10, -10, 10, 10))
    scan = raycast(room, [], (0.0, 0.0, 0.0), CFG)
    assert scan.ranges[0] == 10.0
    assert not scan.hit_mask[0]


def test_pose_outside_bounds_rejected():
    with pytest.raises(GeometryError):
        raycast(BIG, [], (200.0, 0.0, 0.0), CFG)


def test_heading_rotates_scan():
    scan = raycast(BIG, [DiscBody(center=(0.0, 5.0), radius=0.5)], (0.0, 0.0, math.pi / 2), CFG)
    # target straight ahead in the robot frame
    assert scan.ranges[0] == pytest.approx(4.5, abs=1e-9)


def _random_world(rng):
    # star polygons: evenly wound angles with jitter, so they are always simple
    polys = []
    for _ in range(rng.integers(1, 4)):
        cx, cy = rng.uniform(-6, 6, size=2)
        r = rng.uniform(0.5, 2.0)
        k = int(rng.integers(3, 8))
        angles = 2 * math.pi * np.arange(k) / k + rng.uniform(-0.3, 0.3, size=k) * 2 * math.pi / k
        radii = r * rng.uniform(0.5, 1.0, size=k)
        poly = np.stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)], axis=1)
        polys.append(poly)
    return WorldModel(Bounds(-20, -20, 20, 20), polys)


def test_raycast_matches_marching_oracle():
    rng = np.random.default_rng(7)
    cfg = ScanConfig(ray_count=1, max_range=10.0)
    checked = 0
    while checked < 200:
        world = _random_world(rng)
        pose = (rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-math.pi, math.pi))
        if any(point_in_polygon(np.array(pose[:2]), p) for p in world.obstacles):
            continue
        others = [DiscBody(center=(rng.uniform(-8, 8), rng.uniform(-8, 8)), radius=0.3)]
        if np.linalg.norm(np.array(others[0].center) - np.array(pose[:2])) < 0.4:
            continue
        scan = raycast(world, others, pose, cfg)
        direction = np.array([math.cos(pose[2]), math.sin(pose[2])])
        expected = march_ray_length(world, others, np.array(pose[:2]), direction, 10.0)
        assert scan.ranges[0] == pytest.approx(expected, abs=2e-3)
        checked += 1


def test_raycast_rotation_symmetry():
    rng = np.random.default_rng(3)
    poly = np.array([[2.0, -1.0], [4.0, -1.5], [5.0, 1.0], [3.0, 2.0]])
    for _ in range(20):
        phi = rng.uniform(0, 2 * math.pi)
        c, s = math.cos(phi), math.sin(phi)
        rot = np.array([[c, -s], [s, c]])
        world_a = WorldModel(Bounds(-1000, -1000, 1000, 1000), [poly])
        world_b = WorldModel(Bounds(-1000, -1000, 1000, 1000), [poly @ rot.T])
        pose_a = (0.5, -0.25, 0.1)
        start_b = rot @ np.array(pose_a[:2])
        pose_b = (start_b[0], start_b[1], pose_a[2] + phi)
        scan_a = raycast(world_a, [], pose_a, CFG)
        scan_b = raycast(world_b, [], pose_b, CFG)
        np.testing.assert_allclose(scan_a.ranges, scan_b.ranges, atol=1e-9)


def test_raycast_disc_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(50):
        center = rng.uniform(-5, 5, size=2)
        radius = rng.uniform(0.1, 1.0)
        pose = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi))
        o = np.array(pose[:2])
        if np.linalg.norm(o - center) <= radius + 0.05:
            continue
        cfg = ScanConfig(ray_count=8, max_range=10.0)
        scan = raycast(BIG, [DiscBody(center=tuple(center), radius=radius)], pose, cfg)
        for k in range(8):
            ang = pose[2] + 2 * math.pi * k / 8
            d = np.array([math.cos(ang), math.sin(ang)])
            oc = o - center
            b = float(d @ oc)
            disc = b * b - float(oc @ oc) + radius**2
            expected = 10.0
            if disc >= 0:
                t1 = -b - math.sqrt(disc)
                t2 = -b + math.sqrt(disc)
                t = t1 if t1 >= 0 else (t2 if t2 >= 0 else math.inf)
                expected = min(t, 10.0)
            assert scan.ranges[k] == pytest.approx(expected, abs=1e-9)


def test_hit_mask_equivalence():
    rng = np.random.default_rng(5)
    for _ in range(20):
        world = _random_world(rng)
        pose = (rng.uniform(-3, 3), rng.uniform(-3, 3), 0.0)
        if any(point_in_polygon(np.array(pose[:2]), p) for p in world.obstacles):
            continue
        scan = raycast(world, [], pose, CFG)
        assert ((scan.ranges > 0) & (scan.ranges < 10.0) == scan.hit_mask).all()
        assert (scan.ranges <= 10.0).all() and (scan.ranges > 0).all()


def test_collision_pairs():
    w = BIG
    r = 0.17
    close = [DiscBody((0.0, 0.0), r), DiscBody((0.30, 0.0), r)]
    events = collisions(close, w)
    assert CollisionEvent("robot", 0, 1) in events

    boundary = [DiscBody((0.0, 0.0), r), DiscBody((0.34, 0.0), r)]
    assert collisions(boundary, w) == []


def test_collision_with_wall_polygon():
    wall = np.array([[1.0, -2.0], [1.3, -2.0], [1.3, 2.0], [1.0, 2.0]])
    world = WorldModel(Bounds(-10, -10, 10, 10), [wall])
    events = collisions([DiscBody((0.90, 0.0), 0.17)], world)
    assert events == [CollisionEvent("obstacle", 0, 0)]
    assert collisions([DiscBody((0.5, 0.0), 0.17)], world) == []


def test_collision_symmetric_irreflexive():
    bodies = [DiscBody((0.0, 0.0), 0.2), DiscBody((0.1, 0.0), 0.2), DiscBody((5.0, 5.0), 0.2)]
    events = collisions(bodies, BIG)
    pairs = {(e.i, e.j) for e in events if e.kind == "robot"}
    assert pairs == {(0, 1)}
    for i, j in pairs:
        assert i != j


def test_polygon_validation():
    with pytest.raises(GeometryError):
        WorldModel(Bounds(-5, -5, 5, 5), [np.array([[0, 0], [1, 0]])])
    bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]])
    with pytest.raises(GeometryError):
        WorldModel(Bounds(-5, -5, 5, 5), [bowtie])
    with pytest.raises(GeometryError):
        WorldModel(Bounds(-5, -5, 5, 5), [np.array([[0, 0], [9, 0], [9, 9]])])


def test_clockwise_polygon_is_normalized():
    cw = np.array([[0, 0], [0, 1], [1, 1], [1, 0]])
    world = WorldModel(Bounds(-5, -5, 5, 5), [cw])
    scan = raycast(world, [], (-2.0, 0.5, 0.0), ScanConfig(4, 10.0))
    assert scan.ranges[0] == pytest.approx(2.0, abs=1e-12)
