"""2D world geometry: polygonal obstacles, disc robots, raycasting, collision queries.

The world is a closed rectangular arena whose boundary acts as a wall, plus
simple (possibly nonconvex) polygon obstacles. All queries are pure functions
of their inputs; a WorldModel is immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric input (bad polygon, pose outside arena, ...)."""


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned arena rectangle."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class DiscBody:
    """Disc-shaped robot body in the world frame."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError(f"disc radius must be positive, got {self.radius}")


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def ccw(a, b, c):
        return (c[1] - a[1]) * (b[0] - a[0]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = ccw(p3, p4, p1)
    d2 = ccw(p3, p4, p2)
    d3 = ccw(p1, p2, p3)
    d4 = ccw(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    return False


def _polygon_is_simple(verts: np.ndarray) -> bool:
    """True if no two non-adjacent edges intersect."""
    n = len(verts)
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                return False
    return True


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class WorldModel:
    """Static arena: boundary rectangle plus simple polygon obstacles.

    Polygon vertices are given counterclockwise in meters. The arena boundary
    is treated as a solid wall for both raycasting and collision queries.
    """

    def __init__(self, bounds: Bounds, obstacles: list[np.ndarray] | None = None):
        self.bounds = bounds
        polys = []
        for poly in obstacles or []:
            verts = np.asarray(poly, dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
                raise GeometryError("polygon needs >= 3 (x, y) vertices")
            if not _polygon_is_simple(verts):
                raise GeometryError("polygon is self-intersecting")
            if _signed_area(verts) < 0:
                verts = verts[::-1].copy()
            if not all(bounds.contains(x, y) for x, y in verts):
                raise GeometryError("polygon vertex outside arena bounds")
            verts.setflags(write=False)
            polys.append(verts)
        self.obstacles: tuple[np.ndarray, ...] = tuple(polys)

        # Flattened edge arrays (obstacles + the four boundary walls), cached
        # once so raycasts are a single vectorized pass.
        starts, ends = [], []
        for verts in self.obstacles:
            starts.append(verts)
            ends.append(np.roll(verts, -1, axis=0))
        b = bounds
        wall = np.array(
            [[b.x_min, b.y_min], [b.x_max, b.y_min], [b.x_max, b.y_max], [b.x_min, b.y_max]]
        )
        starts.append(wall)
        ends.append(np.roll(wall, -1, axis=0))
        self._edge_a = np.concatenate(starts)
        self._edge_v = np.concatenate(ends) - self._edge_a
        self._edge_a.setflags(write=False)
        self._edge_v.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return len(self._edge_a)


@dataclass(frozen=True)
class ScanConfig:
    """Range-sensor configuration: M rays over 360 degrees, clipped at d_max.

    Ray k (0-based) has robot-frame bearing 2*pi*k/M; the angular resolution
    is 2*pi/M.
    """

    ray_count: int
    max_range: float

    def __post_init__(self):
        if self.ray_count < 1:
            raise GeometryError("ray_count must be positive")
        if self.max_range <= 0:
            raise GeometryError("max_range must be positive")

    @property
    def resolution(self) -> float:
        return 2.0 * math.pi / self.ray_count

    def bearings(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.ray_count) / self.ray_count


# Per-config cache of unit direction vectors in the robot frame.
_DIR_CACHE: dict[tuple[int, float], np.ndarray] = {}


def _base_directions(cfg: ScanConfig) -> np.ndarray:
    key = (cfg.ray_count, cfg.max_range)
    dirs = _DIR_CACHE.get(key)
    if dirs is None:
        b = cfg.bearings()
        dirs = np.stack([np.cos(b), np.sin(b)], axis=1)
        dirs.setflags(write=False)
        _DIR_CACHE[key] = dirs
    return dirs


@dataclass
class Scan:
    """One 360-degree scan in the robot frame.

    ranges[k] is the distance along bearing 2*pi*k/M to the nearest surface,
    clipped at max_range. hit_mask[k] is true iff 0 < ranges[k] < max_range:
    rays reaching exactly max_range are non-hits.
    """

    ranges: np.ndarray
    max_range: float
    _vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def ray_count(self) -> int:
        return len(self.ranges)

    @property
    def hit_mask(self) -> np.ndarray:
        return (self.ranges > 0.0) & (self.ranges < self.max_range)

    def vectors(self) -> np.ndarray:
        """Ray endpoint vectors l_k in the robot frame, shape (M, 2)."""
        if self._vectors is None:
            cfg = ScanConfig(self.ray_count, self.max_range)
            self._vectors = self.ranges[:, None] * _base_directions(cfg)
        return self._vectors


def raycast(
    world: WorldModel,
    others: list[DiscBody],
    pose: tuple[float, float, float],
    cfg: ScanConfig,
) -> Scan:
    """Cast M rays from pose (x, y, psi) against obstacles, walls and discs.

    Bearings are in the robot frame (bearing 0 along the heading). Rays that
    hit nothing within max_range report exactly max_range.
    """
    x, y, psi = pose
    if not world.bounds.contains(x, y):
        raise GeometryError(f"pose ({x:.3f}, {y:.3f}) outside arena bounds")

    c, s = math.cos(psi), math.sin(psi)
    base = _base_directions(cfg)
    # Rotate robot-frame directions into the world frame.
    dirs = np.empty_like(base)
    dirs[:, 0] = base[:, 0] * c - base[:, 1] * s
    dirs[:, 1] = base[:, 0] * s + base[:, 1] * c

    origin = np.array([x, y])
    best = np.full(cfg.ray_count, cfg.max_range)

    # Ray-segment: origin + t*d = a + s*v. Solve with 2D cross products.
    ao = world._edge_a - origin  # (E, 2)
    v = world._edge_v
    denom = dirs[:, 0:1] * v[:, 1] - dirs[:, 1:2] * v[:, 0]  # (M, E)
    cross_av = ao[:, 0] * v[:, 1] - ao[:, 1] * v[:, 0]  # (E,)
    cross_ad = ao[None, :, 0] * dirs[:, 1:2] - ao[None, :, 1] * dirs[:, 0:1]  # (M, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_av[None, :] / denom
        u = cross_ad / denom
    valid = (np.abs(denom) > 1e-15) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(valid, t, np.inf)
    np.minimum(best, t.min(axis=1), out=best)

    # Ray-circle for other robots, all discs at once: |o + t*d - c|^2 = r^2.
    if others:
        centers = np.array([d.center for d in others], dtype=float)  # (N, 2)
        radii = np.array([d.radius for d in others], dtype=float)
        oc = origin[None, :] - centers  # (N, 2)
        b_half = dirs @ oc.T  # (M, N)
        c0 = np.einsum("ij,ij->i", oc, oc) - radii**2  # (N,)
        discrim = b_half * b_half - c0[None, :]
        with np.errstate(invalid="ignore"):
            sq = np.sqrt(discrim)
        t1 = -b_half - sq
        t2 = -b_half + sq
        tt = np.where(t1 >= 0.0, t1, np.where(t2 >= 0.0, t2, np.inf))
        tt = np.where(discrim >= 0.0, tt, np.inf)
        np.minimum(best, tt.min(axis=1), out=best)

    np.minimum(best, cfg.max_range, out=best)
    return Scan(ranges=best, max_range=cfg.max_range)


def point_in_polygon(point: np.ndarray, verts: np.ndarray) -> bool:
    """Even-odd crossing test."""
    x, y = point
    inside = False
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def point_polygon_distance(point: np.ndarray, verts: np.ndarray) -> float:
    """Distance from a point to a polygon boundary (0 treated separately by callers)."""
    a = verts
    b = np.roll(verts, -1, axis=0)
    ab = b - a
    ap = point[None, :] - a
    denom = np.einsum("ij,ij->i", ab, ab)
    tt = np.clip(np.divide(np.einsum("ij,ij->i", ap, ab), denom, where=denom > 0), 0.0, 1.0)
    closest = a + tt[:, None] * ab
    d = np.linalg.norm(point[None, :] - closest, axis=1)
    return float(d.min())


@dataclass(frozen=True)
class CollisionEvent:
    """kind is "robot" (j is the other robot index) or "obstacle"
    (j is the polygon index, -1 for the arena boundary)."""

    kind: str
    i: int
    j: int


def collisions(bodies: list[DiscBody], world: WorldModel) -> list[CollisionEvent]:
    """All robot-robot and robot-obstacle overlaps (strict inequality).

    Robot-robot: reported once per pair with i < j. Robot-obstacle: distance
    from the disc center to any obstacle polygon (or the arena boundary)
    strictly below the radius, or the center inside a polygon / outside the
    arena.
    """
    events: list[CollisionEvent] = []
    centers = [np.asarray(b.center, dtype=float) for b in bodies]
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            d = float(np.linalg.norm(centers[i] - centers[j]))
            if d < bodies[i].radius + bodies[j].radius:
                events.append(CollisionEvent("robot", i, j))
    b = world.bounds
    for i, body in enumerate(bodies):
        p = centers[i]
        r = body.radius
        for pi, verts in enumerate(world.obstacles):
            if point_in_polygon(p, verts) or point_polygon_distance(p, verts) < r:
                events.append(CollisionEvent("obstacle", i, pi))
        wall_clear = min(
            p[0] - b.x_min, b.x_max - p[0], p[1] - b.y_min, b.y_max - p[1]
        )
        if wall_clear < r:
            events.append(CollisionEvent("obstacle", i, -1))
    return events
