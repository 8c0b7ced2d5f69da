"""Scenario specifications, layout generators, and the scenario file format.

A ScenarioSpec is the unit of experiment reproducibility: world geometry,
robot starts/goals, all parameters, and the seed used to generate it.
Generators are deterministic in (layout, robot count, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .geometry import Bounds, GeometryError, WorldModel, point_in_polygon, point_polygon_distance
from .robot import KinematicsConfig
from .switching import RSParams

SCENARIO_VERSION = 1
METHODS = ("apf", "apf-rs", "apf-ls")
DEFAULT_STEP_LIMITS = {"flat": 1500, "cylind": 1500, "swap": 1000, "from-file": 3000}


class ScenarioError(ValueError):
    """Invalid scenario specification or generation failure."""


@dataclass(frozen=True)
class RobotSpec:
    start: tuple[float, float, float]
    goal: tuple[float, float]


@dataclass(frozen=True)
class SimParams:
    """Everything a run needs besides geometry and placements."""

    ray_count: int = 100
    max_range: float = 10.0
    blend_weight: float = 0.7
    att_gain: float = 1.0
    rep_gain: float = 1.0
    force_threshold: float = 5.0
    robot_radius: float = 0.17
    step_limit: int = 1000
    method: str = "apf-rs"
    weights_path: str | None = None
    classic_weighting: bool = False
    t_seq: int = 10
    rs: RSParams = field(default_factory=lambda: RSParams.defaults(100, 10.0))
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ScenarioError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.step_limit < 1:
            raise ScenarioError("step_limit must be >= 1")


@dataclass(frozen=True)
class ScenarioSpec:
    world: WorldModel
    robots: tuple[RobotSpec, ...]
    params: SimParams
    seed: int
    layout: str = "custom"

    def validate(self) -> None:
        r = self.params.robot_radius
        if not self.robots:
            raise ScenarioError("scenario has no robots")
        starts = [np.array(rb.start[:2]) for rb in self.robots]
        goals = [np.array(rb.goal) for rb in self.robots]
        for label, pts in (("start", starts), ("goal", goals)):
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    if float(np.linalg.norm(pts[i] - pts[j])) <= 2 * r:
                        raise ScenarioError(f"robot {label}s {i} and {j} are within 2r")
        for label, pts in (("start", starts), ("goal", goals)):
            for i, p in enumerate(pts):
                if not _placement_free(self.world, p, r):
                    raise ScenarioError(f"robot {i} {label} is in collision with the world")


def _placement_free(world: WorldModel, p: np.ndarray, radius: float) -> bool:
    b = world.bounds
    if min(p[0] - b.x_min, b.x_max - p[0], p[1] - b.y_min, b.y_max - p[1]) <= radius:
        return False
    for verts in world.obstacles:
        if point_in_polygon(p, verts) or point_polygon_distance(p, verts) <= radius:
            return False
    return True


# ---------------------------------------------------------------------------
# Serialization (scenario file format)
# ---------------------------------------------------------------------------

def to_dict(spec: ScenarioSpec) -> dict:
    params = asdict(spec.params)
    return {
        "version": SCENARIO_VERSION,
        "layout": spec.layout,
        "world": {
            "bounds": spec.world.bounds.as_list(),
            "polygons": [[[float(x), float(y)] for x, y in poly] for poly in spec.world.obstacles],
        },
        "robots": [
            {"start": [*rb.start], "goal": [*rb.goal]} for rb in spec.robots
        ],
        "params": params,
        "seed": spec.seed,
    }


def to_json(spec: ScenarioSpec) -> str:
    return json.dumps(to_dict(spec), sort_keys=True)


def from_dict(data: dict) -> ScenarioSpec:
    if data.get("version") != SCENARIO_VERSION:
        raise ScenarioError(f"unsupported scenario version {data.get('version')!r}")
    w = data["world"]
    world = WorldModel(Bounds(*w["bounds"]), [np.array(p) for p in w["polygons"]])
    robots = tuple(
        RobotSpec(start=tuple(rb["start"]), goal=tuple(rb["goal"])) for rb in data["robots"]
    )
    p = dict(data["params"])
    p["rs"] = RSParams(**p["rs"])
    p["kinematics"] = KinematicsConfig(**p["kinematics"])
    params = SimParams(**p)
    spec = ScenarioSpec(
        world=world, robots=robots, params=params, seed=data["seed"],
        layout=data.get("layout", "custom"),
    )
    spec.validate()
    return spec


def from_json(text: str) -> ScenarioSpec:
    return from_dict(json.loads(text))


def load_scenario(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as f:
        return from_json(f.read())


def save_scenario(spec: ScenarioSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_json(spec))
        f.write("\n")


# ---------------------------------------------------------------------------
# Layout generators
# ---------------------------------------------------------------------------

def default_params(layout: str, **overrides) -> SimParams:
    base = SimParams(step_limit=DEFAULT_STEP_LIMITS.get(layout, 1500))
    return replace(base, **overrides) if overrides else base


def _regular_polygon(center, radius, n=24) -> np.ndarray:
    a = 2.0 * math.pi * np.arange(n) / n
    return np.stack([center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)], axis=1)


def _heading_to(start, goal) -> float:
    return math.atan2(goal[1] - start[1], goal[0] - start[0])


def _swap(n: int, rng: np.random.Generator) -> tuple[WorldModel, list[RobotSpec]]:
    radius = 5.0
    world = WorldModel(Bounds(-8, -8, 8, 8))
    base = rng.uniform(0.0, 2.0 * math.pi)
    slot_angle = 2.0 * math.pi / n
    if n % 2 == 0:
        jitter = rng.uniform(-0.2, 0.2, size=n // 2) * slot_angle
        jitter = np.concatenate([jitter, jitter])  # antipodal slots mirror exactly
    else:
        jitter = rng.uniform(-0.2, 0.2, size=n) * slot_angle
    angles = base + slot_angle * np.arange(n) + jitter
    slots = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    robots = []
    for i in range(n):
        start = slots[i]
        goal = slots[(i + n // 2) % n] if n % 2 == 0 else -slots[i]
        robots.append(
            RobotSpec(
                start=(float(start[0]), float(start[1]), _heading_to(start, goal)),
                goal=(float(goal[0]), float(goal[1])),
            )
        )
    return world, robots


def _facing_groups(
    n: int,
    rng: np.random.Generator,
    world: WorldModel,
    start_x: float,
    y_span: float,
    min_sep: float = 0.6,
) -> list[RobotSpec]:
    """N robots in two facing columns with mirrored goals across x = 0.

    Heights come from an evenly pitched ladder with per-slot jitter bounded so
    the minimum separation always holds."""
    pitch = 2.0 * y_span / n
    if pitch < min_sep:
        raise ScenarioError(f"layout cannot hold {n} robots at {min_sep} m separation")
    jitter = min(0.5 * (pitch - min_sep), 0.45 * pitch)
    centers = -y_span + (np.arange(n) + 0.5) * pitch
    ys = centers + rng.uniform(-jitter, jitter, size=n)
    order = rng.permutation(n)
    robots = []
    for rank, idx in enumerate(order):
        side = -1.0 if rank < (n + 1) // 2 else 1.0
        start = (side * start_x, float(ys[idx]))
        goal = (-side * start_x, float(ys[idx]))
        robots.append(RobotSpec(start=(*start, _heading_to(start, goal)), goal=goal))
    return robots


def _flat(n: int, rng: np.random.Generator) -> tuple[WorldModel, list[RobotSpec]]:
    wall = np.array([[-0.15, -3.0], [0.15, -3.0], [0.15, 3.0], [-0.15, 3.0]])
    world = WorldModel(Bounds(-8, -8, 8, 8), [wall])
    return world, _facing_groups(n, rng, world, start_x=4.0, y_span=2.5)


def _cylind(n: int, rng: np.random.Generator) -> tuple[WorldModel, list[RobotSpec]]:
    pillars = [_regular_polygon((0.0, y), 0.8) for y in (-4.4, -2.2, 0.0, 2.2, 4.4)]
    world = WorldModel(Bounds(-10, -8, 10, 8), pillars)
    return world, _facing_groups(n, rng, world, start_x=5.0, y_span=4.5)


def _u_trap(n: int, rng: np.random.Generator) -> tuple[WorldModel, list[RobotSpec]]:
    """Single robot facing a C-shaped obstacle that opens toward it."""
    if n != 1:
        raise ScenarioError("u_trap layout is a single-robot fixture")
    cavity = np.array(
        [
            [0.0, -2.5],
            [3.0, -2.5],
            [3.0, 2.5],
            [0.0, 2.5],
            [0.0, 2.0],
            [2.5, 2.0],
            [2.5, -2.0],
            [0.0, -2.0],
        ]
    )
    world = WorldModel(Bounds(-12, -12, 12, 12), [cavity])
    start, goal = (-6.0, 0.0), (8.0, 0.0)
    return world, [RobotSpec(start=(*start, 0.0), goal=goal)]


def _wall_pair(n: int, rng: np.random.Generator) -> tuple[WorldModel, list[RobotSpec]]:
    """Two robots on opposite sides of a wall, goals mirrored across it."""
    if n != 2:
        raise ScenarioError("wall_pair layout is a two-robot fixture")
    wall = np.array([[-0.15, -3.0], [0.15, -3.0], [0.15, 3.0], [-0.15, 3.0]])
    world = WorldModel(Bounds(-8, -8, 8, 8), [wall])
    robots = [
        RobotSpec(start=(-3.0, 0.5, 0.0), goal=(3.0, 0.5)),
        RobotSpec(start=(3.0, -0.5, math.pi), goal=(-3.0, -0.5)),
    ]
    return world, robots


def _from_file(n: int, rng: np.random.Generator, map_path: str) -> tuple[WorldModel, list[RobotSpec]]:
    with open(map_path, "r", encoding="utf-8") as f:
        data = json.load(f)
    world = WorldModel(Bounds(*data["bounds"]), [np.array(p) for p in data.get("polygons", [])])
    r = 0.17
    b = world.bounds
    placements: list[np.ndarray] = []
    # starts first, then goals; all mutually separated within their group
    for group in range(2):
        pts: list[np.ndarray] = []
        for _ in range(n):
            for _attempt in range(2000):
                p = np.array(
                    [rng.uniform(b.x_min + 1, b.x_max - 1), rng.uniform(b.y_min + 1, b.y_max - 1)]
                )
                if not _placement_free(world, p, r + 0.1):
                    continue
                if any(float(np.linalg.norm(p - q)) <= 2.5 * r for q in pts):
                    continue
                pts.append(p)
                break
            else:
                raise ScenarioError("could not sample collision-free placements from map file")
        placements.append(pts)  # type: ignore[arg-type]
    starts, goals = placements
    robots = [
        RobotSpec(
            start=(float(s[0]), float(s[1]), _heading_to(s, g)),
            goal=(float(g[0]), float(g[1])),
        )
        for s, g in zip(starts, goals)
    ]
    return world, robots


LAYOUTS = ("swap", "flat", "cylind", "from-file", "u_trap", "wall_pair")


def generate_instance(
    layout: str,
    n: int,
    seed: int,
    map_path: str | None = None,
    params: SimParams | None = None,
) -> ScenarioSpec:
    """Build a deterministic scenario for one of the named layouts."""
    rng = np.random.default_rng(seed)
    if layout == "swap":
        world, robots = _swap(n, rng)
    elif layout == "flat":
        world, robots = _flat(n, rng)
    elif layout == "cylind":
        world, robots = _cylind(n, rng)
    elif layout == "u_trap":
        world, robots = _u_trap(n, rng)
    elif layout == "wall_pair":
        world, robots = _wall_pair(n, rng)
    elif layout == "from-file":
        if not map_path:
            raise ScenarioError("from-file layout needs a map path")
        world, robots = _from_file(n, rng, map_path)
    else:
        raise ScenarioError(f"unknown layout {layout!r}, expected one of {LAYOUTS}")
    spec = ScenarioSpec(
        world=world,
        robots=tuple(robots),
        params=params or default_params(layout),
        seed=seed,
        layout=layout,
    )
    spec.validate()
    return spec
