"""Synchronous multi-robot stepping engine, metrics, and trajectory logging.

Each step evaluates every robot in id order against a frozen snapshot of the
other robots' positions (scan, forces, switch, command, integration), then
resolves collisions. Collided robots freeze in place but keep appearing in
other robots' scans; arrived robots latch and stay put. Everything is a pure
function of the scenario (and optional network weights), so identical specs
produce bit-identical logs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import forces as F
from . import learned, switching
from .geometry import CollisionEvent, DiscBody, Scan, ScanConfig, collisions, raycast
from .robot import ControlCommand, RobotState, force_to_command, integrate, relative_goal
from .scenarios import ScenarioSpec

LOG_VERSION = 1


class ConfigurationError(ValueError):
    """Scenario/engine configuration problems detected before running."""


@dataclass
class StepRecord:
    t: int
    robot_id: int
    x: float
    y: float
    psi: float
    theta_rot: float
    i_dir: int
    mode: int
    f_tot_mag: float
    event: str | None = None

    def to_json(self) -> str:
        d = {
            "t": self.t,
            "id": self.robot_id,
            "x": self.x,
            "y": self.y,
            "psi": self.psi,
            "theta_rot": self.theta_rot,
            "i_dir": self.i_dir,
            "mode": self.mode,
            "f_tot_mag": self.f_tot_mag,
        }
        if self.event:
            d["event"] = self.event
        return json.dumps(d)


@dataclass
class TrajectoryLog:
    records: list[StepRecord] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "\n".join(r.to_json() for r in self.records) + ("\n" if self.records else "")

    @staticmethod
    def parse_jsonl(text: str) -> list[dict]:
        return [json.loads(line) for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class MetricsReport:
    success: bool
    arrival_rate: float
    makespan: int | None
    mean_timestep: float | None
    collision_count: int

    def validate(self) -> None:
        if self.success and (self.arrival_rate != 1.0 or self.collision_count != 0):
            raise AssertionError("success requires full arrival and zero collisions")
        if self.makespan is not None and self.mean_timestep is not None:
            if self.mean_timestep > self.makespan:
                raise AssertionError("mean_timestep exceeds makespan")


@dataclass
class RobotRuntime:
    robot_id: int
    state: RobotState
    goal: np.ndarray
    mem: switching.SwitchMemory
    arrived: bool = False
    arrival_step: int | None = None
    collided: bool = False
    ever_collided: bool = False
    mode_override: int | None = None  # human toggle: None, 0 (APF) or 1 (WF)
    buffer: learned.EpisodeBuffer = field(default_factory=learned.EpisodeBuffer)
    last_obs: np.ndarray | None = None
    last_scan: Scan | None = None

    @property
    def active(self) -> bool:
        return not (self.arrived or self.collided)


class Engine:
    """One simulation instance stepped synchronously at the control rate."""

    def __init__(
        self,
        spec: ScenarioSpec,
        weights: learned.WeightsBundle | None = None,
        observe_ids: set[int] | None = None,
    ):
        spec.validate()
        p = spec.params
        self.spec = spec
        self.params = p
        self.world = spec.world
        self.scan_cfg = ScanConfig(p.ray_count, p.max_range)
        self.potential = F.PotentialParams(
            max_range=p.max_range,
            blend_weight=p.blend_weight,
            att_gain=p.att_gain,
            rep_gain=p.rep_gain,
            force_threshold=p.force_threshold,
        )
        self.weights = weights
        if p.method == "apf-ls":
            if weights is None:
                raise ConfigurationError("method apf-ls requires a weights bundle")
            if weights.ray_count != p.ray_count:
                raise ConfigurationError(
                    f"weights were trained for M={weights.ray_count}, scenario has M={p.ray_count}"
                )
        self.t_seq = weights.config.t_seq if weights is not None else p.t_seq
        self.observe_ids = set(observe_ids or [])
        self.t = 0
        self.log = TrajectoryLog()
        self.collision_events: list[CollisionEvent] = []
        self.robots: list[RobotRuntime] = []
        for i, rb in enumerate(spec.robots):
            state = RobotState(*rb.start)
            rt = RobotRuntime(
                robot_id=i,
                state=state,
                goal=np.array(rb.goal, dtype=float),
                mem=switching.SwitchMemory.initial(state),
            )
            if self._arrival_reached(rt):
                rt.arrived = True
                rt.arrival_step = 0
            self.robots.append(rt)

    # -- queries ------------------------------------------------------------

    def _arrival_reached(self, rt: RobotRuntime) -> bool:
        dx = rt.state.x - rt.goal[0]
        dy = rt.state.y - rt.goal[1]
        return math.hypot(dx, dy) <= self.params.kinematics.arrival_tol

    def _needs_observation(self, rt: RobotRuntime) -> bool:
        return self.params.method == "apf-ls" or rt.robot_id in self.observe_ids

    @property
    def settled(self) -> bool:
        return all(not rt.active for rt in self.robots)

    def bodies(self) -> list[DiscBody]:
        r = self.params.robot_radius
        return [DiscBody(center=(rt.state.x, rt.state.y), radius=r) for rt in self.robots]

    # -- stepping -----------------------------------------------------------

    def step(self) -> None:
        """Advance the whole team by one control period."""
        self.t += 1
        p = self.params
        frozen = [(rt.state.x, rt.state.y) for rt in self.robots]
        events: dict[int, list[str]] = {rt.robot_id: [] for rt in self.robots}
        step_info: dict[int, tuple[float, int, int, float]] = {}

        for rt in self.robots:
            if not rt.active:
                step_info[rt.robot_id] = (rt.mem.theta_rot, rt.mem.i_dir, rt.mem.mode, 0.0)
                continue
            others = [
                DiscBody(center=frozen[o.robot_id], radius=p.robot_radius)
                for o in self.robots
                if o.robot_id != rt.robot_id
            ]
            scan = raycast(self.world, others, (rt.state.x, rt.state.y, rt.state.psi), self.scan_cfg)
            rt.last_scan = scan
            g_rel = relative_goal(rt.state, rt.goal)

            if p.method == "apf" and p.classic_weighting:
                force_set = F.total_force_vanilla(g_rel, scan, self.potential)
            else:
                force_set = F.total_force(g_rel, rt.mem.theta_rot, scan, self.potential)

            theta, i_dir = 0.0, rt.mem.i_dir
            loop = False
            if p.method == "apf":
                drive = force_set
            else:
                decision = switching.decide(
                    rt.mem, rt.state, rt.goal, scan, g_rel, force_set, p.rs
                )
                theta, i_dir, loop = decision.theta_rot, decision.i_dir, decision.loop_detected
                if self._needs_observation(rt):
                    obs = learned.build_observation(
                        scan, g_rel, rt.state, rt.goal, rt.mem, force_set, theta
                    )
                    rt.buffer.append(obs)
                    rt.last_obs = obs
                if p.method == "apf-ls":
                    prob = learned.vit_forward(rt.buffer.window(self.t_seq), self.weights)
                    theta, i_dir = learned.ls_override(theta, i_dir, prob, p.rs)
                if rt.mode_override is not None:
                    theta, i_dir = learned.apply_mode_override(theta, i_dir, rt.mode_override, p.rs)
                if loop:
                    events[rt.robot_id].append("loop")
                mem2 = switching.commit(rt.mem, rt.state, g_rel, theta, i_dir, loop, p.rs)
                if mem2.hp_now is not rt.mem.hp_now:
                    events[rt.robot_id].append("hp")
                if mem2.lp_now is not rt.mem.lp_now:
                    events[rt.robot_id].append("lp")
                rt.mem = mem2
                if theta == rt.mem.theta_rot_prev:
                    drive = force_set
                else:
                    drive = F.retarget_rotation(force_set, g_rel, theta, self.potential)

            cmd = force_to_command(drive.f_tot, p.kinematics, p.force_threshold)
            rt.state = integrate(rt.state, cmd, p.kinematics)
            if self._arrival_reached(rt):
                rt.arrived = True
                rt.arrival_step = self.t
                events[rt.robot_id].append("arrived")
            step_info[rt.robot_id] = (theta, i_dir, 1 if theta != 0.0 else 0, force_set.magnitude)

        self._resolve_collisions(events)
        for rt in self.robots:
            theta, i_dir, mode, fmag = step_info[rt.robot_id]
            ev = events[rt.robot_id]
            self.log.records.append(
                StepRecord(
                    t=self.t,
                    robot_id=rt.robot_id,
                    x=rt.state.x,
                    y=rt.state.y,
                    psi=rt.state.psi,
                    theta_rot=theta,
                    i_dir=i_dir,
                    mode=mode,
                    f_tot_mag=fmag,
                    event="+".join(ev) if ev else None,
                )
            )

    def _resolve_collisions(self, events: dict[int, list[str]]) -> None:
        was_disabled = [rt.collided for rt in self.robots]
        for ev in collisions(self.bodies(), self.world):
            if ev.kind == "robot":
                if was_disabled[ev.i] and was_disabled[ev.j]:
                    continue
                involved = [ev.i, ev.j]
            else:
                if was_disabled[ev.i]:
                    continue
                involved = [ev.i]
            self.collision_events.append(ev)
            for idx in involved:
                rt = self.robots[idx]
                rt.ever_collided = True
                if not rt.collided:
                    rt.collided = True
                    events[idx].append("collided")

    # -- live-control hooks ---------------------------------------------------

    def toggle_mode(self, robot_id: int) -> int:
        """Flip a robot's human override. Returns the override target mode, or
        the switch's own mode if the override was cleared."""
        rt = self.robots[robot_id]
        if rt.mode_override is None:
            rt.mode_override = 0 if rt.mem.mode == 1 else 1
            return rt.mode_override
        rt.mode_override = None
        return rt.mem.mode

    def effective_mode(self, robot_id: int) -> int:
        return self.robots[robot_id].mem.mode

    def snapshot(self, ray_ids: set[int] | None = None) -> dict:
        robots = []
        for rt in self.robots:
            entry = {
                "id": rt.robot_id,
                "x": rt.state.x,
                "y": rt.state.y,
                "psi": rt.state.psi,
                "mode": rt.mem.mode,
                "theta_rot": rt.mem.theta_rot,
                "arrived": rt.arrived,
                "collided": rt.collided,
                "controlled": rt.robot_id in self.observe_ids,
            }
            if ray_ids and rt.robot_id in ray_ids and rt.last_scan is not None:
                vec = rt.last_scan.vectors()
                c, s = math.cos(rt.state.psi), math.sin(rt.state.psi)
                wx = rt.state.x + vec[:, 0] * c - vec[:, 1] * s
                wy = rt.state.y + vec[:, 0] * s + vec[:, 1] * c
                entry["rays"] = [[round(float(a), 3), round(float(b), 3)] for a, b in zip(wx, wy)]
            robots.append(entry)
        return {"t": self.t, "robots": robots}

    # -- metrics ------------------------------------------------------------

    def metrics(self) -> MetricsReport:
        n = len(self.robots)
        clean_arrivals = [
            rt.arrival_step
            for rt in self.robots
            if rt.arrived and not rt.ever_collided and rt.arrival_step is not None
        ]
        arrival_rate = len(clean_arrivals) / n
        success = len(clean_arrivals) == n and not self.collision_events
        makespan = max(clean_arrivals) if success else None
        mean_ts = float(np.mean(clean_arrivals)) if clean_arrivals else None
        report = MetricsReport(
            success=success,
            arrival_rate=arrival_rate,
            makespan=makespan,
            mean_timestep=mean_ts,
            collision_count=len(self.collision_events),
        )
        report.validate()
        return report


def run_instance(
    spec: ScenarioSpec,
    weights: learned.WeightsBundle | None = None,
    observe_ids: set[int] | None = None,
) -> tuple[MetricsReport, TrajectoryLog]:
    """Run a scenario to arrival, deadlock-freeze, or the step limit."""
    if spec.params.method == "apf-ls" and weights is None:
        if not spec.params.weights_path:
            raise ConfigurationError("method apf-ls requires a weights file")
        weights = learned.load_weights(spec.params.weights_path)
    eng = Engine(spec, weights=weights, observe_ids=observe_ids)
    for _ in range(spec.params.step_limit):
        if eng.settled:
            break
        eng.step()
    return eng.metrics(), eng.log
