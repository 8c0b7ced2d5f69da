"""Per-robot frames, force-to-velocity conversion, and kinematic integration.

The robot frame (RF) has the heading along +x. Poses live in the robot's
initial frame (IF), which in simulation coincides with the world frame since
odometry is perfect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class KinematicsConfig:
    """Actuation limits and timing. model is "differential" or "holonomic"."""

    model: str = "differential"
    v_max: float = 0.3
    w_max: float = 1.0
    heading_gain: float = 2.0
    dt: float = 0.2
    arrival_tol: float = 0.2

    def __post_init__(self):
        if self.model not in ("differential", "holonomic"):
            raise ValueError(f"unknown kinematics model {self.model!r}")
        for name in ("v_max", "w_max", "heading_gain", "dt", "arrival_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ControlCommand:
    """Differential: forward speed v and yaw rate w. Holonomic: (vx, vy) in RF
    carried in (v, w)."""

    v: float = 0.0
    w: float = 0.0


def relative_goal(state: RobotState, goal: np.ndarray) -> np.ndarray:
    """Goal expressed in the robot frame: R(-psi) @ (goal - position)."""
    dx = goal[0] - state.x
    dy = goal[1] - state.y
    c, s = math.cos(state.psi), math.sin(state.psi)
    return np.array([c * dx + s * dy, -s * dx + c * dy])


def force_to_command(f_tot: np.ndarray, cfg: KinematicsConfig, force_taper: float) -> ControlCommand:
    """Map a robot-frame force to a bounded velocity command.

    Differential drive turns toward the force direction and tapers forward
    speed by both alignment (cos of the bearing error, floored at 0) and force
    magnitude relative to force_taper. Zero force commands zero motion.
    """
    fx, fy = float(f_tot[0]), float(f_tot[1])
    mag = math.hypot(fx, fy)
    if mag == 0.0:
        return ControlCommand(0.0, 0.0)
    scale = 1.0 if force_taper <= 0.0 else min(1.0, mag / force_taper)
    if cfg.model == "holonomic":
        v = cfg.v_max * scale / mag
        return ControlCommand(v * fx, v * fy)
    phi = math.atan2(fy, fx)
    w = max(-cfg.w_max, min(cfg.w_max, cfg.heading_gain * phi))
    v = cfg.v_max * max(0.0, math.cos(phi)) * scale
    return ControlCommand(v, w)


def integrate(state: RobotState, cmd: ControlCommand, cfg: KinematicsConfig) -> RobotState:
    """Advance one timestep.

    Differential drive uses the exact unicycle arc (straight line when the yaw
    rate is ~0); holonomic uses an Euler position update with (v, w) read as
    robot-frame (vx, vy).
    """
    dt = cfg.dt
    if cfg.model == "holonomic":
        c, s = math.cos(state.psi), math.sin(state.psi)
        vx = c * cmd.v - s * cmd.w
        vy = s * cmd.v + c * cmd.w
        return RobotState(state.x + vx * dt, state.y + vy * dt, state.psi)
    v, w = cmd.v, cmd.w
    if abs(w) < 1e-12:
        return RobotState(
            state.x + v * math.cos(state.psi) * dt,
            state.y + v * math.sin(state.psi) * dt,
            state.psi,
        )
    # chord form of the exact arc: displacement 2(v/w)sin(w dt/2) along the
    # mid-heading, which keeps the step length <= v*dt to within rounding
    half = 0.5 * w * dt
    chord = (v / w) * 2.0 * math.sin(half)
    mid = state.psi + half
    return RobotState(
        state.x + chord * math.cos(mid),
        state.y + chord * math.sin(mid),
        state.psi + w * dt,
    )
