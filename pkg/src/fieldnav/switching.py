"""Rule-based APF/wall-following switch.

The switch maintains a per-robot rotation angle applied to the attractive
force. Zero angle means plain gradient descent (APF mode); a nonzero angle
means the robot is tracking an obstacle boundary (WF mode). The angle grows
while the total force is weak, recedes once it recovers, and is reset when
the robot crosses the hit-point-to-goal segment closer to the goal.

State transitions are split into a pure decision (`decide`) and a memory
commit (`commit`) so a learned or human override can interpose between them;
`rs_step` composes the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .forces import ForceSet
from .geometry import Scan
from .robot import RobotState


class SwitchError(ValueError):
    """Invalid switch input (e.g. zero relative goal)."""


@dataclass(frozen=True)
class RSParams:
    """Switch tuning.

    theta_upd is the per-step escalation angle (one ray of resolution by
    default), theta_rcv the per-step recovery angle. hp_radius is the
    hit-point revisit disc, n_revisit how many disc re-entries declare a
    loop, mline_tol the lateral tolerance for the wall-follow break segment.
    """

    theta_upd: float
    theta_rcv: float
    force_threshold: float
    hp_radius: float = 0.34
    n_revisit: int = 1
    mline_tol: float = 0.17

    def __post_init__(self):
        if not self.theta_upd > self.theta_rcv > 0:
            raise ValueError("need theta_upd > theta_rcv > 0")
        if self.hp_radius <= 0:
            raise ValueError("hp_radius must be positive")
        if self.n_revisit < 1:
            raise ValueError("n_revisit must be >= 1")

    @classmethod
    def defaults(cls, ray_count: int, max_range: float, robot_radius: float = 0.17) -> "RSParams":
        upd = 2.0 * math.pi / ray_count
        return cls(
            theta_upd=upd,
            theta_rcv=0.5 * upd,
            force_threshold=0.5 * max_range,
            hp_radius=2.0 * robot_radius,
            n_revisit=1,
            mline_tol=robot_radius,
        )


@dataclass(frozen=True)
class HitPoint:
    """State where the switch escalated out of APF, plus what it chose there."""

    state: RobotState
    goal_dist: float
    i_dir: int
    theta_rot: float
    step: int


@dataclass(frozen=True)
class LeavePoint:
    state: RobotState
    theta_rot: float
    step: int


@dataclass(frozen=True)
class SwitchMemory:
    """Constant-size per-robot history.

    Hit/leave points are kept one generation back. theta_rot is the current
    rotation angle (nonzero exactly in WF mode) and always shares its sign
    with i_dir. hp_exited/revisit_count implement loop detection: a revisit
    only counts after the robot has left the hit-point disc once.
    """

    state_now: RobotState
    state_prev: RobotState
    theta_rot: float = 0.0
    theta_rot_prev: float = 0.0
    i_dir: int = 1
    hp_now: HitPoint | None = None
    hp_prev: HitPoint | None = None
    lp_now: LeavePoint | None = None
    lp_prev: LeavePoint | None = None
    revisit_count: int = 0
    hp_exited: bool = False
    step: int = 0

    @classmethod
    def initial(cls, state: RobotState) -> "SwitchMemory":
        return cls(state_now=state, state_prev=state)

    @property
    def mode(self) -> int:
        """1 in WF mode, 0 in APF mode."""
        return 1 if self.theta_rot != 0.0 else 0


@dataclass(frozen=True)
class SwitchDecision:
    theta_rot: float
    i_dir: int
    loop_detected: bool
    entered_wf: bool
    exited_wf: bool


def choose_dir(scan: Scan, g_rel: np.ndarray, ray_count: int) -> int:
    """Pick the wall-follow rotation direction needing the least turn.

    Finds the ray whose endpoint is nearest the relative goal (lowest index
    on ties) and compares that ray's bearing with the goal bearing: +1 for
    counterclockwise, -1 for clockwise, ties to +1.
    """
    g = np.asarray(g_rel, dtype=float)
    if g[0] == 0.0 and g[1] == 0.0:
        raise SwitchError("choose_dir undefined for zero relative goal")
    vec = scan.vectors()
    d2 = ((vec - g[None, :]) ** 2).sum(axis=1)
    j = int(np.argmin(d2))
    phi_min = 2.0 * math.pi * j / ray_count
    phi_goal = math.atan2(g[1], g[0])
    phi_dir = math.fmod(phi_min - phi_goal, 2.0 * math.pi)
    if phi_dir < 0.0:
        phi_dir += 2.0 * math.pi
    return 1 if phi_dir <= math.pi else -1


def goal_ray_index(scan: Scan, g_rel: np.ndarray) -> int:
    """Index of the ray whose endpoint is nearest the relative goal."""
    vec = scan.vectors()
    g = np.asarray(g_rel, dtype=float)
    d2 = ((vec - g[None, :]) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def check_loop(mem: SwitchMemory, pos: np.ndarray, params: RSParams) -> bool:
    """True iff the robot is wall-following and has re-entered the stored
    hit-point disc (after leaving it) at least n_revisit times, counting a
    pending re-entry at pos."""
    if mem.hp_now is None or mem.theta_rot == 0.0:
        return False
    inside = _inside_hp_disc(mem.hp_now, pos, params)
    pending = 1 if (mem.hp_exited and inside) else 0
    return mem.revisit_count + pending >= params.n_revisit


def _inside_hp_disc(hp: HitPoint, pos: np.ndarray, params: RSParams) -> bool:
    dx = pos[0] - hp.state.x
    dy = pos[1] - hp.state.y
    return math.hypot(dx, dy) <= params.hp_radius


def break_wf(mem: SwitchMemory, pos: np.ndarray, goal: np.ndarray, params: RSParams) -> bool:
    """Abandon wall-following when back on the hit-point-to-goal segment and
    strictly closer to the goal than the hit point was.

    The robot must first have traveled beyond the hit-point disc, so the
    break cannot re-fire at the hit point itself."""
    hp = mem.hp_now
    if hp is None:
        return False
    hp_pos = np.array([hp.state.x, hp.state.y])
    goal = np.asarray(goal, dtype=float)
    pos = np.asarray(pos, dtype=float)
    if float(np.linalg.norm(pos - hp_pos)) <= params.hp_radius:
        return False
    if np.linalg.norm(pos - goal) >= np.linalg.norm(hp_pos - goal):
        return False
    seg = goal - hp_pos
    seg_len2 = float(seg @ seg)
    if seg_len2 == 0.0:
        lateral = float(np.linalg.norm(pos - goal))
    else:
        t = float(np.clip((pos - hp_pos) @ seg / seg_len2, 0.0, 1.0))
        lateral = float(np.linalg.norm(pos - (hp_pos + t * seg)))
    return lateral <= params.mline_tol


def decide(
    mem: SwitchMemory,
    state: RobotState,
    goal: np.ndarray,
    scan: Scan,
    g_rel: np.ndarray,
    force: ForceSet,
    params: RSParams,
) -> SwitchDecision:
    """One switch update: direction selection, angle escalation/recovery,
    loop reversal, and the wall-follow break. Pure; memory is not touched."""
    pos = state.position
    theta_prev = mem.theta_rot

    loop = check_loop(mem, pos, params)
    if loop:
        i_dir = -mem.hp_now.i_dir  # type: ignore[union-attr]  (loop implies hp_now)
        # A reversal restarts the rotation from zero so the angle never
        # carries the old direction's sign.
        theta_base = 0.0
    elif theta_prev != 0.0:
        i_dir = mem.i_dir
        theta_base = theta_prev
    else:
        i_dir = choose_dir(scan, g_rel, scan.ray_count)
        theta_base = theta_prev

    if force.magnitude < params.force_threshold:
        theta = theta_base + i_dir * params.theta_upd
    else:
        theta = theta_base - i_dir * params.theta_rcv
        if i_dir * theta < 0.0:
            theta = 0.0

    if theta_prev != 0.0 and theta != 0.0 and break_wf(mem, pos, goal, params):
        theta = 0.0

    return SwitchDecision(
        theta_rot=theta,
        i_dir=i_dir,
        loop_detected=loop,
        entered_wf=(theta_prev == 0.0 and theta != 0.0),
        exited_wf=(theta_prev != 0.0 and theta == 0.0),
    )


def commit(
    mem: SwitchMemory,
    state: RobotState,
    g_rel: np.ndarray,
    theta_rot: float,
    i_dir: int,
    loop_detected: bool,
    params: RSParams,
) -> SwitchMemory:
    """Fold a (possibly overridden) decision into the memory: state history,
    hit/leave point records, and revisit tracking."""
    step = mem.step + 1
    theta_prev = mem.theta_rot
    hp_now, hp_prev = mem.hp_now, mem.hp_prev
    lp_now, lp_prev = mem.lp_now, mem.lp_prev
    revisit, exited = mem.revisit_count, mem.hp_exited

    if loop_detected:
        revisit, exited = 0, False

    entered_wf = theta_prev == 0.0 and theta_rot != 0.0
    exited_wf = theta_prev != 0.0 and theta_rot == 0.0
    goal_dist = float(np.hypot(g_rel[0], g_rel[1]))

    if entered_wf and (hp_now is None or goal_dist < hp_now.goal_dist):
        hp_prev = hp_now
        hp_now = HitPoint(
            state=state, goal_dist=goal_dist, i_dir=i_dir, theta_rot=theta_rot, step=step
        )
        revisit, exited = 0, False
    if exited_wf:
        lp_prev = lp_now
        lp_now = LeavePoint(state=state, theta_rot=theta_rot, step=step)

    if theta_rot != 0.0 and hp_now is not None:
        inside = _inside_hp_disc(hp_now, state.position, params)
        if not inside:
            exited = True
        elif exited:
            revisit += 1
            exited = False

    return replace(
        mem,
        state_now=state,
        state_prev=mem.state_now,
        theta_rot=theta_rot,
        theta_rot_prev=theta_prev,
        i_dir=i_dir,
        hp_now=hp_now,
        hp_prev=hp_prev,
        lp_now=lp_now,
        lp_prev=lp_prev,
        revisit_count=revisit,
        hp_exited=exited,
        step=step,
    )


def rs_step(
    mem: SwitchMemory,
    state: RobotState,
    goal: np.ndarray,
    scan: Scan,
    g_rel: np.ndarray,
    force: ForceSet,
    params: RSParams,
) -> tuple[float, int, SwitchMemory]:
    """Full rule-based switch update: decide then commit."""
    d = decide(mem, state, goal, scan, g_rel, force, params)
    mem2 = commit(mem, state, g_rel, d.theta_rot, d.i_dir, d.loop_detected, params)
    return d.theta_rot, d.i_dir, mem2
