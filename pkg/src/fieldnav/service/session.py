"""Live simulation session: one engine, one stepping loop, many clients.

The loop is the only writer of simulation state. Client commands are queued
and applied at step boundaries, so no snapshot ever reflects a half-applied
command; recording happens inside the loop right after each step.
"""

from __future__ import annotations

import asyncio
import hashlib
import json

from ..engine import Engine
from ..learned import WeightsBundle
from ..scenarios import ScenarioSpec, to_json

DATASET_VERSION = 1


def scenario_hash(spec: ScenarioSpec) -> str:
    return hashlib.sha256(to_json(spec).encode("utf-8")).hexdigest()[:16]


class DemonstrationRecorder:
    """Appends one labeled observation per controlled robot per step."""

    def __init__(self, path, spec: ScenarioSpec, controlled_ids: list[int], t_seq: int):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")
        header = {
            "version": DATASET_VERSION,
            "M": spec.params.ray_count,
            "T_seq": t_seq,
            "controlled_ids": controlled_ids,
            "scenario_hash": scenario_hash(spec),
        }
        self._fh.write(json.dumps(header) + "\n")
        self.records_written = 0

    def record_step(self, engine: Engine, episode: int, controlled_ids: list[int]) -> None:
        for rid in controlled_ids:
            rt = engine.robots[rid]
            if rt.last_obs is None:
                continue
            rec = {
                "episode": episode,
                "t": engine.t,
                "robot": rid,
                "observation": [float(v) for v in rt.last_obs],
                "label": rt.mem.mode,
            }
            self._fh.write(json.dumps(rec) + "\n")
            self.records_written += 1

    def close(self) -> None:
        self._fh.close()


class SimulationSession:
    """Owns the engine and the 5 Hz wall-clock loop (speed-scalable)."""

    def __init__(
        self,
        spec: ScenarioSpec,
        weights: WeightsBundle | None = None,
        controlled: int = 3,
        speed: float = 1.0,
        include_rays: bool = True,
    ):
        self.spec = spec
        self.weights = weights
        self.controlled_ids = list(range(min(controlled, len(spec.robots))))
        self.speed = speed
        self.include_rays = include_rays
        self.engine = Engine(spec, weights=weights, observe_ids=set(self.controlled_ids))
        self.running = True
        self.episode = 0
        self.recorder: DemonstrationRecorder | None = None
        self.commands: asyncio.Queue = asyncio.Queue()
        self.clients: set = set()
        self._task: asyncio.Task | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        self._task = asyncio.get_running_loop().create_task(self._run())

    async def stop(self) -> None:
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
        if self.recorder is not None:
            self.recorder.close()
            self.recorder = None

    @property
    def step_period(self) -> float:
        return self.spec.params.kinematics.dt / max(self.speed, 1e-9)

    # -- loop ---------------------------------------------------------------

    async def _run(self) -> None:
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        while True:
            if not self.running:
                cmd, sock = await self.commands.get()
                await self._apply(cmd, sock)
                next_tick = loop.time()
                continue
            remaining = next_tick - loop.time()
            while remaining > 0:
                try:
                    cmd, sock = await asyncio.wait_for(self.commands.get(), remaining)
                except asyncio.TimeoutError:
                    break
                await self._apply(cmd, sock)
                remaining = next_tick - loop.time()
            if self.running and not self.engine.settled:
                await self._advance()
            next_tick = max(next_tick + self.step_period, loop.time())

    async def _advance(self) -> None:
        self.engine.step()
        if self.recorder is not None:
            self.recorder.record_step(self.engine, self.episode, self.controlled_ids)
        await self.broadcast(self.snapshot_message())

    # -- messaging ----------------------------------------------------------

    def snapshot_message(self) -> str:
        snap = self.engine.snapshot(ray_ids=set(self.controlled_ids) if self.include_rays else None)
        snap["type"] = "snapshot"
        snap["running"] = self.running
        snap["recording"] = self.recorder is not None
        snap["episode"] = self.episode
        return json.dumps(snap)

    def init_message(self) -> str:
        return json.dumps(
            {
                "type": "init",
                "scenario": json.loads(to_json(self.spec)),
                "controlled_ids": self.controlled_ids,
                "t": self.engine.t,
                "running": self.running,
            }
        )

    async def broadcast(self, text: str) -> None:
        dead = []
        for ws in self.clients:
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.clients.discard(ws)

    async def _send(self, sock, payload: dict) -> None:
        if sock is not None:
            try:
                await sock.send_text(json.dumps(payload))
            except Exception:
                self.clients.discard(sock)

    # -- commands -----------------------------------------------------------

    async def _apply(self, cmd: dict, sock) -> None:
        kind = cmd.get("type")
        if kind == "toggle":
            await self._apply_toggle(cmd, sock)
        elif kind == "control":
            await self._apply_control(cmd, sock)
        elif kind == "record":
            await self._apply_record(cmd, sock)
        else:
            await self._send(sock, {"type": "error", "message": f"unknown command {kind!r}"})

    async def _apply_toggle(self, cmd: dict, sock) -> None:
        rid = cmd.get("id")
        if rid not in self.controlled_ids:
            await self._send(
                sock, {"type": "error", "message": f"robot {rid!r} is not controllable"}
            )
            return
        if self.spec.params.method == "apf":
            await self._send(
                sock, {"type": "error", "message": "plain gradient method has no switch to toggle"}
            )
            return
        target = self.engine.toggle_mode(rid)
        override = self.engine.robots[rid].mode_override
        await self._send(
            sock,
            {"type": "ack", "command": "toggle", "id": rid, "override": override, "mode": target},
        )

    async def _apply_control(self, cmd: dict, sock) -> None:
        action = cmd.get("action")
        if action == "pause":
            self.running = False
        elif action == "resume":
            self.running = True
        elif action == "step":
            if not self.engine.settled:
                await self._advance()
        elif action == "reset":
            self.engine = Engine(
                self.spec, weights=self.weights, observe_ids=set(self.controlled_ids)
            )
            self.episode += 1
            await self.broadcast(self.snapshot_message())
        else:
            await self._send(sock, {"type": "error", "message": f"unknown action {action!r}"})
            return
        await self._send(sock, {"type": "ack", "command": "control", "action": action})

    async def _apply_record(self, cmd: dict, sock) -> None:
        action = cmd.get("action")
        if action == "start":
            if self.recorder is not None:
                await self._send(sock, {"type": "ack", "command": "record", "action": "start"})
                return
            if self.spec.params.method == "apf":
                await self._send(
                    sock,
                    {"type": "error", "message": "recording needs a switch-driven method"},
                )
                return
            try:
                self.recorder = DemonstrationRecorder(
                    cmd["path"], self.spec, self.controlled_ids, self.engine.t_seq
                )
            except OSError as exc:
                await self._send(sock, {"type": "error", "message": f"cannot record: {exc}"})
                return
            await self._send(sock, {"type": "ack", "command": "record", "action": "start"})
        elif action == "stop":
            if self.recorder is not None:
                self.recorder.close()
                self.recorder = None
            await self._send(sock, {"type": "ack", "command": "record", "action": "stop"})
        else:
            await self._send(sock, {"type": "error", "message": f"unknown record action {action!r}"})
