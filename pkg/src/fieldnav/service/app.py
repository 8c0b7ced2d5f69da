"""FastAPI application wrapping the simulation core.

One live session per process, streamed over /ws using JSON text frames;
REST endpoints cover health, the active scenario, scenario generation, and
fire-and-forget batch-style runs.
"""

from __future__ import annotations

import json
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from ..engine import ConfigurationError, run_instance
from ..learned import load_weights
from ..scenarios import ScenarioError, default_params, generate_instance, load_scenario, to_json
from .models import GenerateRequest, HealthResponse, RunRequest, RunResponse
from .session import SimulationSession


def build_session(
    scenario_path: str | None = None,
    layout: str = "flat",
    robots: int = 6,
    seed: int = 0,
    speed: float = 1.0,
    controlled: int = 3,
    weights_path: str | None = None,
) -> SimulationSession:
    if scenario_path:
        spec = load_scenario(scenario_path)
    else:
        spec = generate_instance(layout, robots, seed)
    weights = None
    if spec.params.method == "apf-ls":
        path = weights_path or spec.params.weights_path
        if not path:
            raise ConfigurationError("scenario method apf-ls needs a weights file")
        weights = load_weights(path)
    return SimulationSession(spec, weights=weights, controlled=controlled, speed=speed)


def create_app(ui_dir: str | None = None, session: SimulationSession | None = None, **kwargs) -> FastAPI:
    sess = session or build_session(**kwargs)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        sess.start()
        yield
        await sess.stop()

    app = FastAPI(title="fieldnav live simulation", lifespan=lifespan)
    app.state.session = sess

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok", t=sess.engine.t, running=sess.running, clients=len(sess.clients)
        )

    @app.get("/scenario")
    def scenario() -> dict:
        return json.loads(to_json(sess.spec))

    @app.post("/scenarios/generate")
    def generate(req: GenerateRequest) -> dict:
        try:
            spec = generate_instance(
                req.layout, req.robots, req.seed,
                params=default_params(req.layout, method=req.method),
            )
        except (ScenarioError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return json.loads(to_json(spec))

    @app.post("/runs", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            params = default_params(req.layout, method=req.method, weights_path=req.weights_path)
            spec = generate_instance(req.layout, req.robots, req.seed, params=params)
            report, log = run_instance(spec)
        except (ScenarioError, ConfigurationError, ValueError, OSError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        steps = max((r.t for r in log.records), default=0)
        return RunResponse(
            success=report.success,
            arrival_rate=report.arrival_rate,
            makespan=report.makespan,
            mean_timestep=report.mean_timestep,
            collisions=report.collision_count,
            steps=steps,
        )

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        sess.clients.add(websocket)
        try:
            await websocket.send_text(sess.init_message())
            await websocket.send_text(sess.snapshot_message())
            while True:
                text = await websocket.receive_text()
                try:
                    cmd = json.loads(text)
                except json.JSONDecodeError:
                    await websocket.send_text(
                        json.dumps({"type": "error", "message": "frames must be JSON"})
                    )
                    continue
                await sess.commands.put((cmd, websocket))
        except WebSocketDisconnect:
            pass
        finally:
            sess.clients.discard(websocket)

    ui = ui_dir or os.path.join(os.getcwd(), "frontend", "dist")
    if os.path.isdir(ui):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app
