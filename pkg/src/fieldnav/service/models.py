"""Pydantic request/response models for the REST surface."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    t: int
    running: bool
    clients: int


class GenerateRequest(BaseModel):
    layout: str = "swap"
    robots: int = Field(default=6, ge=1)
    seed: int = 0
    method: str = "apf-rs"


class RunRequest(BaseModel):
    layout: str = "swap"
    robots: int = Field(default=6, ge=1)
    seed: int = 0
    method: str = "apf-rs"
    weights_path: str | None = None


class RunResponse(BaseModel):
    success: bool
    arrival_rate: float
    makespan: int | None
    mean_timestep: float | None
    collisions: int
    steps: int
