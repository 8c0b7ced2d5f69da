"""Live-simulation service: WebSocket cockpit protocol plus REST endpoints."""

from .app import create_app

__all__ = ["create_app"]
