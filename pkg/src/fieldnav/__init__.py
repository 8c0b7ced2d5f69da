"""Decentralized multi-robot navigation with potential fields and
wall-following escape, plus a simulator, batch harness, and live
demonstration service."""

from .engine import Engine, MetricsReport, TrajectoryLog, run_instance
from .forces import ForceSet, PotentialParams, normalized_attractive, repulsive_force, total_force
from .geometry import Bounds, DiscBody, Scan, ScanConfig, WorldModel, collisions, raycast
from .learned import ViTConfig, WeightsBundle, build_observation, load_weights, save_weights, vit_forward
from .robot import ControlCommand, KinematicsConfig, RobotState, relative_goal
from .scenarios import ScenarioSpec, SimParams, generate_instance, load_scenario, save_scenario
from .switching import RSParams, SwitchMemory, break_wf, check_loop, choose_dir, rs_step

__version__ = "0.1.0"

__all__ = [
    "Engine",
    "MetricsReport",
    "TrajectoryLog",
    "run_instance",
    "ForceSet",
    "PotentialParams",
    "normalized_attractive",
    "repulsive_force",
    "total_force",
    "Bounds",
    "DiscBody",
    "Scan",
    "ScanConfig",
    "WorldModel",
    "collisions",
    "raycast",
    "ViTConfig",
    "WeightsBundle",
    "build_observation",
    "load_weights",
    "save_weights",
    "vit_forward",
    "ControlCommand",
    "KinematicsConfig",
    "RobotState",
    "relative_goal",
    "ScenarioSpec",
    "SimParams",
    "generate_instance",
    "load_scenario",
    "save_scenario",
    "RSParams",
    "SwitchMemory",
    "break_wf",
    "check_loop",
    "choose_dir",
    "rs_step",
]
