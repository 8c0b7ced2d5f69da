"""Batch experiment harness: sweeps layouts x team sizes x seeds x methods,
writes one metrics CSV row per instance plus aggregated summary tables.

Instances are independent jobs executed by a worker pool; rows are emitted in
sorted order after a join barrier, so results are byte-identical regardless
of the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import multiprocessing
from dataclasses import dataclass, replace

from .engine import ConfigurationError, run_instance
from .learned import load_weights
from .scenarios import METHODS, default_params, generate_instance

CSV_FIELDS = [
    "env",
    "method",
    "N",
    "seed",
    "success",
    "arrival_rate",
    "makespan",
    "mean_timestep",
    "collisions",
]

SUMMARY_FIELDS = [
    "env",
    "method",
    "N",
    "instances",
    "success_rate",
    "arrival_rate_mean",
    "makespan_mean",
    "makespan_sd",
    "mean_timestep_mean",
    "mean_timestep_sd",
]


@dataclass(frozen=True)
class BatchPlan:
    layouts: tuple[str, ...]
    robot_counts: tuple[int, ...]
    seeds: tuple[int, ...]
    methods: tuple[str, ...]
    weights_path: str | None = None
    map_path: str | None = None
    workers: int = 1

    def validate(self) -> None:
        if not (self.layouts and self.robot_counts and self.seeds and self.methods):
            raise ConfigurationError("batch plan has an empty dimension")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigurationError(f"unknown method {m!r}")
        if "apf-ls" in self.methods:
            if not self.weights_path:
                raise ConfigurationError("method apf-ls requires --model weights")
            load_weights(self.weights_path)  # fail fast before any run
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def jobs(self) -> list[tuple[str, str, int, int]]:
        out = []
        for layout in self.layouts:
            for method in self.methods:
                for n in self.robot_counts:
                    for seed in self.seeds:
                        out.append((layout, method, n, seed))
        return sorted(out)


_WORKER_WEIGHTS = None
_WORKER_WEIGHTS_PATH = None


def _init_worker(weights_path):
    global _WORKER_WEIGHTS, _WORKER_WEIGHTS_PATH
    _WORKER_WEIGHTS_PATH = weights_path
    _WORKER_WEIGHTS = load_weights(weights_path) if weights_path else None


def _run_job(args: tuple[str, str, int, int, str | None, str | None]) -> dict:
    layout, method, n, seed, map_path, weights_path = args
    global _WORKER_WEIGHTS
    params = replace(
        default_params(layout), method=method,
        weights_path=weights_path if method == "apf-ls" else None,
    )
    spec = generate_instance(layout, n, seed, map_path=map_path, params=params)
    weights = _WORKER_WEIGHTS if method == "apf-ls" else None
    report, _log = run_instance(spec, weights=weights)
    return {
        "env": layout,
        "method": method,
        "N": n,
        "seed": seed,
        "success": int(report.success),
        "arrival_rate": repr(report.arrival_rate),
        "makespan": "" if report.makespan is None else report.makespan,
        "mean_timestep": "" if report.mean_timestep is None else repr(report.mean_timestep),
        "collisions": report.collision_count,
    }


def run_batch(plan: BatchPlan) -> list[dict]:
    """Execute the plan and return per-instance CSV rows in sorted order."""
    plan.validate()
    jobs = [(l, m, n, s, plan.map_path, plan.weights_path) for (l, m, n, s) in plan.jobs()]
    if plan.workers == 1:
        _init_worker(plan.weights_path)
        rows = [_run_job(j) for j in jobs]
    else:
        ctx = multiprocessing.get_context("spawn")
        with ctx.Pool(plan.workers, initializer=_init_worker, initargs=(plan.weights_path,)) as pool:
            rows = pool.map(_run_job, jobs)
    rows.sort(key=lambda r: (r["env"], r["method"], r["N"], r["seed"]))
    return rows


def rows_to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_metrics_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(rows_to_csv(rows, CSV_FIELDS))


def read_metrics_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _mean_sd(values: list[float]) -> tuple[str, str]:
    if not values:
        return "", ""
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return repr(mean), repr(math.sqrt(var))


def summarize(rows: list[dict]) -> list[dict]:
    """Aggregate metric rows per (env, N, method).

    Makespan statistics cover successful instances only and stay empty when
    there are none; mean-timestep statistics cover instances where at least
    one robot arrived cleanly.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["env"], row["method"], int(row["N"])), []).append(row)
    out = []
    for (env, method, n), group in sorted(groups.items()):
        successes = [r for r in group if int(r["success"]) == 1]
        makespans = [float(r["makespan"]) for r in successes if r["makespan"] != ""]
        timesteps = [float(r["mean_timestep"]) for r in group if r["mean_timestep"] != ""]
        mk_mean, mk_sd = _mean_sd(makespans)
        ts_mean, ts_sd = _mean_sd(timesteps)
        out.append(
            {
                "env": env,
                "method": method,
                "N": n,
                "instances": len(group),
                "success_rate": repr(len(successes) / len(group)),
                "arrival_rate_mean": repr(
                    sum(float(r["arrival_rate"]) for r in group) / len(group)
                ),
                "makespan_mean": mk_mean,
                "makespan_sd": mk_sd,
                "mean_timestep_mean": ts_mean,
                "mean_timestep_sd": ts_sd,
            }
        )
    return out


def write_summary_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(rows_to_csv(rows, SUMMARY_FIELDS))
