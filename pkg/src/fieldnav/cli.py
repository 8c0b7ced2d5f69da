"""Command-line interface: batch runs, summaries, log replay, scenario
generation, and the live cockpit service."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import batch as B
from .engine import ConfigurationError
from .scenarios import (
    LAYOUTS,
    METHODS,
    ScenarioError,
    default_params,
    generate_instance,
    save_scenario,
)


def _parse_seeds(text: str) -> tuple[int, ...]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(s) for s in text.split(","))


def _parse_layout(text: str) -> tuple[str, str | None]:
    """A layout name, or a path to a map file (implies from-file)."""
    if text in LAYOUTS:
        return text, None
    if os.path.exists(text):
        return "from-file", text
    raise ValueError(f"layout {text!r} is neither a known layout nor an existing file")


def cmd_run(args) -> int:
    layout, map_path = _parse_layout(args.layout)
    plan = B.BatchPlan(
        layouts=(layout,),
        robot_counts=tuple(int(n) for n in args.robots.split(",")),
        seeds=_parse_seeds(args.seeds),
        methods=tuple(args.method.split(",")),
        weights_path=args.model,
        map_path=map_path,
        workers=args.workers,
    )
    plan.validate()
    os.makedirs(args.out, exist_ok=True)
    rows = B.run_batch(plan)
    metrics_path = os.path.join(args.out, "metrics.csv")
    B.write_metrics_csv(rows, metrics_path)
    summary = B.summarize(rows)
    B.write_summary_csv(summary, os.path.join(args.out, "summary.csv"))
    print(f"{len(rows)} instances -> {metrics_path}")
    for s in summary:
        print(
            f"  {s['env']} {s['method']} N={s['N']}: "
            f"success={float(s['success_rate']):.2f} arrival={float(s['arrival_rate_mean']):.3f}"
        )
    return 0


def cmd_summarize(args) -> int:
    rows = B.read_metrics_csv(os.path.join(args.in_dir, "metrics.csv"))
    summary = B.summarize(rows)
    B.write_summary_csv(summary, args.out)
    print(f"{len(summary)} summary rows -> {args.out}")
    return 0


def cmd_replay(args) -> int:
    with open(args.log, "r", encoding="utf-8") as f:
        final_t = 0
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            final_t = max(final_t, rec["t"])
            if rec.get("event"):
                print(
                    f"t={rec['t']:5d} robot={rec['id']:3d} event={rec['event']:<14s} "
                    f"mode={'WF' if rec['mode'] else 'APF'} theta_rot={rec['theta_rot']:+.4f} "
                    f"|F|={rec['f_tot_mag']:.3f}"
                )
    print(f"log ends at t={final_t}")
    return 0


def cmd_generate(args) -> int:
    layout, map_path = _parse_layout(args.layout)
    params = default_params(layout, method=args.method)
    spec = generate_instance(layout, args.robots, args.seed, map_path=map_path, params=params)
    save_scenario(spec, args.out)
    print(f"scenario -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(
        scenario_path=args.scenario,
        layout=args.layout,
        robots=args.robots,
        seed=args.seed,
        speed=args.speed,
        controlled=args.controlled,
        weights_path=args.model,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fieldnav", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch of simulation instances")
    run.add_argument("--layout", required=True, help=f"one of {LAYOUTS} or a map file")
    run.add_argument("--method", required=True, help=f"comma list from {METHODS}")
    run.add_argument("--robots", required=True, help="team sizes, e.g. 6 or 2,6,10")
    run.add_argument("--seeds", required=True, help="A..B (inclusive) or comma list")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--model", default=None, help="weights file for apf-ls")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="aggregate a metrics CSV")
    summ.add_argument("--in", dest="in_dir", required=True)
    summ.add_argument("--out", required=True)
    summ.set_defaults(func=cmd_summarize)

    rep = sub.add_parser("replay", help="print switch events from a trajectory log")
    rep.add_argument("--log", required=True)
    rep.set_defaults(func=cmd_replay)

    gen = sub.add_parser("generate", help="write a scenario file for a layout")
    gen.add_argument("--layout", required=True)
    gen.add_argument("--robots", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--method", default="apf-rs")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    serve = sub.add_parser("serve", help="run the live cockpit service")
    serve.add_argument("--scenario", default=None, help="scenario JSON file")
    serve.add_argument("--layout", default="flat", help="generated layout when no file given")
    serve.add_argument("--robots", type=int, default=6)
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--model", default=None, help="weights file for apf-ls scenarios")
    serve.add_argument("--speed", type=float, default=1.0, help="real-time multiplier")
    serve.add_argument("--controlled", type=int, default=3, help="number of controllable robots")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
