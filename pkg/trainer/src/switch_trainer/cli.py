"""Command line: train a classifier from demonstration files, evaluate an
exported model."""

from __future__ import annotations

import argparse
import glob
import os
import sys

import numpy as np
import torch

from .data import DatasetError, load_dataset, split_indices
from .model import NetConfig
from .train import TrainConfig, TrainingError, evaluate, train
from .weights_io import WeightsIOError, export_model, import_model


def _expand(data: str) -> list[str]:
    if os.path.isdir(data):
        paths = sorted(glob.glob(os.path.join(data, "*.jsonl")))
    else:
        paths = sorted(glob.glob(data)) or [data]
    if not paths:
        raise DatasetError(f"no dataset files under {data!r}")
    return paths


def cmd_train(args) -> int:
    samples = load_dataset(_expand(args.data), t_seq=args.tseq)
    cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        pos_weight=args.pos_weight,
        net=NetConfig(
            layers=args.layers, embed_dim=args.embed, mlp_dim=args.mlp,
            heads=args.heads, t_seq=samples.t_seq,
        ),
    )
    result = train(samples, cfg)
    export_model(result.model, samples.ray_count, args.out)
    print(
        f"{len(samples)} samples, best epoch {result.best_epoch} "
        f"(test accuracy {result.best_accuracy:.3f}) -> {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    model, m, manifest = import_model(args.model)
    samples = load_dataset(_expand(args.data), t_seq=manifest["T_seq"])
    if samples.ray_count != m:
        print(f"error: model M={m}, data M={samples.ray_count}", file=sys.stderr)
        return 1
    _, test_idx = split_indices(len(samples), args.seed)
    idx = test_idx if args.test_split_only else np.arange(len(samples))
    metrics = evaluate(
        model,
        torch.from_numpy(samples.windows[idx]),
        torch.from_numpy(samples.labels[idx]),
    )
    print(
        f"accuracy={metrics['accuracy']:.4f} precision={metrics['precision']:.4f} "
        f"recall={metrics['recall']:.4f} over {len(idx)} samples"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="switch-trainer", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train and export a classifier")
    tr.add_argument("--data", required=True, help="dataset file, glob, or directory")
    tr.add_argument("--out", required=True, help="weights output path")
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--lr", type=float, default=3e-4)
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--tseq", type=int, default=None, help="window depth (default: file header)")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--layers", type=int, default=3)
    tr.add_argument("--embed", type=int, default=512)
    tr.add_argument("--mlp", type=int, default=512)
    tr.add_argument("--heads", type=int, default=8)
    tr.add_argument("--pos-weight", type=float, default=None,
                    help="optional positive-class weight for imbalanced data")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate an exported model on a dataset")
    ev.add_argument("--data", required=True)
    ev.add_argument("--model", required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--test-split-only", action="store_true",
                    help="evaluate on the seed-determined 20%% test split")
    ev.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, TrainingError, WeightsIOError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
