"""Training loop: binary cross entropy, Adam at 3e-4 over 50 epochs, 80/20
train/test split, best-test-accuracy checkpoint selection."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import Samples, split_indices
from .model import NetConfig, SwitchClassifier


@dataclass
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 3e-4
    batch_size: int = 32
    seed: int = 0
    train_fraction: float = 0.8
    pos_weight: float | None = None
    net: NetConfig = field(default_factory=NetConfig)


@dataclass
class TrainResult:
    model: SwitchClassifier
    best_epoch: int
    best_accuracy: float
    history: list[dict]


class TrainingError(ValueError):
    pass


def evaluate(model: SwitchClassifier, windows: torch.Tensor, labels: torch.Tensor) -> dict:
    model.eval()
    with torch.no_grad():
        probs = model.probabilities(windows)
    pred = (probs >= 0.5).float()
    tp = float(((pred == 1) & (labels == 1)).sum())
    fp = float(((pred == 1) & (labels == 0)).sum())
    fn = float(((pred == 0) & (labels == 1)).sum())
    correct = float((pred == labels).sum())
    n = len(labels)
    return {
        "accuracy": correct / n if n else 0.0,
        "precision": tp / (tp + fp) if tp + fp else 0.0,
        "recall": tp / (tp + fn) if tp + fn else 0.0,
    }


def train(samples: Samples, cfg: TrainConfig) -> TrainResult:
    """Train the classifier and keep the epoch with the best test accuracy."""
    if cfg.net.t_seq != samples.t_seq:
        raise TrainingError(
            f"window depth mismatch: config t_seq={cfg.net.t_seq}, data t_seq={samples.t_seq}"
        )
    torch.manual_seed(cfg.seed)
    torch.set_num_threads(1)  # reproducible accumulation order

    train_idx, test_idx = split_indices(len(samples), cfg.seed, cfg.train_fraction)
    train_labels = samples.labels[train_idx]
    if len(np.unique(train_labels)) < 2:
        raise TrainingError("training split contains a single class; collect more demonstrations")

    x_train = torch.from_numpy(samples.windows[train_idx])
    y_train = torch.from_numpy(train_labels)
    x_test = torch.from_numpy(samples.windows[test_idx])
    y_test = torch.from_numpy(samples.labels[test_idx])

    model = SwitchClassifier(cfg.net, input_dim=samples.ray_count + 17)
    pos_weight = None
    if cfg.pos_weight is not None:
        pos_weight = torch.tensor(cfg.pos_weight)
    loss_fn = torch.nn.BCEWithLogitsLoss(pos_weight=pos_weight)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)

    best_state = copy.deepcopy(model.state_dict())
    best_acc, best_epoch = -1.0, 0
    history: list[dict] = []
    gen = torch.Generator().manual_seed(cfg.seed)
    n = len(train_idx)

    for epoch in range(1, cfg.epochs + 1):
        model.train()
        order = torch.randperm(n, generator=gen)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            optimizer.zero_grad()
            logits = model(x_train[batch])
            loss = loss_fn(logits, y_train[batch])
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch)
        metrics = evaluate(model, x_test, y_test)
        history.append({"epoch": epoch, "loss": epoch_loss / n, **metrics})
        if metrics["accuracy"] > best_acc:
            best_acc = metrics["accuracy"]
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())

    if cfg.epochs == 0:
        best_acc = evaluate(model, x_test, y_test)["accuracy"] if len(y_test) else 0.0
    model.load_state_dict(best_state)
    return TrainResult(model=model, best_epoch=best_epoch, best_accuracy=best_acc, history=history)
