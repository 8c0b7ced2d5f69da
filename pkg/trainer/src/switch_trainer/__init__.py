"""Training pipeline for the wall-follow mode classifier."""

from .data import Samples, load_dataset, split_indices, window_stream
from .model import NetConfig, SwitchClassifier
from .train import TrainConfig, TrainResult, evaluate, train
from .weights_io import export_model, import_model

__all__ = [
    "Samples",
    "load_dataset",
    "split_indices",
    "window_stream",
    "NetConfig",
    "SwitchClassifier",
    "TrainConfig",
    "TrainResult",
    "evaluate",
    "train",
    "export_model",
    "import_model",
]
