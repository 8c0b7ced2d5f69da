"""Demonstration dataset ingestion.

Files are JSON-lines: a header {version, M, T_seq, controlled_ids,
scenario_hash} followed by records {episode, t, robot, observation, label}.
Each record becomes one training sample: the observation stacked with its
T_seq-1 predecessors from the same (file, episode, robot) stream, left-padded
with the stream's first observation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DATASET_VERSION = 1


class DatasetError(ValueError):
    """Malformed or mutually inconsistent dataset files."""


@dataclass
class Samples:
    windows: np.ndarray  # (N, T_seq, M+17) float32
    labels: np.ndarray  # (N,) float32 in {0, 1}
    ray_count: int
    t_seq: int

    def __len__(self) -> int:
        return len(self.labels)


def window_stream(rows: list[np.ndarray], t_seq: int) -> list[np.ndarray]:
    """One window per row: the trailing t_seq rows, padded at the start of the
    episode by repeating the first row."""
    out = []
    for i in range(len(rows)):
        take = rows[max(0, i - t_seq + 1) : i + 1]
        if len(take) < t_seq:
            take = [rows[0]] * (t_seq - len(take)) + take
        out.append(np.stack(take))
    return out


def load_dataset(paths, t_seq: int | None = None) -> Samples:
    """Parse one or more demonstration files into stacked windows."""
    ray_count = None
    header_t_seq = None
    windows: list[np.ndarray] = []
    labels: list[float] = []
    for file_idx, path in enumerate(paths):
        with open(path, "r", encoding="utf-8") as f:
            header_line = f.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}: bad header line: {exc}") from exc
            if header.get("version") != DATASET_VERSION:
                raise DatasetError(f"{path}: unsupported version {header.get('version')!r}")
            m = int(header["M"])
            if ray_count is None:
                ray_count = m
            elif m != ray_count:
                raise DatasetError(f"{path}: M={m} conflicts with earlier files (M={ray_count})")
            ht = int(header["T_seq"])
            if header_t_seq is None:
                header_t_seq = ht
            elif ht != header_t_seq:
                raise DatasetError(f"{path}: T_seq={ht} conflicts with earlier files")
            streams: dict[tuple, list[tuple[int, np.ndarray, int]]] = {}
            for line in f:
                if not line.strip():
                    continue
                rec = json.loads(line)
                obs = np.asarray(rec["observation"], dtype=np.float32)
                if obs.shape != (m + 17,):
                    raise DatasetError(
                        f"{path}: observation length {obs.shape[0]} != M+17 = {m + 17}"
                    )
                if rec["label"] not in (0, 1):
                    raise DatasetError(f"{path}: label must be 0 or 1")
                key = (file_idx, rec["episode"], rec["robot"])
                streams.setdefault(key, []).append((rec["t"], obs, rec["label"]))
            eff_t_seq = t_seq or header_t_seq
            for key in sorted(streams):
                entries = sorted(streams[key], key=lambda e: e[0])
                rows = [e[1] for e in entries]
                windows.extend(window_stream(rows, eff_t_seq))
                labels.extend(float(e[2]) for e in entries)
    if ray_count is None or not windows:
        raise DatasetError("no records found")
    return Samples(
        windows=np.stack(windows),
        labels=np.asarray(labels, dtype=np.float32),
        ray_count=ray_count,
        t_seq=t_seq or header_t_seq,
    )


def split_indices(n: int, seed: int, train_fraction: float = 0.8) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic shuffled split."""
    order = np.random.default_rng(seed).permutation(n)
    cut = int(round(n * train_fraction))
    return order[:cut], order[cut:]
