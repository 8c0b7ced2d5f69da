import json

import numpy as np
import pytest


def write_dataset(
    path,
    m=16,
    t_seq=5,
    streams=60,
    stream_len=10,
    seed=0,
    threshold=5.0,
    constant_force_per_stream=True,
):
    """Synthetic demonstration file: label = (total-force magnitude < threshold).

    The force-magnitude feature lives at index M+14 of each observation.
    """
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as f:
        header = {
            "version": 1,
            "M": m,
            "T_seq": t_seq,
            "controlled_ids": [0, 1, 2],
            "scenario_hash": "synthetic",
        }
        f.write(json.dumps(header) + "\n")
        for s in range(streams):
            episode, robot = divmod(s, 3)
            base = rng.uniform(0.0, 10.0)
            for t in range(stream_len):
                obs = rng.uniform(0.0, 10.0, size=m + 17)
                fmag = base if constant_force_per_stream else rng.uniform(0.0, 10.0)
                obs[m + 14] = fmag
                rec = {
                    "episode": episode,
                    "t": t + 1,
                    "robot": robot,
                    "observation": [float(v) for v in obs],
                    "label": int(fmag < threshold),
                }
                f.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture
def dataset_file(tmp_path):
    return write_dataset(tmp_path / "demo.jsonl")
