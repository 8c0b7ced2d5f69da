"""Regenerate the cross-implementation parity fixture used by the runtime
package's test suite: a small exported weights file plus observation windows
with this trainer's forward outputs frozen alongside.

Usage: python3 trainer/scripts/make_parity_fixture.py [fixtures_dir]
"""

import json
import pathlib
import sys

import numpy as np
import torch

from switch_trainer.model import NetConfig, SwitchClassifier
from switch_trainer.weights_io import export_model


def main() -> None:
    out_dir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = NetConfig(layers=2, embed_dim=32, mlp_dim=48, heads=4, t_seq=6)
    m = 16
    torch.manual_seed(20240131)
    model = SwitchClassifier(cfg, input_dim=m + 17)
    weights_path = out_dir / "parity_weights.bin"
    export_model(model, m, weights_path)

    rng = np.random.default_rng(99)
    cases = []
    for _ in range(8):
        window = rng.normal(scale=2.0, size=(cfg.t_seq, m + 17)).astype(np.float32)
        with torch.no_grad():
            prob = float(model.probabilities(torch.from_numpy(window[None]))[0])
        cases.append({"window": window.tolist(), "probability": prob})
    (out_dir / "parity_cases.json").write_text(json.dumps({"M": m, "cases": cases}))
    print(f"wrote {weights_path} and {out_dir / 'parity_cases.json'}")


if __name__ == "__main__":
    main()
