"""Model export/import and numerical properties."""

import numpy as np
import pytest
import torch

from switch_trainer.model import NetConfig, SwitchClassifier
from switch_trainer.weights_io import WeightsIOError, export_model, import_model

TINY = NetConfig(layers=1, embed_dim=16, mlp_dim=16, heads=2, t_seq=4)


def test_export_import_round_trip_bits(tmp_path):
    torch.manual_seed(0)
    model = SwitchClassifier(TINY, input_dim=16 + 17)
    path = tmp_path / "w.bin"
    export_model(model, 16, path)
    loaded, m, manifest = import_model(path)
    assert m == 16
    assert manifest["layers"] == 1 and manifest["T_seq"] == 4
    for (name_a, pa), (name_b, pb) in zip(
        sorted(model.state_dict().items()), sorted(loaded.state_dict().items())
    ):
        assert name_a == name_b
        np.testing.assert_array_equal(
            pa.numpy().astype(np.float32), pb.numpy().astype(np.float32)
        )


def test_export_rejects_mismatched_ray_count(tmp_path):
    torch.manual_seed(0)
    model = SwitchClassifier(TINY, input_dim=16 + 17)
    with pytest.raises(WeightsIOError):
        export_model(model, 32, tmp_path / "w.bin")
    assert not (tmp_path / "w.bin").exists()


def test_forward_preserved_through_file(tmp_path):
    torch.manual_seed(1)
    model = SwitchClassifier(TINY, input_dim=16 + 17)
    path = tmp_path / "w.bin"
    export_model(model, 16, path)
    loaded, _, _ = import_model(path)
    x = torch.randn(3, TINY.t_seq, 16 + 17)
    with torch.no_grad():
        np.testing.assert_allclose(
            model(x).numpy(), loaded(x).numpy(), rtol=0, atol=1e-6
        )


def test_bce_on_perfect_predictions_is_tiny():
    loss = torch.nn.BCELoss()
    probs = torch.tensor([1.0 - 1e-7, 1e-7])
    labels = torch.tensor([1.0, 0.0])
    assert float(loss(probs, labels)) <= 1e-6


def test_pos_embed_changes_row_sensitivity():
    torch.manual_seed(2)
    model = SwitchClassifier(TINY, input_dim=16 + 17)
    x = torch.randn(1, TINY.t_seq, 16 + 17)
    perm = x[:, torch.randperm(TINY.t_seq, generator=torch.Generator().manual_seed(3))]
    with torch.no_grad():
        assert float(model(x)) != pytest.approx(float(model(perm)), abs=1e-9)
