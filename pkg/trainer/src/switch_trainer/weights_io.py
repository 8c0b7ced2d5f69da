"""Export/import of the shared binary weights format.

The file is one UTF-8 JSON manifest line ({format_version, M, T_seq,
embed_dim, mlp_dim, layers, heads, normalization, tensors}) followed by the
concatenated row-major little-endian float32 tensor payloads at the declared
offsets. Linear weights are stored input-major, shape (in, out), so the file
is independent of this library's (out, in) parameter layout.
"""

from __future__ import annotations

import json

import numpy as np
import torch

from .model import NetConfig, SwitchClassifier

FORMAT_VERSION = 1


class WeightsIOError(ValueError):
    pass


def _export_tensors(model: SwitchClassifier) -> dict[str, np.ndarray]:
    """Map module parameters to file tensor names, transposing linears."""

    def lin_w(linear):
        return linear.weight.detach().cpu().numpy().T  # (in, out)

    def vec(t):
        return t.detach().cpu().numpy()

    out: dict[str, np.ndarray] = {
        "patch.weight": lin_w(model.patch),
        "patch.bias": vec(model.patch.bias),
        "pos_embed": vec(model.pos_embed),
        "head.fc1.weight": lin_w(model.head_fc1),
        "head.fc1.bias": vec(model.head_fc1.bias),
        "head.fc2.weight": lin_w(model.head_fc2),
        "head.fc2.bias": vec(model.head_fc2.bias),
        "head.fc3.weight": lin_w(model.head_fc3),
        "head.fc3.bias": vec(model.head_fc3.bias),
    }
    for i, layer in enumerate(model.encoder):
        p = f"enc{i}"
        out[f"{p}.ln1.weight"] = vec(layer.ln1.weight)
        out[f"{p}.ln1.bias"] = vec(layer.ln1.bias)
        for name, lin in (("q", layer.q), ("k", layer.k), ("v", layer.v), ("out", layer.out)):
            out[f"{p}.attn.{name}.weight"] = lin_w(lin)
            out[f"{p}.attn.{name}.bias"] = vec(lin.bias)
        out[f"{p}.ln2.weight"] = vec(layer.ln2.weight)
        out[f"{p}.ln2.bias"] = vec(layer.ln2.bias)
        out[f"{p}.mlp.fc1.weight"] = lin_w(layer.fc1)
        out[f"{p}.mlp.fc1.bias"] = vec(layer.fc1.bias)
        out[f"{p}.mlp.fc2.weight"] = lin_w(layer.fc2)
        out[f"{p}.mlp.fc2.bias"] = vec(layer.fc2.bias)
    return out


def export_model(
    model: SwitchClassifier,
    ray_count: int,
    path,
    normalization: tuple[np.ndarray, np.ndarray] | None = None,
) -> None:
    cfg = model.cfg
    if model.input_dim != ray_count + 17:
        raise WeightsIOError(
            f"model input dim {model.input_dim} does not match M+17 = {ray_count + 17}"
        )
    tensors = _export_tensors(model)
    order = sorted(tensors)
    entries = []
    offset = 0
    for name in order:
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        tensors[name] = arr
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "f32",
                "offset": offset,
                "length": arr.size * 4,
            }
        )
        offset += arr.size * 4
    norm = None
    if normalization is not None:
        norm = {
            "mean": [float(v) for v in normalization[0]],
            "std": [float(v) for v in normalization[1]],
        }
    manifest = {
        "format_version": FORMAT_VERSION,
        "M": ray_count,
        "T_seq": cfg.t_seq,
        "embed_dim": cfg.embed_dim,
        "mlp_dim": cfg.mlp_dim,
        "layers": cfg.layers,
        "heads": cfg.heads,
        "normalization": norm,
        "tensors": entries,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(manifest).encode("utf-8"))
        f.write(b"\n")
        for name in order:
            f.write(tensors[name].tobytes())


def import_model(path) -> tuple[SwitchClassifier, int, dict]:
    """Rebuild a model from an exported file; returns (model, M, manifest)."""
    with open(path, "rb") as f:
        manifest = json.loads(f.readline().decode("utf-8"))
        payload = f.read()
    if manifest.get("format_version") != FORMAT_VERSION:
        raise WeightsIOError(f"unsupported format_version {manifest.get('format_version')!r}")
    cfg = NetConfig(
        layers=manifest["layers"],
        embed_dim=manifest["embed_dim"],
        mlp_dim=manifest["mlp_dim"],
        heads=manifest["heads"],
        t_seq=manifest["T_seq"],
    )
    m = int(manifest["M"])
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        if entry["dtype"] != "f32" or entry["length"] != count * 4:
            raise WeightsIOError(f"bad tensor entry {entry['name']!r}")
        start, end = entry["offset"], entry["offset"] + entry["length"]
        tensors[entry["name"]] = np.frombuffer(payload[start:end], dtype="<f4").reshape(shape)

    model = SwitchClassifier(cfg, input_dim=m + 17)

    def set_lin(linear, wname):
        linear.weight.data = torch.from_numpy(tensors[wname].T.copy())
        linear.bias.data = torch.from_numpy(tensors[wname.replace("weight", "bias")].copy())

    set_lin(model.patch, "patch.weight")
    model.pos_embed.data = torch.from_numpy(tensors["pos_embed"].copy())
    for i, layer in enumerate(model.encoder):
        p = f"enc{i}"
        layer.ln1.weight.data = torch.from_numpy(tensors[f"{p}.ln1.weight"].copy())
        layer.ln1.bias.data = torch.from_numpy(tensors[f"{p}.ln1.bias"].copy())
        for name, lin in (("q", layer.q), ("k", layer.k), ("v", layer.v), ("out", layer.out)):
            set_lin(lin, f"{p}.attn.{name}.weight")
        layer.ln2.weight.data = torch.from_numpy(tensors[f"{p}.ln2.weight"].copy())
        layer.ln2.bias.data = torch.from_numpy(tensors[f"{p}.ln2.bias"].copy())
        set_lin(layer.fc1, f"{p}.mlp.fc1.weight")
        set_lin(layer.fc2, f"{p}.mlp.fc2.weight")
    set_lin(model.head_fc1, "head.fc1.weight")
    set_lin(model.head_fc2, "head.fc2.weight")
    set_lin(model.head_fc3, "head.fc3.weight")
    return model, m, manifest
