"""Learned mode switch: observation vectors, sequence stacking, transformer
encoder inference over loadable weights, and override of the rule-based
decision.

The network consumes a (T_seq, M+17) matrix of stacked per-step observation
vectors, one row per timestep, and emits a wall-follow probability. Weights
live in a self-describing binary file: a single JSON manifest line followed
by raw little-endian float32 tensor payloads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .forces import ForceSet
from .geometry import Scan
from .robot import RobotState
from .switching import RSParams, SwitchMemory, goal_ray_index

OBS_EXTRA = 17
WEIGHTS_FORMAT_VERSION = 1
LN_EPS = 1e-5


class WeightsError(ValueError):
    """Malformed or inconsistent weights file."""


def relative_goal_from(state: RobotState, goal: np.ndarray) -> np.ndarray:
    c, s = math.cos(state.psi), math.sin(state.psi)
    dx = goal[0] - state.x
    dy = goal[1] - state.y
    return np.array([c * dx + s * dy, -s * dx + c * dy])


def build_observation(
    scan: Scan,
    g_rel: np.ndarray,
    state: RobotState,
    goal: np.ndarray,
    mem: SwitchMemory,
    force: ForceSet,
    theta_rot_now: float,
) -> np.ndarray:
    """Assemble the per-step observation vector of length M+17.

    Layout: M ranges, then relative goals at (now, previous, hit point,
    leave point), heading, rotation angles at the same four times, range of
    the goal-nearest ray, total-force magnitude, direction chosen at the hit
    point, and the mode flag. Before the first hit (leave) point the
    corresponding slots fall back to the current relative goal and zero
    angle. `mem` must not yet include the current step, so its `state_now`
    and `theta_rot` still describe t-1.
    """
    m = scan.ray_count
    out = np.empty(m + OBS_EXTRA)
    out[:m] = scan.ranges
    rel_prev = relative_goal_from(mem.state_now, goal)
    if mem.hp_now is not None:
        rel_hp = relative_goal_from(mem.hp_now.state, goal)
        theta_hp = mem.hp_now.theta_rot
        i_dir_hp = float(mem.hp_now.i_dir)
    else:
        rel_hp, theta_hp, i_dir_hp = g_rel, 0.0, 1.0
    if mem.lp_now is not None:
        rel_lp = relative_goal_from(mem.lp_now.state, goal)
        theta_lp = mem.lp_now.theta_rot
    else:
        rel_lp, theta_lp = g_rel, 0.0
    out[m : m + 2] = g_rel
    out[m + 2 : m + 4] = rel_prev
    out[m + 4 : m + 6] = rel_hp
    out[m + 6 : m + 8] = rel_lp
    out[m + 8] = state.psi
    out[m + 9] = theta_rot_now
    out[m + 10] = mem.theta_rot
    out[m + 11] = theta_hp
    out[m + 12] = theta_lp
    out[m + 13] = scan.ranges[goal_ray_index(scan, g_rel)]
    out[m + 14] = force.magnitude
    out[m + 15] = i_dir_hp
    out[m + 16] = 1.0 if theta_rot_now != 0.0 else 0.0
    return out


def stack(history: list[np.ndarray], t_seq: int) -> np.ndarray:
    """Last t_seq observations, oldest first, left-padded with the episode's
    initial observation when the episode is still shorter than t_seq."""
    if not history:
        raise ValueError("cannot stack an empty episode buffer")
    n = len(history)
    if n >= t_seq:
        rows = history[n - t_seq :]
    else:
        rows = [history[0]] * (t_seq - n) + list(history)
    return np.stack(rows)


@dataclass(frozen=True)
class ViTConfig:
    """Encoder geometry. One patch = one full observation row."""

    encoder_layers: int = 3
    embed_dim: int = 512
    mlp_dim: int = 512
    heads: int = 8
    t_seq: int = 10

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")
        if min(self.encoder_layers, self.embed_dim, self.mlp_dim, self.heads, self.t_seq) < 1:
            raise ValueError("all dimensions must be positive")


def tensor_shapes(cfg: ViTConfig, input_dim: int) -> dict[str, tuple[int, ...]]:
    """Expected tensor name -> shape map. Linear weights are stored (in, out)."""
    e, h = cfg.embed_dim, cfg.mlp_dim
    shapes: dict[str, tuple[int, ...]] = {
        "patch.weight": (input_dim, e),
        "patch.bias": (e,),
        "pos_embed": (cfg.t_seq, e),
    }
    for i in range(cfg.encoder_layers):
        p = f"enc{i}"
        shapes[f"{p}.ln1.weight"] = (e,)
        shapes[f"{p}.ln1.bias"] = (e,)
        for name in ("q", "k", "v", "out"):
            shapes[f"{p}.attn.{name}.weight"] = (e, e)
            shapes[f"{p}.attn.{name}.bias"] = (e,)
        shapes[f"{p}.ln2.weight"] = (e,)
        shapes[f"{p}.ln2.bias"] = (e,)
        shapes[f"{p}.mlp.fc1.weight"] = (e, h)
        shapes[f"{p}.mlp.fc1.bias"] = (h,)
        shapes[f"{p}.mlp.fc2.weight"] = (h, e)
        shapes[f"{p}.mlp.fc2.bias"] = (e,)
    shapes["head.fc1.weight"] = (e, h)
    shapes["head.fc1.bias"] = (h,)
    shapes["head.fc2.weight"] = (h, h)
    shapes["head.fc2.bias"] = (h,)
    shapes["head.fc3.weight"] = (h, 1)
    shapes["head.fc3.bias"] = (1,)
    return shapes


@dataclass
class WeightsBundle:
    """All named tensors plus the architecture they belong to.

    normalization, when present, is a per-feature affine applied to raw
    observation rows before projection: (x - mean) / std.
    """

    ray_count: int
    config: ViTConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    normalization: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def input_dim(self) -> int:
        return self.ray_count + OBS_EXTRA

    def validate(self) -> None:
        expected = tensor_shapes(self.config, self.input_dim)
        for name, shape in expected.items():
            if name not in self.tensors:
                raise WeightsError(f"missing tensor {name!r}")
            got = tuple(self.tensors[name].shape)
            if got != shape:
                raise WeightsError(f"tensor {name!r} has shape {got}, expected {shape}")
        extra = set(self.tensors) - set(expected)
        if extra:
            raise WeightsError(f"unexpected tensors: {sorted(extra)}")
        if self.normalization is not None:
            mean, std = self.normalization
            if mean.shape != (self.input_dim,) or std.shape != (self.input_dim,):
                raise WeightsError("normalization arrays must have length M+17")

    @classmethod
    def zeros(cls, ray_count: int, cfg: ViTConfig) -> "WeightsBundle":
        shapes = tensor_shapes(cfg, ray_count + OBS_EXTRA)
        tensors = {n: np.zeros(s, dtype=np.float32) for n, s in shapes.items()}
        return cls(ray_count=ray_count, config=cfg, tensors=tensors)

    @classmethod
    def random(cls, ray_count: int, cfg: ViTConfig, seed: int = 0, scale: float = 0.05) -> "WeightsBundle":
        rng = np.random.default_rng(seed)
        shapes = tensor_shapes(cfg, ray_count + OBS_EXTRA)
        tensors = {}
        for n, s in shapes.items():
            if n.endswith("ln1.weight") or n.endswith("ln2.weight"):
                tensors[n] = np.ones(s, dtype=np.float32)
            else:
                tensors[n] = rng.normal(0.0, scale, size=s).astype(np.float32)
        return cls(ray_count=ray_count, config=cfg, tensors=tensors)


def save_weights(bundle: WeightsBundle, path) -> None:
    """Write the manifest-line + raw-float32-payload format."""
    bundle.validate()
    entries = []
    offset = 0
    order = sorted(bundle.tensors)
    for name in order:
        arr = bundle.tensors[name]
        nbytes = arr.size * 4
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "f32",
                "offset": offset,
                "length": nbytes,
            }
        )
        offset += nbytes
    norm = None
    if bundle.normalization is not None:
        mean, std = bundle.normalization
        norm = {"mean": [float(v) for v in mean], "std": [float(v) for v in std]}
    manifest = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "M": bundle.ray_count,
        "T_seq": bundle.config.t_seq,
        "embed_dim": bundle.config.embed_dim,
        "mlp_dim": bundle.config.mlp_dim,
        "layers": bundle.config.encoder_layers,
        "heads": bundle.config.heads,
        "normalization": norm,
        "tensors": entries,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(manifest).encode("utf-8"))
        f.write(b"\n")
        for name in order:
            arr = np.ascontiguousarray(bundle.tensors[name], dtype="<f4")
            f.write(arr.tobytes())


def load_weights(path) -> WeightsBundle:
    with open(path, "rb") as f:
        header = f.readline()
        try:
            manifest = json.loads(header.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise WeightsError(f"bad manifest line: {exc}") from exc
        payload = f.read()
    if manifest.get("format_version") != WEIGHTS_FORMAT_VERSION:
        raise WeightsError(f"unsupported format_version {manifest.get('format_version')!r}")
    cfg = ViTConfig(
        encoder_layers=manifest["layers"],
        embed_dim=manifest["embed_dim"],
        mlp_dim=manifest["mlp_dim"],
        heads=manifest["heads"],
        t_seq=manifest["T_seq"],
    )
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        if entry["dtype"] != "f32":
            raise WeightsError(f"tensor {entry['name']!r} has unsupported dtype")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        if entry["length"] != count * 4:
            raise WeightsError(f"tensor {entry['name']!r} length/shape mismatch")
        start, end = entry["offset"], entry["offset"] + entry["length"]
        if end > len(payload):
            raise WeightsError(f"tensor {entry['name']!r} payload out of range")
        arr = np.frombuffer(payload[start:end], dtype="<f4").reshape(shape)
        tensors[entry["name"]] = arr.astype(np.float32)
    norm = None
    if manifest.get("normalization"):
        norm = (
            np.asarray(manifest["normalization"]["mean"], dtype=np.float32),
            np.asarray(manifest["normalization"]["std"], dtype=np.float32),
        )
    bundle = WeightsBundle(
        ray_count=manifest["M"], config=cfg, tensors=tensors, normalization=norm
    )
    bundle.validate()
    return bundle


def _layer_norm(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + np.float32(LN_EPS)) * weight + bias


def _gelu(x: np.ndarray) -> np.ndarray:
    # tanh approximation; the trainer uses the same variant.
    c = np.float32(math.sqrt(2.0 / math.pi))
    return np.float32(0.5) * x * (1.0 + np.tanh(c * (x + np.float32(0.044715) * x**3)))


def _attention(x: np.ndarray, w: dict[str, np.ndarray], prefix: str, heads: int) -> np.ndarray:
    t, e = x.shape
    hd = e // heads
    q = x @ w[f"{prefix}.q.weight"] + w[f"{prefix}.q.bias"]
    k = x @ w[f"{prefix}.k.weight"] + w[f"{prefix}.k.bias"]
    v = x @ w[f"{prefix}.v.weight"] + w[f"{prefix}.v.bias"]
    q = q.reshape(t, heads, hd).transpose(1, 0, 2)
    k = k.reshape(t, heads, hd).transpose(1, 0, 2)
    v = v.reshape(t, heads, hd).transpose(1, 0, 2)
    scores = (q @ k.transpose(0, 2, 1)) / np.float32(math.sqrt(hd))
    scores = scores - scores.max(axis=-1, keepdims=True)
    weights = np.exp(scores)
    weights = weights / weights.sum(axis=-1, keepdims=True)
    out = (weights @ v).transpose(1, 0, 2).reshape(t, e)
    return out @ w[f"{prefix}.out.weight"] + w[f"{prefix}.out.bias"]


def vit_forward(obs_matrix: np.ndarray, bundle: WeightsBundle) -> float:
    """Wall-follow probability for one stacked observation matrix.

    Pre-norm transformer encoder over timestep tokens, mean pooling, then a
    three-layer ReLU head with a sigmoid output. Deterministic; float32.
    """
    cfg = bundle.config
    x = np.asarray(obs_matrix, dtype=np.float32)
    if x.shape != (cfg.t_seq, bundle.input_dim):
        raise WeightsError(
            f"observation matrix shape {x.shape} does not match "
            f"(T_seq={cfg.t_seq}, M+17={bundle.input_dim})"
        )
    w = bundle.tensors
    if bundle.normalization is not None:
        mean, std = bundle.normalization
        x = (x - mean) / std
    x = x @ w["patch.weight"] + w["patch.bias"]
    x = x + w["pos_embed"]
    for i in range(cfg.encoder_layers):
        p = f"enc{i}"
        h = _layer_norm(x, w[f"{p}.ln1.weight"], w[f"{p}.ln1.bias"])
        x = x + _attention(h, w, f"{p}.attn", cfg.heads)
        h = _layer_norm(x, w[f"{p}.ln2.weight"], w[f"{p}.ln2.bias"])
        h = _gelu(h @ w[f"{p}.mlp.fc1.weight"] + w[f"{p}.mlp.fc1.bias"])
        x = x + (h @ w[f"{p}.mlp.fc2.weight"] + w[f"{p}.mlp.fc2.bias"])
    pooled = x.mean(axis=0)
    h = np.maximum(pooled @ w["head.fc1.weight"] + w["head.fc1.bias"], 0.0)
    h = np.maximum(h @ w["head.fc2.weight"] + w["head.fc2.bias"], 0.0)
    logit = float(h @ w["head.fc3.weight"][:, 0] + w["head.fc3.bias"][0])
    return 1.0 / (1.0 + math.exp(-logit))


def apply_mode_override(
    theta_rs: float, i_dir: int, target_mode: int, params: RSParams
) -> tuple[float, int]:
    """Force the switch output to a target mode.

    Target APF zeroes the rotation angle; target WF applies one escalation
    step in the already-chosen direction when the rule-based output was APF.
    A matching target passes the output through unchanged.
    """
    rs_mode = 1 if theta_rs != 0.0 else 0
    if target_mode == rs_mode:
        return theta_rs, i_dir
    if target_mode == 0:
        return 0.0, i_dir
    return i_dir * params.theta_upd, i_dir


def ls_override(
    theta_rs: float, i_dir: int, wf_prob: float, params: RSParams
) -> tuple[float, int]:
    """Override the rule-based output with the network's decision
    (probability >= 0.5 means wall-follow)."""
    return apply_mode_override(theta_rs, i_dir, 1 if wf_prob >= 0.5 else 0, params)


class EpisodeBuffer:
    """Per-robot observation history for one episode."""

    def __init__(self):
        self._rows: list[np.ndarray] = []

    def append(self, obs: np.ndarray) -> None:
        self._rows.append(obs)

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> list[np.ndarray]:
        return self._rows

    def window(self, t_seq: int) -> np.ndarray:
        return stack(self._rows, t_seq)
