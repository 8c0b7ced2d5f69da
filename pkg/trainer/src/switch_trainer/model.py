"""Transformer-encoder classifier over stacked observation windows.

Architecture contract shared with the runtime inference side: one linear
patch projection per timestep row, learned positional embeddings, pre-norm
encoder layers (multi-head self-attention + two-layer MLP with tanh-GELU),
mean pooling over timesteps, and a three-layer ReLU head ending in a single
logit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class NetConfig:
    layers: int = 3
    embed_dim: int = 512
    mlp_dim: int = 512
    heads: int = 8
    t_seq: int = 10

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")


class EncoderLayer(nn.Module):
    def __init__(self, cfg: NetConfig):
        super().__init__()
        e = cfg.embed_dim
        self.heads = cfg.heads
        self.ln1 = nn.LayerNorm(e)
        self.q = nn.Linear(e, e)
        self.k = nn.Linear(e, e)
        self.v = nn.Linear(e, e)
        self.out = nn.Linear(e, e)
        self.ln2 = nn.LayerNorm(e)
        self.fc1 = nn.Linear(e, cfg.mlp_dim)
        self.fc2 = nn.Linear(cfg.mlp_dim, e)
        self.act = nn.GELU(approximate="tanh")

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, e = x.shape
        hd = e // self.heads
        h = self.ln1(x)
        q = self.q(h).view(b, t, self.heads, hd).transpose(1, 2)
        k = self.k(h).view(b, t, self.heads, hd).transpose(1, 2)
        v = self.v(h).view(b, t, self.heads, hd).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(hd)
        attn = torch.softmax(scores, dim=-1)
        merged = (attn @ v).transpose(1, 2).reshape(b, t, e)
        x = x + self.out(merged)
        h = self.ln2(x)
        return x + self.fc2(self.act(self.fc1(h)))


class SwitchClassifier(nn.Module):
    """Binary wall-follow classifier producing one logit per window."""

    def __init__(self, cfg: NetConfig, input_dim: int):
        super().__init__()
        self.cfg = cfg
        self.input_dim = input_dim
        e, h = cfg.embed_dim, cfg.mlp_dim
        self.patch = nn.Linear(input_dim, e)
        self.pos_embed = nn.Parameter(torch.zeros(cfg.t_seq, e))
        nn.init.normal_(self.pos_embed, std=0.02)
        self.encoder = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.layers))
        self.head_fc1 = nn.Linear(e, h)
        self.head_fc2 = nn.Linear(h, h)
        self.head_fc3 = nn.Linear(h, 1)

    def forward(self, windows: torch.Tensor) -> torch.Tensor:
        x = self.patch(windows) + self.pos_embed
        for layer in self.encoder:
            x = layer(x)
        pooled = x.mean(dim=1)
        h = torch.relu(self.head_fc1(pooled))
        h = torch.relu(self.head_fc2(h))
        return self.head_fc3(h).squeeze(-1)

    def probabilities(self, windows: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.forward(windows))
