"""Shared convolutional backbone, decoder, and the per-family heads.

Backbone: four (conv3d k4 s2 p1 -> group_norm -> leaky_relu) stages, then
flatten and a linear map to the embedding dim M. Each stage halves the
spatial extents, so inputs must be divisible by 2^stages (16^3 at desk
scale reduces to 1^3). The decoder mirrors the stages with transposed
convolutions, which restores the input extents exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import ops

KERNEL = 4
STRIDE = 2
PAD = 1


@dataclass
class EncoderConfig:
    stage_channels: tuple = (8, 16, 32, 64)
    groups: int = 4
    negative_slope: float = 0.01
    embed_dim: int = 32
    in_channels: int = 2
    volume_dim: int = 16

    def __post_init__(self):
        if self.embed_dim < 2:
            raise ValueError(f"embedding dim must be >= 2, got {self.embed_dim}")
        if any(c <= 0 for c in self.stage_channels):
            raise ValueError(f"stage widths must be positive, got {self.stage_channels}")
        for c in self.stage_channels:
            if c % self.groups:
                raise ValueError(f"groups={self.groups} does not divide stage width {c}")

    @property
    def total_stride(self):
        return STRIDE ** len(self.stage_channels)

    @property
    def bottleneck_dim(self):
        side = self.volume_dim // self.total_stride
        return self.stage_channels[-1] * side ** 3

    def check_input(self, shape):
        if shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {shape[1]}")
        for ext in shape[2:]:
            if ext % self.total_stride:
                raise ValueError(
                    f"spatial extent {ext} not divisible by total stride {self.total_stride}")


def _conv_init(rng, cout, cin, k, dtype):
    std = np.sqrt(2.0 / (cin * k ** 3))
    return ops.parameter((rng.standard_normal((cout, cin, k, k, k)) * std).astype(dtype))


def _convt_init(rng, cin, cout, k, dtype):
    std = np.sqrt(2.0 / (cin * k ** 3))
    return ops.parameter((rng.standard_normal((cin, cout, k, k, k)) * std).astype(dtype))


def _linear_init(rng, nout, nin, dtype):
    std = np.sqrt(2.0 / nin)
    return ops.parameter((rng.standard_normal((nout, nin)) * std).astype(dtype))


def _zeros(shape, dtype):
    return ops.parameter(np.zeros(shape, dtype=dtype))


def _ones(shape, dtype):
    return ops.parameter(np.ones(shape, dtype=dtype))


class LinearLayer:
    def __init__(self, rng, nin, nout, dtype):
        self.w = _linear_init(rng, nout, nin, dtype)
        self.b = _zeros((nout,), dtype)

    def __call__(self, x):
        return ops.linear(x, self.w, self.b)

    def params(self, prefix):
        return {f"{prefix}.w": self.w, f"{prefix}.b": self.b}


class Backbone:
    """conv stages + flatten + linear embedding head."""

    def __init__(self, config, rng, dtype=np.float32):
        self.config = config
        self.stages = []
        cin = config.in_channels
        for cout in config.stage_channels:
            self.stages.append({
                "w": _conv_init(rng, cout, cin, KERNEL, dtype),
                "b": _zeros((cout,), dtype),
                "gamma": _ones((cout,), dtype),
                "beta": _zeros((cout,), dtype),
            })
            cin = cout
        self.embed = LinearLayer(rng, config.bottleneck_dim, config.embed_dim, dtype)

    def trunk(self, x):
        """Stages + flatten; returns (N, bottleneck_dim) features."""
        self.config.check_input(x.data.shape)
        h = x
        for st in self.stages:
            h = ops.conv3d(h, st["w"], st["b"], stride=STRIDE, padding=PAD)
            h = ops.group_norm(h, st["gamma"], st["beta"], groups=self.config.groups)
            h = ops.leaky_relu(h, self.config.negative_slope)
        return ops.reshape(h, (h.data.shape[0], -1))

    def __call__(self, x):
        return self.embed(self.trunk(x))

    def params(self, prefix="enc"):
        out = {}
        for i, st in enumerate(self.stages):
            for key, t in st.items():
                out[f"{prefix}.stage{i}.{key}"] = t
        out.update(self.embed.params(f"{prefix}.embed"))
        return out


class Decoder:
    """linear + reshape + mirrored transposed-conv stages back to the input dims."""

    def __init__(self, config, rng, dtype=np.float32):
        self.config = config
        self.fc = LinearLayer(rng, config.embed_dim, config.bottleneck_dim, dtype)
        widths = list(config.stage_channels)[::-1] + [config.in_channels]
        self.stages = []
        for i, (cin, cout) in enumerate(zip(widths[:-1], widths[1:])):
            last = i == len(widths) - 2
            st = {"w": _convt_init(rng, cin, cout, KERNEL, dtype),
                  "b": _zeros((cout,), dtype)}
            if not last:
                st["gamma"] = _ones((cout,), dtype)
                st["beta"] = _zeros((cout,), dtype)
            self.stages.append(st)

    def __call__(self, z):
        side = self.config.volume_dim // self.config.total_stride
        h = self.fc(z)
        h = ops.reshape(h, (z.data.shape[0], self.config.stage_channels[-1],
                            side, side, side))
        for st in self.stages:
            h = ops.conv3d_transpose(h, st["w"], st["b"], stride=STRIDE, padding=PAD)
            if "gamma" in st:
                h = ops.group_norm(h, st["gamma"], st["beta"], groups=self.config.groups)
                h = ops.leaky_relu(h, self.config.negative_slope)
        return h

    def params(self, prefix="dec"):
        out = dict(self.fc.params(f"{prefix}.fc"))
        for i, st in enumerate(self.stages):
            for key, t in st.items():
                out[f"{prefix}.stage{i}.{key}"] = t
        return out


class ProjectorPredictor:
    """Projection MLP (M -> M) and prediction MLP with an M/4 bottleneck."""

    def __init__(self, config, rng, dtype=np.float32):
        m = config.embed_dim
        hidden = max(1, m // 4)
        self.slope = config.negative_slope
        self.proj0 = LinearLayer(rng, m, m, dtype)
        self.proj1 = LinearLayer(rng, m, m, dtype)
        self.pred0 = LinearLayer(rng, m, hidden, dtype)
        self.pred1 = LinearLayer(rng, hidden, m, dtype)

    def project(self, z):
        return self.proj1(ops.leaky_relu(self.proj0(z), self.slope))

    def predict(self, p):
        return self.pred1(ops.leaky_relu(self.pred0(p), self.slope))

    def params(self, prefix="head"):
        out = {}
        out.update(self.proj0.params(f"{prefix}.proj0"))
        out.update(self.proj1.params(f"{prefix}.proj1"))
        out.update(self.pred0.params(f"{prefix}.pred0"))
        out.update(self.pred1.params(f"{prefix}.pred1"))
        return out
