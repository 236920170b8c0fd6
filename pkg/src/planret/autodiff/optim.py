"""Parameter update rules: plain SGD and Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import ShapeError


@dataclass
class OptimConfig:
    kind: str = "adam"
    lr: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")


class Optimizer:
    """Updates parameter tensors in place from a {param: grad} map."""

    def __init__(self, config):
        self.config = config
        self._m = {}
        self._v = {}
        self._t = 0

    def step(self, params, grads):
        cfg = self.config
        if cfg.kind == "adam":
            self._t += 1
        for p in params:
            g = grads.get(p)
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ShapeError(
                    f"optimizer_step: grad shape {g.shape} != param shape {p.data.shape}")
            if cfg.kind == "sgd":
                p.data -= np.asarray(cfg.lr, dtype=p.data.dtype) * g
            else:
                b1, b2 = cfg.betas
                m = self._m.setdefault(p, np.zeros_like(p.data))
                v = self._v.setdefault(p, np.zeros_like(p.data))
                m *= b1
                m += (1.0 - b1) * g
                v *= b2
                v += (1.0 - b2) * (g * g)
                mhat = m / (1.0 - b1 ** self._t)
                vhat = v / (1.0 - b2 ** self._t)
                p.data -= (cfg.lr * mhat / (np.sqrt(vhat) + cfg.eps)).astype(p.data.dtype)
