"""Checkpoint files: key-value text header + raw little-endian float32 blocks.

The header records the model kind, encoder config, loss weights, and a
parameter manifest (names and shapes in block order), terminated by an
``end_header`` line; the blocks follow immediately. Round trips are
bit-exact.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .. import kvtext
from ..models import EncoderConfig, LossWeights, make_model

MAGIC = "PLANCKPT"
VERSION = 1
_END = b"end_header\n"


class CheckpointError(ValueError):
    """Malformed, truncated, or mismatched checkpoint file."""


def params_checksum(params):
    """sha256 over the concatenated parameter blocks in manifest order."""
    h = hashlib.sha256()
    for name in sorted(params):
        h.update(np.ascontiguousarray(params[name].data, dtype="<f4").tobytes())
    return h.hexdigest()


def save_checkpoint(model, path):
    params = model.params()
    names = sorted(params)
    cfg = model.config
    w = model.weights
    manifest = ";".join(
        f"{name}:{'x'.join(str(d) for d in params[name].data.shape)}" for name in names)
    pairs = [
        ("magic", MAGIC),
        ("version", VERSION),
        ("model_kind", model.kind),
        ("stage_channels", list(cfg.stage_channels)),
        ("groups", cfg.groups),
        ("negative_slope", cfg.negative_slope),
        ("embed_dim", cfg.embed_dim),
        ("in_channels", cfg.in_channels),
        ("volume_dim", cfg.volume_dim),
        ("alpha", w.alpha),
        ("lam", w.lam),
        ("margin", w.margin),
        ("beta", w.beta),
        ("gamma", w.gamma),
        ("symmetric_simsiam", w.symmetric_simsiam),
        ("params", manifest),
    ]
    blob = bytearray()
    blob += kvtext.dumps(pairs).encode()
    blob += _END
    for name in names:
        blob += np.ascontiguousarray(params[name].data, dtype="<f4").tobytes()
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path):
    raw = Path(path).read_bytes()
    sep = raw.find(_END)
    if sep < 0:
        raise CheckpointError(f"{path}: no end_header marker")
    try:
        kv = kvtext.loads(raw[:sep].decode())
    except (UnicodeDecodeError, ValueError) as exc:
        raise CheckpointError(f"{path}: bad header ({exc})") from exc
    if kv.get("magic") != MAGIC:
        raise CheckpointError(f"{path}: bad magic {kv.get('magic')!r}")
    if int(kv.get("version", -1)) != VERSION:
        raise CheckpointError(f"{path}: unsupported version {kv.get('version')}")

    config = EncoderConfig(stage_channels=kvtext.parse_ints(kv["stage_channels"]),
                           groups=int(kv["groups"]),
                           negative_slope=float(kv["negative_slope"]),
                           embed_dim=int(kv["embed_dim"]),
                           in_channels=int(kv["in_channels"]),
                           volume_dim=int(kv["volume_dim"]))
    weights = LossWeights(alpha=float(kv["alpha"]), lam=float(kv["lam"]),
                          margin=float(kv["margin"]), beta=float(kv["beta"]),
                          gamma=float(kv["gamma"]),
                          symmetric_simsiam=kvtext.parse_bool(kv["symmetric_simsiam"]))
    model = make_model(kv["model_kind"], config, seed=0, weights=weights)
    params = model.params()

    manifest = []
    for entry in kv["params"].split(";"):
        name, _, shape = entry.partition(":")
        manifest.append((name, tuple(int(d) for d in shape.split("x"))))
    if sorted(n for n, _ in manifest) != sorted(params):
        raise CheckpointError(f"{path}: parameter manifest does not match "
                              f"a {kv['model_kind']} model")

    offset = sep + len(_END)
    for name, shape in manifest:
        declared = params[name].data.shape
        if shape != declared:
            raise CheckpointError(f"{path}: param {name} has shape {shape}, "
                                  f"model expects {declared}")
        nbytes = int(np.prod(shape)) * 4
        block = raw[offset:offset + nbytes]
        if len(block) != nbytes:
            raise CheckpointError(f"{path}: truncated block for param {name}")
        params[name].data = np.frombuffer(block, dtype="<f4").reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    return model
