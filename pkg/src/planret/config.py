"""Run configuration: one flat key-value text file plus CLI overrides.

Every command resolves its RunConfig fully before doing any work and
echoes it verbatim as ``resolved_config.txt`` in the output directory, so
a run is reproducible from that echo alone. The full schema (keys, types,
defaults) is documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from . import kvtext
from .volumes.dataset import DEFAULT_SPLIT_FRACTIONS


class ConfigError(ValueError):
    """Unknown key, bad value, or unusable configuration."""


@dataclass
class RunConfig:
    # global
    seed: int = 0
    out: str = "runs/out"
    threads: int = 1
    data_dir: str = "data"
    # dataset generation
    n_per_class: int = 10
    volume_dim: int = 16
    spacing_mm: float = 2.0
    prescription_gy: float = 60.0
    falloff_sigma_mm: float = 4.0
    train_fraction: float = DEFAULT_SPLIT_FRACTIONS[0]
    validation_fraction: float = DEFAULT_SPLIT_FRACTIONS[1]
    test_fraction: float = DEFAULT_SPLIT_FRACTIONS[2]
    # encoder
    stage_channels: tuple = (8, 16, 32, 64)
    groups: int = 4
    negative_slope: float = 0.01
    embed_dim: int = 32
    # training
    model_kind: str = "multitask"
    epochs: int = 20
    batch_size: int = 8
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    # loss weights
    alpha: float = 0.0
    lam: float = 10.0
    margin: float = 1.0
    beta: float = 1e-2
    gamma: float = 1e-1
    symmetric_simsiam: bool = False
    # retrieval / evaluation
    db_split: str = "train"
    query_split: str = "test"
    k_max: int = 5
    score_base: float = 0.5
    score_offset: int = 0

    def split_fractions(self):
        return (self.train_fraction, self.validation_fraction, self.test_fraction)

    def dims(self):
        return (self.volume_dim,) * 3

    def spacing(self):
        return (self.spacing_mm,) * 3

    def pairs(self):
        out = []
        for f in fields(self):
            out.append((f.name, getattr(self, f.name)))
        return out

    def echo(self, out_dir):
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / "resolved_config.txt").write_text(kvtext.dumps(self.pairs()))


_PARSERS = {
    int: int,
    float: float,
    str: str,
    bool: kvtext.parse_bool,
    tuple: kvtext.parse_ints,
}


def _coerce(name, kind, raw):
    try:
        return _PARSERS[kind](raw)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"config key {name}: cannot parse {raw!r} as {kind.__name__}") from exc


def load_config(path=None, overrides=None):
    """Defaults, then the config file, then explicit overrides."""
    config = RunConfig()
    known = {f.name: type(getattr(config, f.name)) for f in fields(config)}
    if path is not None:
        text = Path(path).read_text()
        for key, raw in kvtext.loads(text).items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} in {path}")
            setattr(config, key, _coerce(key, known[key], raw))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config override {key!r}")
        setattr(config, key, value)
    return config
