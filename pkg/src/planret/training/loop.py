"""Training loops for the five model families.

One epoch is a full shuffled pass of anchors over the train split. The
contrastive families feed the dose-variant channels as the transformed
view during training only; anchors (and evaluation) always use the
anatomy channels. Runs are bitwise reproducible under a fixed seed in
single-threaded mode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import kvtext
from ..autodiff import OptimConfig, Optimizer, backward
from ..models import EncoderConfig, LossWeights, make_model
from ..volumes import assemble_channels
from .checkpoint import params_checksum
from .triplets import TripletSampler


class NonFiniteLossError(RuntimeError):
    """Loss became NaN/Inf; message carries the epoch and batch."""


@dataclass
class TrainConfig:
    model_kind: str = "multitask"
    epochs: int = 20
    batch_size: int = 8
    seed: int = 0
    optimizer: OptimConfig = field(default_factory=OptimConfig)
    weights: LossWeights = field(default_factory=LossWeights)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass
class TrainReport:
    model_kind: str
    epoch_losses: list
    wall_clock_s: float
    checksum: str
    dose_branch_used: bool
    n_train_cases: int

    def dump(self, path):
        pairs = [
            ("model_kind", self.model_kind),
            ("n_train_cases", self.n_train_cases),
            ("epochs", len(self.epoch_losses)),
            ("epoch_losses", [float(v) for v in self.epoch_losses]),
            ("wall_clock_s", self.wall_clock_s),
            ("dose_branch_used", self.dose_branch_used),
            ("params_sha256", self.checksum),
        ]
        Path(path).write_text(kvtext.dumps(pairs))


def _channel_batch(dataset, case_ids, variant):
    chans = []
    for cid in case_ids:
        volume, meta = dataset.load_case(cid)
        chans.append(assemble_channels(volume, variant, prescription=meta.prescription))
    return np.stack(chans)


def train(dataset, config):
    """Train config.model_kind on the dataset's train split.

    Returns (model, TrainReport). Aborts with NonFiniteLossError the moment
    a batch loss stops being finite.
    """
    train_ids = dataset.ids("train")
    if not train_ids:
        raise ValueError("train split is empty")
    rng = np.random.default_rng(config.seed)
    model = make_model(config.model_kind, config.encoder, seed=config.seed,
                       weights=config.weights)
    optimizer = Optimizer(config.optimizer)
    params = model.params()
    param_list = [params[name] for name in sorted(params)]

    sampler = None
    if model.needs_triplets():
        sampler = TripletSampler(train_ids, dataset.class_of)

    start = time.perf_counter()
    epoch_losses = []
    for epoch in range(config.epochs):
        order = list(rng.permutation(train_ids))
        batch_losses = []
        for lo in range(0, len(order), config.batch_size):
            anchors = order[lo:lo + config.batch_size]
            batch = {"anchor": _channel_batch(dataset, anchors, "anatomy")}
            if model.uses_dose_branch():
                batch["transformed"] = _channel_batch(dataset, anchors, "dose")
            if sampler is not None:
                triplet = sampler.sample(anchors, rng)
                batch["positive"] = _channel_batch(dataset, triplet.positive_ids, "anatomy")
                batch["negative"] = _channel_batch(dataset, triplet.negative_ids, "anatomy")
            loss = model.batch_loss(batch, rng)
            value = float(loss.data)
            if not np.isfinite(value):
                raise NonFiniteLossError(
                    f"non-finite loss {value} at epoch {epoch}, batch {lo // config.batch_size}")
            grads = backward(loss)
            optimizer.step(param_list, grads)
            batch_losses.append(value)
        epoch_losses.append(float(np.mean(batch_losses)))

    report = TrainReport(model_kind=config.model_kind,
                         epoch_losses=epoch_losses,
                         wall_clock_s=time.perf_counter() - start,
                         checksum=params_checksum(model.params()),
                         dose_branch_used=model.uses_dose_branch(),
                         n_train_cases=len(train_ids))
    return model, report
