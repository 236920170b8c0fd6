"""Triplet sampling, training loops, checkpoints, batch embedding."""

from .checkpoint import CheckpointError, load_checkpoint, params_checksum, save_checkpoint
from .embed import embed_dataset
from .loop import NonFiniteLossError, TrainConfig, TrainReport, train
from .triplets import TripletBatch, TripletSampler, sample_triplets

__all__ = [
    "CheckpointError", "NonFiniteLossError", "TrainConfig", "TrainReport",
    "TripletBatch", "TripletSampler", "embed_dataset", "load_checkpoint",
    "params_checksum", "sample_triplets", "save_checkpoint", "train",
]
