"""Encoder families and training objectives."""

from .encoder import Backbone, Decoder, EncoderConfig, ProjectorPredictor
from .families import MODEL_KINDS, make_model
from .losses import (LossWeights, infovae_loss, kl_gauss, median_bandwidth,
                     mmd_rbf, multitask_loss, recon_loss, reparameterize,
                     simsiam_loss, triplet_loss)

__all__ = [
    "Backbone", "Decoder", "EncoderConfig", "LossWeights", "MODEL_KINDS",
    "ProjectorPredictor", "infovae_loss", "kl_gauss", "make_model",
    "median_bandwidth", "mmd_rbf", "multitask_loss", "recon_loss",
    "reparameterize", "simsiam_loss", "triplet_loss",
]
