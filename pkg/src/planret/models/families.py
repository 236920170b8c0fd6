"""The five encoder families built on the shared backbone.

Each family exposes `params()` (name -> parameter tensor, checkpoint
order), `encode()` for evaluation-time embedding of anatomy channels
(the info-VAE returns its mu head, never a sample), and `batch_loss()`
used by the training loop.
"""

from __future__ import annotations

import numpy as np

from ..autodiff import ops
from . import losses
from .encoder import Backbone, Decoder, EncoderConfig, LinearLayer, ProjectorPredictor

MODEL_KINDS = ("vanilla_autoencoder", "info_vae", "siamese_triplet",
               "simsiam", "multitask")


class ModelBase:
    kind = None

    def __init__(self, config, seed=0, weights=None, dtype=np.float32):
        self.config = config
        self.weights = weights if weights is not None else losses.LossWeights()
        rng = np.random.default_rng(seed)
        self.dtype = dtype
        self._build(rng)

    def _build(self, rng):
        self.backbone = Backbone(self.config, rng, self.dtype)

    def params(self):
        return self.backbone.params("enc")

    def embed(self, x):
        """Graph-building embedding of a (N, C, D, H, W) input tensor."""
        return self.backbone(x)

    def encode(self, batch):
        """Evaluation-time embedding of a raw array batch; no graph kept."""
        x = ops.constant(np.asarray(batch, dtype=self.dtype))
        return self.embed(x).data

    def uses_dose_branch(self):
        return self.kind in ("simsiam", "multitask")

    def needs_triplets(self):
        return self.kind in ("siamese_triplet", "multitask")


class VanillaAutoencoder(ModelBase):
    kind = "vanilla_autoencoder"

    def _build(self, rng):
        super()._build(rng)
        self.decoder = Decoder(self.config, rng, self.dtype)

    def params(self):
        out = super().params()
        out.update(self.decoder.params("dec"))
        return out

    def batch_loss(self, batch, rng):
        x = ops.constant(np.asarray(batch["anchor"], dtype=self.dtype))
        return losses.recon_loss(self.decoder(self.embed(x)), x)


class InfoVae(ModelBase):
    kind = "info_vae"

    def _build(self, rng):
        super()._build(rng)  # backbone embed head doubles as the mu head
        self.logvar = LinearLayer(rng, self.config.bottleneck_dim,
                                  self.config.embed_dim, self.dtype)
        self.decoder = Decoder(self.config, rng, self.dtype)

    def params(self):
        out = super().params()
        out.update(self.logvar.params("logvar"))
        out.update(self.decoder.params("dec"))
        return out

    def batch_loss(self, batch, rng):
        x = ops.constant(np.asarray(batch["anchor"], dtype=self.dtype))
        feats = self.backbone.trunk(x)
        mu = self.backbone.embed(feats)
        logvar = self.logvar(feats)
        eps = ops.constant(rng.standard_normal(mu.data.shape).astype(self.dtype))
        z = losses.reparameterize(mu, logvar, eps)
        prior = ops.constant(rng.standard_normal(mu.data.shape).astype(self.dtype))
        xhat = self.decoder(z)
        return losses.infovae_loss(x, xhat, mu, logvar, z, prior,
                                   alpha=self.weights.alpha, lam=self.weights.lam)


class TripletSiamese(ModelBase):
    kind = "siamese_triplet"

    def batch_loss(self, batch, rng):
        za = self.embed(ops.constant(np.asarray(batch["anchor"], dtype=self.dtype)))
        zp = self.embed(ops.constant(np.asarray(batch["positive"], dtype=self.dtype)))
        zn = self.embed(ops.constant(np.asarray(batch["negative"], dtype=self.dtype)))
        return losses.triplet_loss(za, zp, zn, margin=self.weights.margin)


class SimSiam(ModelBase):
    kind = "simsiam"

    def _build(self, rng):
        super()._build(rng)
        self.head = ProjectorPredictor(self.config, rng, self.dtype)

    def params(self):
        out = super().params()
        out.update(self.head.params("head"))
        return out

    def _siamese_pair(self, x_anchor, x_transformed):
        """-cos(predict(project(z1)), stopgrad(project(z2))); optionally the
        symmetrized average of both directions."""
        proj1 = self.head.project(self.embed(x_anchor))
        proj2 = self.head.project(self.embed(x_transformed))
        loss = losses.simsiam_loss(self.head.predict(proj1), ops.stop_gradient(proj2))
        if self.weights.symmetric_simsiam:
            other = losses.simsiam_loss(self.head.predict(proj2), ops.stop_gradient(proj1))
            loss = ops.scale(ops.add(loss, other), 0.5)
        return loss

    def batch_loss(self, batch, rng):
        x1 = ops.constant(np.asarray(batch["anchor"], dtype=self.dtype))
        x2 = ops.constant(np.asarray(batch["transformed"], dtype=self.dtype))
        return self._siamese_pair(x1, x2)


class Multitask(SimSiam):
    kind = "multitask"

    def _build(self, rng):
        super()._build(rng)
        self.decoder = Decoder(self.config, rng, self.dtype)

    def params(self):
        out = super().params()
        out.update(self.decoder.params("dec"))
        return out

    def batch_loss(self, batch, rng):
        x1 = ops.constant(np.asarray(batch["anchor"], dtype=self.dtype))
        x2 = ops.constant(np.asarray(batch["transformed"], dtype=self.dtype))
        za = self.embed(x1)
        recon = losses.recon_loss(self.decoder(za), x1)

        proj1 = self.head.project(za)
        proj2 = self.head.project(self.embed(x2))
        sim = losses.simsiam_loss(self.head.predict(proj1), ops.stop_gradient(proj2))
        if self.weights.symmetric_simsiam:
            other = losses.simsiam_loss(self.head.predict(proj2), ops.stop_gradient(proj1))
            sim = ops.scale(ops.add(sim, other), 0.5)

        zp = self.embed(ops.constant(np.asarray(batch["positive"], dtype=self.dtype)))
        zn = self.embed(ops.constant(np.asarray(batch["negative"], dtype=self.dtype)))
        trip = losses.triplet_loss(za, zp, zn, margin=self.weights.margin)
        return losses.multitask_loss(recon, sim, trip,
                                     beta=self.weights.beta, gamma=self.weights.gamma)


_FAMILIES = {cls.kind: cls for cls in
             (VanillaAutoencoder, InfoVae, TripletSiamese, SimSiam, Multitask)}


def make_model(kind, config=None, seed=0, weights=None, dtype=np.float32):
    if kind not in _FAMILIES:
        raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")
    return _FAMILIES[kind](config or EncoderConfig(), seed=seed,
                           weights=weights, dtype=dtype)
