"""The four training objectives and their building blocks.

All functions take and return autodiff Tensors, so every objective is
differentiable end to end:

  info-VAE   recon + (1 - alpha) KL + (alpha + lambda - 1) MMD
  triplet    mean over batch of max(d(a,p) - d(a,n) + margin, 0)
  simsiam    mean over batch of -cos(p1, z2); z2 must arrive stop-gradiented
  multitask  recon + beta * simsiam + gamma * triplet
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from ..autodiff import ops


@dataclass
class LossWeights:
    alpha: float = 0.0     # info-VAE KL/MMD trade-off
    lam: float = 10.0      # info-VAE MMD strength
    margin: float = 1.0    # triplet hinge margin
    beta: float = 1e-2     # multitask simsiam weight
    gamma: float = 1e-1    # multitask triplet weight
    symmetric_simsiam: bool = False

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError(f"triplet margin must be positive, got {self.margin}")
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("multitask weights must be nonnegative")


def recon_loss(xhat, x):
    """Mean squared reconstruction error."""
    return ops.mean_squared_error(xhat, x)


def reparameterize(mu, logvar, eps):
    """z = mu + exp(logvar / 2) * eps, with eps supplied by the caller."""
    return ops.add(mu, ops.mul(ops.exp(ops.scale(logvar, 0.5)), eps))


def kl_gauss(mu, logvar):
    """KL(N(mu, diag(exp(logvar))) || N(0, I)), mean over the batch."""
    dim = mu.data.shape[1]
    mu2 = ops.mul(mu, mu)
    elv = ops.exp(logvar)
    # mu^2 + e^lv - 1 - lv per element
    elems = ops.add(ops.add(mu2, elv), ops.scale(ops.add_scalar(logvar, 1.0), -1.0))
    return ops.scale(ops.reduce_mean(elems), 0.5 * dim)


def median_bandwidth(x, y):
    """Median pairwise distance over the pooled samples; 1.0 if degenerate."""
    pooled = np.vstack([np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)])
    if pooled.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(pooled)))
    return med if med > 0 else 1.0


def mmd_rbf(z_samples, prior_samples, bandwidth=None):
    """Biased MMD^2 estimator with a Gaussian RBF kernel.

    The bandwidth defaults to the median heuristic, treated as a constant
    of the graph.
    """
    if z_samples.data.size == 0 or prior_samples.data.size == 0:
        raise ValueError("mmd_rbf: empty sample set")
    if bandwidth is None:
        bandwidth = median_bandwidth(z_samples.data, prior_samples.data)
    kxx = ops.reduce_mean(ops.gaussian_rbf_kernel(z_samples, z_samples, bandwidth))
    kyy = ops.reduce_mean(ops.gaussian_rbf_kernel(prior_samples, prior_samples, bandwidth))
    kxy = ops.reduce_mean(ops.gaussian_rbf_kernel(z_samples, prior_samples, bandwidth))
    return ops.add(ops.add(kxx, kyy), ops.scale(kxy, -2.0))


def infovae_loss(x, xhat, mu, logvar, z_samples, prior_samples,
                 alpha=0.0, lam=10.0, bandwidth=None):
    """recon + (1 - alpha) KL + (alpha + lambda - 1) MMD."""
    total = recon_loss(xhat, x)
    kl_coef = 1.0 - alpha
    mmd_coef = alpha + lam - 1.0
    if kl_coef != 0.0:
        total = ops.add(total, ops.scale(kl_gauss(mu, logvar), kl_coef))
    if mmd_coef != 0.0:
        total = ops.add(total, ops.scale(mmd_rbf(z_samples, prior_samples, bandwidth),
                                         mmd_coef))
    return total


def triplet_loss(z_anchor, z_pos, z_neg, margin=1.0):
    """Hinge on the positive/negative distance gap, mean over the batch."""
    dp = ops.euclidean_distance(z_anchor, z_pos)
    dn = ops.euclidean_distance(z_anchor, z_neg)
    hinge = ops.leaky_relu(ops.add_scalar(ops.add(dp, ops.scale(dn, -1.0)), margin),
                           negative_slope=0.0)
    return ops.reduce_mean(hinge)


def simsiam_loss(p, z):
    """Negative cosine similarity, mean over the batch.

    The caller wraps z in stop_gradient; this function only scores the pair.
    """
    return ops.scale(ops.reduce_mean(ops.cosine_similarity(p, z)), -1.0)


def multitask_loss(recon, simsiam, triplet, beta=1e-2, gamma=1e-1):
    """recon + beta * simsiam + gamma * triplet over scalar components."""
    return ops.add(recon, ops.add(ops.scale(simsiam, beta), ops.scale(triplet, gamma)))
