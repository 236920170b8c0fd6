"""2D principal-component projection of embedding clouds."""

from __future__ import annotations

import numpy as np


def pca_project_2d(embeddings):
    """Project (N, M) embeddings onto the top-2 principal axes.

    Mean-centered covariance eigendecomposition; each axis is flipped so
    its largest-magnitude loading is positive (first index on ties), which
    pins the otherwise arbitrary eigenvector signs.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ValueError(f"need at least 3 embeddings of equal dim, got shape {x.shape}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:2]
    axes = eigvecs[:, order]
    for j in range(axes.shape[1]):
        lead = np.argmax(np.abs(axes[:, j]))
        if axes[lead, j] < 0:
            axes[:, j] = -axes[:, j]
    return centered @ axes
