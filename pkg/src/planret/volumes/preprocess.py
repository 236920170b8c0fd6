"""Volume preprocessing: resampling, CT windowing, channel assembly."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

WINDOW_WIDTH_HU = 400.0
WINDOW_LEVEL_HU = 0.0
MASK_SCALE = 4.0


def resample(grid, target_dims, mode="trilinear"):
    """Resample to target_dims with the align-corners convention: corner
    voxel centers of source and target coincide. Use trilinear for ct/dose
    and nearest for label masks (labels must stay integral)."""
    if mode not in ("trilinear", "nearest"):
        raise ValueError(f"unknown resample mode {mode!r}")
    if any(t < 2 for t in target_dims):
        raise ValueError(f"target dims must be >= 2 per axis, got {tuple(target_dims)}")
    if any(s < 2 for s in grid.shape):
        raise ValueError(f"source dims must be >= 2 per axis, got {grid.shape}")
    if tuple(target_dims) == grid.shape and mode == "nearest":
        return grid.copy()
    coords = np.meshgrid(*[np.linspace(0.0, s - 1.0, t)
                           for s, t in zip(grid.shape, target_dims)], indexing="ij")
    order = 1 if mode == "trilinear" else 0
    out = ndimage.map_coordinates(grid.astype(np.float64), np.stack(coords),
                                  order=order, mode="nearest")
    return out.astype(grid.dtype)


def window_normalize(ct, width=WINDOW_WIDTH_HU, level=WINDOW_LEVEL_HU):
    """Clip to the [level - width/2, level + width/2] window and map to [0, 1]."""
    if width <= 0:
        raise ValueError(f"window width must be positive, got {width}")
    lo = level - width / 2.0
    hi = level + width / 2.0
    return ((np.clip(ct, lo, hi) - lo) / width).astype(np.float32)


def assemble_channels(volume, variant="anatomy", prescription=None):
    """Stack the 2-channel network input: (intensity, contours).

    anatomy variant: channel 0 is the windowed CT; dose variant: channel 0
    is dose scaled by the prescription. Channel 1 is always the label mask
    scaled to [0, 1] by 1/4, identical across variants.
    """
    if variant == "anatomy":
        ch0 = window_normalize(volume.ct)
    elif variant == "dose":
        if prescription is None or prescription <= 0:
            raise ValueError("dose variant needs a positive prescription")
        ch0 = (volume.dose / np.float32(prescription)).astype(np.float32)
    else:
        raise ValueError(f"unknown channel variant {variant!r}")
    ch1 = (volume.mask.astype(np.float32) / np.float32(MASK_SCALE))
    return np.stack([ch0, ch1]).astype(np.float32)
