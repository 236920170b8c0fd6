"""Synthetic phantom anatomy realizing the 32-class taxonomy.

Grids are (depth, height, width) = (z, y, x) arrays; the sagittal midplane
sits at x = (W-1)/2 and "left" means the lower-x side. Geometry is drawn so
the class label is recoverable from the voxels alone:

  site          body aspect ratio rx/ry (pelvis wide, head-and-neck narrow)
  target levels presence of label 2 (secondary PTV ring)
  PTV size      equivalent-sphere radius of label 1 as a fraction of body
                width: small 8-12%, large 18-25%, recovery threshold 15%
  location      label-1 centroid sign, or two disconnected mirrored lobes
                for bilateral

Mask labels: 0 background, 1 primary PTV, 2 secondary PTV, 3 and 4 OARs.
Structures are clipped to the body; the primary PTV must fit inside it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .taxonomy import CaseMeta

AIR_HU = -1000.0
SOFT_TISSUE_HU = 0.0

# recovery thresholds, shared by the generator contract and recover_criteria
ASPECT_THRESHOLD = 1.15
SIZE_FRACTION_THRESHOLD = 0.15
LATERAL_BAND_FRACTION = 0.15
BILATERAL_SIDE_MIN = 0.25
BODY_HU_THRESHOLD = -500.0


class PhantomGeometryError(ValueError):
    """Raised when a spec cannot be realized (e.g. PTV larger than the body)."""


@dataclass
class CaseVolume:
    """Multichannel voxel grids of one case: CT (HU), structure labels, dose (Gy)."""

    ct: np.ndarray
    mask: np.ndarray
    dose: np.ndarray
    spacing: tuple

    @property
    def dims(self):
        return self.ct.shape

    def validate(self):
        if not (self.ct.shape == self.mask.shape == self.dose.shape):
            raise ValueError(f"channel dims differ: ct {self.ct.shape}, "
                             f"mask {self.mask.shape}, dose {self.dose.shape}")
        if self.mask.min() < 0 or self.mask.max() > 4:
            raise ValueError("mask labels must lie in 0..4")
        if (self.dose < 0).any():
            raise ValueError("dose must be nonnegative")
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be three positive mm values, got {self.spacing}")


@dataclass
class GeometryJitter:
    """Randomization ranges for phantom geometry, as fractions of grid or
    body extents. small_ptv must sit strictly below large_ptv."""

    prostate_aspect: tuple = (1.35, 1.50)
    head_neck_aspect: tuple = (0.75, 0.95)
    body_halfwidth: tuple = (0.78, 0.90)   # of the half grid, larger body axis
    body_halfdepth: tuple = (0.70, 0.85)   # z, of the half grid
    small_ptv: tuple = (0.08, 0.12)        # radius / body width
    large_ptv: tuple = (0.18, 0.25)
    lateral_offset: tuple = (0.50, 0.75)   # of the room rx - r
    bilateral_gap: tuple = (0.10, 0.16)    # inner gap / rx
    axial_jitter: float = 0.10             # PTV center wobble in y, z (of ry, rz)
    secondary_factor: tuple = (1.5, 1.8)   # secondary radius / primary radius
    noise_hu: float = 15.0

    def __post_init__(self):
        if self.small_ptv[1] >= self.large_ptv[0]:
            raise ValueError("small-PTV radius range must sit strictly below the large range")


@dataclass
class PhantomSpec:
    """Target criteria plus randomization for one synthetic case."""

    body_site: str
    multi_target: bool
    ptv_size: str
    ptv_location: str
    seed: int = 0
    dims: tuple = (16, 16, 16)
    spacing: tuple = (2.0, 2.0, 2.0)
    jitter: GeometryJitter = field(default_factory=GeometryJitter)


def _grid_coords(dims):
    z, y, x = np.indices(dims).astype(np.float64)
    return z, y, x


def _ellipsoid(z, y, x, center, radii):
    cz, cy, cx = center
    rz, ry, rx = radii
    return (((z - cz) / rz) ** 2 + ((y - cy) / ry) ** 2 + ((x - cx) / rx) ** 2) <= 1.0


def _sphere(z, y, x, center, radius):
    cz, cy, cx = center
    return ((z - cz) ** 2 + (y - cy) ** 2 + (x - cx) ** 2) <= radius ** 2


def _paint_sphere(mask, z, y, x, center, radius, label, body):
    """Write a sphere clipped to the body; guarantees at least one voxel."""
    region = _sphere(z, y, x, center, radius) & body
    if not region.any():
        cz, cy, cx = (int(round(min(max(c, 0), s - 1)))
                      for c, s in zip(center, mask.shape))
        region = np.zeros_like(body)
        region[cz, cy, cx] = True
    mask[region] = label


def generate_phantom(spec):
    """Build (CaseVolume, CaseMeta) from a spec; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    jit = spec.jitter
    d, h, w = spec.dims
    z, y, x = _grid_coords(spec.dims)
    center = ((d - 1) / 2.0, (h - 1) / 2.0, (w - 1) / 2.0)

    # body ellipsoid: the wider axis carries body_halfwidth, aspect fixes the other
    if spec.body_site == "prostate":
        aspect = rng.uniform(*jit.prostate_aspect)
        rx = rng.uniform(*jit.body_halfwidth) * (w - 1) / 2.0
        ry = rx / aspect
    else:
        aspect = rng.uniform(*jit.head_neck_aspect)
        ry = rng.uniform(*jit.body_halfwidth) * (h - 1) / 2.0
        rx = ry * aspect
    rz = rng.uniform(*jit.body_halfdepth) * (d - 1) / 2.0
    body = _ellipsoid(z, y, x, center, (rz, ry, rx))

    ct = np.full(spec.dims, AIR_HU, dtype=np.float64)
    ct[body] = SOFT_TISSUE_HU + rng.normal(0.0, jit.noise_hu, int(body.sum()))
    mask = np.zeros(spec.dims, dtype=np.uint8)

    # primary PTV radius from the size class, as a fraction of body width
    size_range = jit.small_ptv if spec.ptv_size == "small" else jit.large_ptv
    r = rng.uniform(*size_range) * (2.0 * rx)
    if r >= 0.95 * min(rx, ry, rz):
        raise PhantomGeometryError(
            f"PTV radius {r:.2f} voxels does not fit the body radii "
            f"({rz:.2f}, {ry:.2f}, {rx:.2f})")

    jy = rng.uniform(-jit.axial_jitter, jit.axial_jitter) * ry
    jz = rng.uniform(-jit.axial_jitter, jit.axial_jitter) * rz
    # body half-width along x in the PTV's axial/coronal plane
    rx_chord = rx * np.sqrt(max(0.0, 1.0 - (jy / ry) ** 2 - (jz / rz) ** 2))
    ptv_centers = []
    if spec.ptv_location == "bilateral":
        # two mirrored lobes, combined volume of one sphere of radius r;
        # at least 1.5 voxels of clear midline gap keeps them disconnected
        gap = max(rng.uniform(*jit.bilateral_gap) * rx, 1.5)
        r_fit = 2.0 ** (1.0 / 3.0) * (0.95 * rx_chord - gap) / 2.0
        if r_fit < size_range[0] * 2.0 * rx:
            raise PhantomGeometryError(
                f"bilateral lobes of the {spec.ptv_size} size class do not fit "
                f"a body of half-width {rx:.2f} voxels")
        r = min(r, r_fit)
        lobe_r = r * 2.0 ** (-1.0 / 3.0)
        off = gap + lobe_r
        for sign in (-1.0, 1.0):
            ptv_centers.append(((center[0] + jz, center[1] + jy,
                                 center[2] + sign * off), lobe_r))
    else:
        if spec.ptv_location == "left":
            off = -rng.uniform(*jit.lateral_offset) * (rx_chord - r)
        elif spec.ptv_location == "right":
            off = rng.uniform(*jit.lateral_offset) * (rx_chord - r)
        else:
            off = 0.0
        ptv_centers.append(((center[0] + jz, center[1] + jy, center[2] + off), r))

    # OARs first, then PTV shells, then primary: later writes win
    if spec.body_site == "prostate":
        oar_r = 0.18 * rx
        oar_centers = [(center[0], center[1] - 0.5 * ry, center[2]),
                       (center[0], center[1] + 0.5 * ry, center[2])]
    else:
        oar_r = 0.16 * rx
        oar_centers = [(center[0] + 0.2 * rz, center[1], center[2] - 0.6 * rx),
                       (center[0] + 0.2 * rz, center[1], center[2] + 0.6 * rx)]
    for label, oc in zip((3, 4), oar_centers):
        _paint_sphere(mask, z, y, x, oc, oar_r, label, body)

    if spec.multi_target:
        factor = rng.uniform(*jit.secondary_factor)
        for pc, pr in ptv_centers:
            _paint_sphere(mask, z, y, x, pc, factor * pr, 2, body)
    for pc, pr in ptv_centers:
        _paint_sphere(mask, z, y, x, pc, pr, 1, body)

    # slight density contrast so the CT channel carries the structures
    ct[mask == 1] += 50.0
    ct[mask == 2] += 25.0
    ct[(mask == 3) | (mask == 4)] -= 40.0

    volume = CaseVolume(ct=ct.astype(np.float32), mask=mask,
                        dose=np.zeros(spec.dims, dtype=np.float32),
                        spacing=tuple(spec.spacing))
    meta = CaseMeta(case_id=f"phantom_{spec.seed}", body_site=spec.body_site,
                    multi_target=spec.multi_target, ptv_size=spec.ptv_size,
                    ptv_location=spec.ptv_location)
    return volume, meta


def synthesize_dose(volume, prescription, falloff_sigma_mm=4.0):
    """Prescription dose inside the primary PTV with Gaussian falloff outside."""
    ptv = volume.mask == 1
    if not ptv.any():
        raise ValueError("cannot synthesize dose: mask has no primary PTV (label 1)")
    dist_mm = ndimage.distance_transform_edt(~ptv, sampling=volume.spacing)
    dose = prescription * np.exp(-(dist_mm ** 2) / (2.0 * falloff_sigma_mm ** 2))
    return dose.astype(np.float32)


def recover_criteria(ct, mask):
    """Read the four classification criteria back off the voxel geometry.

    Uses the documented thresholds above; generate_phantom draws geometry
    that keeps every class safely on its side of them.
    """
    body = ct > BODY_HU_THRESHOLD
    if not body.any():
        raise ValueError("no body voxels above the air threshold")
    _, by, bx = np.nonzero(body)
    aspect = bx.std() / by.std()
    site = "prostate" if aspect > ASPECT_THRESHOLD else "head_and_neck"
    rx_est = np.sqrt(5.0) * bx.std()  # solid ellipsoid: std = radius / sqrt(5)

    multi = bool((mask == 2).any())

    ptv = mask == 1
    if not ptv.any():
        raise ValueError("no primary PTV voxels (label 1)")
    volume = int(ptv.sum())
    eq_radius = (3.0 * volume / (4.0 * np.pi)) ** (1.0 / 3.0)
    size = "large" if eq_radius / (2.0 * rx_est) > SIZE_FRACTION_THRESHOLD else "small"

    xc = (mask.shape[2] - 1) / 2.0
    dx = np.nonzero(ptv)[2] - xc
    band = LATERAL_BAND_FRACTION * rx_est
    frac_left = float((dx < 0).mean())
    n_lobes = ndimage.label(ptv)[1]
    if n_lobes >= 2 and min(frac_left, 1.0 - frac_left) >= BILATERAL_SIDE_MIN:
        location = "bilateral"
    elif dx.mean() < -band:
        location = "left"
    elif dx.mean() > band:
        location = "right"
    else:
        location = "center"

    return site, multi, size, location
