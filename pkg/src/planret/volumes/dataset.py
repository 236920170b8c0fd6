"""Dataset assembly: stratified class splits, case files on disk, manifest.

Case files are raw little-endian voxel blocks in z-major order
(`<id>.ct.vol` float32, `<id>.mask.vol` uint8, `<id>.dose.vol` float32)
with a human-readable `<id>.meta` sidecar. Round trips are bit-exact.

Default split fractions are the published 235/43/127 proportions of a
405-case corpus (train 235/405, validation 43/405, test 127/405).
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .. import kvtext
from .phantom import CaseVolume, PhantomSpec, generate_phantom, synthesize_dose
from .taxonomy import N_CLASSES, CaseMeta, all_criteria

DEFAULT_SPLIT_FRACTIONS = (235.0 / 405.0, 43.0 / 405.0, 127.0 / 405.0)
SPLIT_ORDER = ("train", "validation", "test")

_DTYPES = {"ct": np.dtype("<f4"), "mask": np.dtype("u1"), "dose": np.dtype("<f4")}


def split_counts(n, fractions=DEFAULT_SPLIT_FRACTIONS):
    """Apportion n cases to (train, validation, test) by largest remainder."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {fractions}")
    quotas = [n * f for f in fractions]
    base = [math.floor(q) for q in quotas]
    seats = n - sum(base)
    order = sorted(range(3), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:seats]:
        base[i] += 1
    return tuple(base)


def case_seed(master_seed, index):
    """Stable per-case generation seed derived from (master seed, case index)."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def plan_dataset(n_per_class, seed, fractions=DEFAULT_SPLIT_FRACTIONS,
                 prescription=60.0):
    """Stratified case plan: one CaseMeta per case, splits assigned per class.

    Cases are ordered by class id then member index; ids are c0000, c0001, ...
    Deterministic under the seed.
    """
    if n_per_class < 3:
        raise ValueError(f"need at least 3 cases per class, got {n_per_class}")
    n_train, n_val, _ = split_counts(n_per_class, fractions)
    rng = np.random.default_rng(seed)
    metas = []
    for class_id, (site, multi, size, location) in enumerate(all_criteria()):
        members = rng.permutation(n_per_class)
        splits = {}
        for rank, member in enumerate(members):
            if rank < n_train:
                splits[member] = "train"
            elif rank < n_train + n_val:
                splits[member] = "validation"
            else:
                splits[member] = "test"
        for member in range(n_per_class):
            index = class_id * n_per_class + member
            metas.append(CaseMeta(case_id=f"c{index:04d}", body_site=site,
                                  multi_target=multi, ptv_size=size,
                                  ptv_location=location, split=splits[member],
                                  prescription=prescription))
    return metas


def build_case(meta, seed, index, dims=(16, 16, 16), spacing=(2.0, 2.0, 2.0),
               falloff_sigma_mm=4.0):
    """Generate the voxel content for one planned case."""
    spec = PhantomSpec(meta.body_site, meta.multi_target, meta.ptv_size,
                       meta.ptv_location, seed=case_seed(seed, index),
                       dims=tuple(dims), spacing=tuple(spacing))
    volume, _ = generate_phantom(spec)
    volume.dose = synthesize_dose(volume, meta.prescription)
    return volume


def make_dataset(n_per_class, seed, fractions=DEFAULT_SPLIT_FRACTIONS,
                 dims=(16, 16, 16), spacing=(2.0, 2.0, 2.0), prescription=60.0):
    """In-memory dataset: list of (CaseVolume, CaseMeta)."""
    metas = plan_dataset(n_per_class, seed, fractions, prescription)
    return [(build_case(m, seed, i, dims, spacing), m) for i, m in enumerate(metas)]


# ---------------------------------------------------------------------------
# on-disk layout

def write_case(root, volume, meta):
    root = Path(root)
    volume.validate()
    d, h, w = volume.dims
    volume.ct.astype(_DTYPES["ct"]).tofile(root / f"{meta.case_id}.ct.vol")
    volume.mask.astype(_DTYPES["mask"]).tofile(root / f"{meta.case_id}.mask.vol")
    volume.dose.astype(_DTYPES["dose"]).tofile(root / f"{meta.case_id}.dose.vol")
    pairs = [
        ("case_id", meta.case_id),
        ("dims", [d, h, w]),
        ("spacing", list(volume.spacing)),
        ("ct_dtype", "float32"),
        ("mask_dtype", "uint8"),
        ("dose_dtype", "float32"),
        ("body_site", meta.body_site),
        ("multi_target", meta.multi_target),
        ("ptv_size", meta.ptv_size),
        ("ptv_location", meta.ptv_location),
        ("class_id", meta.class_id),
        ("split", meta.split),
        ("prescription", meta.prescription),
    ]
    (root / f"{meta.case_id}.meta").write_text(kvtext.dumps(pairs))


def read_case(root, case_id):
    root = Path(root)
    kv = kvtext.loads((root / f"{case_id}.meta").read_text())
    dims = kvtext.parse_ints(kv["dims"])
    n = dims[0] * dims[1] * dims[2]
    ct = np.fromfile(root / f"{case_id}.ct.vol", dtype=_DTYPES["ct"], count=n).reshape(dims)
    mask = np.fromfile(root / f"{case_id}.mask.vol", dtype=_DTYPES["mask"], count=n).reshape(dims)
    dose = np.fromfile(root / f"{case_id}.dose.vol", dtype=_DTYPES["dose"], count=n).reshape(dims)
    volume = CaseVolume(ct=ct, mask=mask, dose=dose,
                        spacing=kvtext.parse_floats(kv["spacing"]))
    meta = CaseMeta(case_id=kv["case_id"], body_site=kv["body_site"],
                    multi_target=kvtext.parse_bool(kv["multi_target"]),
                    ptv_size=kv["ptv_size"], ptv_location=kv["ptv_location"],
                    split=kv["split"], prescription=float(kv["prescription"]))
    if meta.class_id != int(kv["class_id"]):
        raise ValueError(f"{case_id}: stored class_id {kv['class_id']} does not match "
                         f"the criteria encoding {meta.class_id}")
    return volume, meta


def generate_dataset(out_dir, n_per_class, seed, fractions=DEFAULT_SPLIT_FRACTIONS,
                     dims=(16, 16, 16), spacing=(2.0, 2.0, 2.0), prescription=60.0):
    """Write a full phantom dataset plus manifest; returns the metas."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metas = plan_dataset(n_per_class, seed, fractions, prescription)
    for index, meta in enumerate(metas):
        volume = build_case(meta, seed, index, dims, spacing)
        write_case(out, volume, meta)
    write_manifest(out, metas)
    return metas


def write_manifest(root, metas):
    lines = ["# planret dataset manifest v1", "# case_id\tclass_id\tsplit"]
    for meta in metas:
        lines.append(f"{meta.case_id}\t{meta.class_id}\t{meta.split}")
    (Path(root) / "manifest.txt").write_text("\n".join(lines) + "\n")


def read_manifest(root):
    rows = []
    for line in (Path(root) / "manifest.txt").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        case_id, class_id, split = line.split("\t")
        rows.append((case_id, int(class_id), split))
    return rows


class CaseDataset:
    """Read-only view of an on-disk dataset.

    Case loads are recorded in ``accessed`` so training code can prove it
    never touched the validation or test splits.
    """

    def __init__(self, root):
        self.root = Path(root)
        if not (self.root / "manifest.txt").exists():
            raise FileNotFoundError(f"no manifest.txt under {self.root}")
        self.rows = read_manifest(self.root)
        self.class_ids = {cid: cls for cid, cls, _ in self.rows}
        self.splits = {cid: split for cid, _, split in self.rows}
        self.accessed = set()

    def __len__(self):
        return len(self.rows)

    def ids(self, split=None):
        return [cid for cid, _, s in self.rows if split is None or s == split]

    def class_of(self, case_id):
        return self.class_ids[case_id]

    def load_case(self, case_id):
        self.accessed.add(case_id)
        return read_case(self.root, case_id)
