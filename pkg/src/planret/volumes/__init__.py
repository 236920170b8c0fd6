"""Synthetic phantoms, the 32-class taxonomy, preprocessing, dataset I/O."""

from .dataset import (CaseDataset, DEFAULT_SPLIT_FRACTIONS, build_case, case_seed,
                      generate_dataset, make_dataset, plan_dataset, read_case,
                      read_manifest, split_counts, write_case, write_manifest)
from .phantom import (CaseVolume, GeometryJitter, PhantomGeometryError, PhantomSpec,
                      generate_phantom, recover_criteria, synthesize_dose)
from .preprocess import assemble_channels, resample, window_normalize
from .taxonomy import (BODY_SITES, N_CLASSES, PTV_LOCATIONS, PTV_SIZES, SPLITS,
                       CaseMeta, all_criteria, classify_case, criteria_from_class)

__all__ = [
    "BODY_SITES", "CaseDataset", "CaseMeta", "CaseVolume",
    "DEFAULT_SPLIT_FRACTIONS", "GeometryJitter", "N_CLASSES",
    "PTV_LOCATIONS", "PTV_SIZES", "PhantomGeometryError", "PhantomSpec",
    "SPLITS", "all_criteria", "assemble_channels", "build_case", "case_seed",
    "classify_case", "criteria_from_class", "generate_dataset",
    "generate_phantom", "make_dataset", "plan_dataset", "read_case",
    "read_manifest", "recover_criteria", "resample", "split_counts",
    "synthesize_dose", "window_normalize", "write_case", "write_manifest",
]
