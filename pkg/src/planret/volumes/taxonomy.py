"""The 32-class case taxonomy.

Four criteria describe a case: body site, number of target levels
(binarized to single/multiple), primary-PTV size, and primary-PTV
laterality. Their mixed-radix encoding gives a class id in 0..31:
class_id = site*16 + multi_target*8 + size*4 + location.
"""

from __future__ import annotations

from dataclasses import dataclass

BODY_SITES = ("prostate", "head_and_neck")
PTV_SIZES = ("small", "large")
PTV_LOCATIONS = ("left", "right", "center", "bilateral")
SPLITS = ("train", "validation", "test")

N_CLASSES = 32


def classify_case(body_site, multi_target, ptv_size, ptv_location):
    """Mixed-radix class id of a criteria tuple."""
    site = BODY_SITES.index(body_site)
    size = PTV_SIZES.index(ptv_size)
    location = PTV_LOCATIONS.index(ptv_location)
    return site * 16 + int(bool(multi_target)) * 8 + size * 4 + location


def criteria_from_class(class_id):
    """Inverse of classify_case."""
    if not 0 <= class_id < N_CLASSES:
        raise ValueError(f"class_id {class_id} outside 0..{N_CLASSES - 1}")
    return (BODY_SITES[class_id // 16],
            bool((class_id // 8) % 2),
            PTV_SIZES[(class_id // 4) % 2],
            PTV_LOCATIONS[class_id % 4])


def all_criteria():
    """Every criteria tuple, in class-id order."""
    return [criteria_from_class(c) for c in range(N_CLASSES)]


@dataclass
class CaseMeta:
    """Identity, classification criteria, and split assignment of one case."""

    case_id: str
    body_site: str
    multi_target: bool
    ptv_size: str
    ptv_location: str
    split: str = "train"
    prescription: float = 60.0

    def __post_init__(self):
        if self.body_site not in BODY_SITES:
            raise ValueError(f"unknown body site {self.body_site!r}")
        if self.ptv_size not in PTV_SIZES:
            raise ValueError(f"unknown PTV size {self.ptv_size!r}")
        if self.ptv_location not in PTV_LOCATIONS:
            raise ValueError(f"unknown PTV location {self.ptv_location!r}")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def class_id(self):
        return classify_case(self.body_site, self.multi_target,
                             self.ptv_size, self.ptv_location)

    @property
    def criteria(self):
        return (self.body_site, self.multi_target, self.ptv_size, self.ptv_location)
