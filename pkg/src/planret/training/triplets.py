"""Anchor/positive/negative sampling over the class taxonomy."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class TripletBatch:
    anchor_ids: list
    positive_ids: list
    negative_ids: list


class TripletSampler:
    """Draws triplets from a case-id pool with known class ids.

    Positives are uniform over the anchor's class minus the anchor itself;
    negatives are uniform over every case of a different class. Classes
    with fewer than two members cannot provide positives, which is checked
    up front.
    """

    def __init__(self, case_ids, class_of):
        self.case_ids = list(case_ids)
        self.class_of = dict((cid, class_of(cid)) if callable(class_of) else (cid, class_of[cid])
                             for cid in self.case_ids)
        self.by_class = {}
        for cid in self.case_ids:
            self.by_class.setdefault(self.class_of[cid], []).append(cid)
        for cls, members in sorted(self.by_class.items()):
            if len(members) < 2:
                raise ValueError(
                    f"class {cls} has a single member ({members[0]}); "
                    "triplet sampling needs at least two cases per class")

    def sample(self, anchors, rng):
        """Positives and negatives for a given anchor sequence."""
        positives, negatives = [], []
        for anchor in anchors:
            cls = self.class_of[anchor]
            mates = [c for c in self.by_class[cls] if c != anchor]
            positives.append(mates[rng.integers(len(mates))])
            others = [c for c in self.case_ids if self.class_of[c] != cls]
            negatives.append(others[rng.integers(len(others))])
        return TripletBatch(list(anchors), positives, negatives)

    def sample_uniform(self, batch_size, rng):
        """Uniform anchors plus their positives and negatives."""
        anchors = [self.case_ids[rng.integers(len(self.case_ids))]
                   for _ in range(batch_size)]
        return self.sample(anchors, rng)


def sample_triplets(case_ids, class_of, batch_size, rng):
    return TripletSampler(case_ids, class_of).sample_uniform(batch_size, rng)
