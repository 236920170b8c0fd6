"""Retrieval quality at cutoff k and the exponentially weighted score.

The multiclass confusion matrix at cutoff k collects one (true class,
retrieved class) pair per query per rank 1..k. Per-class one-vs-rest
tp/fp/fn/tn counts then feed the standard accuracy/precision/recall
formulas, macro-averaged over the classes present among the query truths
(a class with no predicted positives contributes precision 0); F1 is the
harmonic mean of the macro precision and macro recall. At k = 1 this
reduces to ordinary 1-NN classification.

The retrieval score is sum_k f(k) * base^(k + offset) with base 1/2 and
offset 0 by default. Note the printed weighting caps the score at
1 - base^n (0.96875 for n = 5) even for a perfect f; both knobs are
configurable because reported scores above 1 are not reproducible from
the printed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LabeledRanking:
    """One query's true class and the classes of its ranked retrievals."""

    true_class: int
    retrieved_classes: list

    @property
    def depth(self):
        return len(self.retrieved_classes)


def confusion_at_k(rankings, k):
    """(labels, matrix) over all rank <= k pairs; rows true, columns retrieved."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    depth = min(r.depth for r in rankings)
    if k > depth:
        raise ValueError(f"k={k} exceeds stored ranking depth {depth}")
    labels = sorted({r.true_class for r in rankings}
                    | {c for r in rankings for c in r.retrieved_classes[:k]})
    pos = {c: i for i, c in enumerate(labels)}
    mat = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for r in rankings:
        for c in r.retrieved_classes[:k]:
            mat[pos[r.true_class], pos[c]] += 1
    return labels, mat


def metrics_at_k(rankings, k):
    """Macro accuracy/precision/recall/F1 over the confusion at cutoff k."""
    labels, mat = confusion_at_k(rankings, k)
    present = sorted({r.true_class for r in rankings})
    total = int(mat.sum())
    accs, precs, recs = [], [], []
    for cls in present:
        i = labels.index(cls)
        tp = int(mat[i, i])
        fn = int(mat[i, :].sum()) - tp
        fp = int(mat[:, i].sum()) - tp
        tn = total - tp - fn - fp
        accs.append((tp + tn) / total)
        precs.append(tp / (tp + fp) if tp + fp else 0.0)
        recs.append(tp / (tp + fn) if tp + fn else 0.0)
    precision = float(np.mean(precs))
    recall = float(np.mean(recs))
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": float(np.mean(accs)), "precision": precision,
            "recall": recall, "f1": f1}


def retrieval_score(values, base=0.5, offset=0):
    """sum_k f(k) * base^(k + offset) over k = 1..len(values)."""
    return float(sum(v * base ** (k + offset) for k, v in enumerate(values, start=1)))


def predicted_labels_top1(rankings):
    """Each query's predicted label: the class of its rank-1 neighbor."""
    if any(r.depth < 1 for r in rankings):
        raise ValueError("rankings must hold at least one retrieved class")
    return [r.retrieved_classes[0] for r in rankings]
