"""Metric report assembly and serialization (key-value text + CSV)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .. import kvtext
from .clustering import clustering_report
from .retrieval import metrics_at_k, predicted_labels_top1, retrieval_score

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")
CLUSTER_NAMES = ("homogeneity", "completeness", "v_measure",
                 "adjusted_rand", "adjusted_mutual_info")


@dataclass
class MetricsReport:
    model_name: str
    k_values: list
    at_k: dict                      # k -> {metric: value}
    retrieval_scores: dict          # metric -> score
    clustering: dict = field(default_factory=dict)

    def dump(self, path):
        pairs = [("model", self.model_name),
                 ("k_values", self.k_values)]
        for k in self.k_values:
            for m in METRIC_NAMES:
                pairs.append((f"{m}_at_{k}", self.at_k[k][m]))
        for m in METRIC_NAMES:
            pairs.append((f"{m}_retrieval_score", self.retrieval_scores[m]))
        for name in CLUSTER_NAMES:
            if name in self.clustering:
                pairs.append((name, self.clustering[name]))
        Path(path).write_text(kvtext.dumps(pairs))


def evaluate_rankings(model_name, rankings, true_labels=None, k_max=5,
                      base=0.5, offset=0):
    """Full report for one model from its labeled rankings.

    true_labels defaults to each ranking's own true class; clustering
    scores compare them against the rank-1 predictions.
    """
    ks = list(range(1, k_max + 1))
    at_k = {k: metrics_at_k(rankings, k) for k in ks}
    scores = {m: retrieval_score([at_k[k][m] for k in ks], base=base, offset=offset)
              for m in METRIC_NAMES}
    if true_labels is None:
        true_labels = [r.true_class for r in rankings]
    clustering = clustering_report(true_labels, predicted_labels_top1(rankings))
    return MetricsReport(model_name=model_name, k_values=ks, at_k=at_k,
                         retrieval_scores=scores, clustering=clustering)


def write_metrics_csv(reports, path):
    """Flat (model, metric, k, value) rows; k empty for aggregate rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "metric", "k", "value"])
        for rep in reports:
            for k in rep.k_values:
                for m in METRIC_NAMES:
                    writer.writerow([rep.model_name, m, k, repr(rep.at_k[k][m])])
            for m in METRIC_NAMES:
                writer.writerow([rep.model_name, f"{m}_retrieval_score", "",
                                 repr(rep.retrieval_scores[m])])
            for name in CLUSTER_NAMES:
                if name in rep.clustering:
                    writer.writerow([rep.model_name, name, "", repr(rep.clustering[name])])


def write_comparison_csv(reports, path):
    """One row per model with the retrieval-score and clustering columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = (["model"] + [f"{m}_retrieval_score" for m in METRIC_NAMES]
                  + list(CLUSTER_NAMES))
        writer.writerow(header)
        for rep in reports:
            row = [rep.model_name]
            row += [repr(rep.retrieval_scores[m]) for m in METRIC_NAMES]
            row += [repr(rep.clustering.get(name, "")) for name in CLUSTER_NAMES]
            writer.writerow(row)


def write_projection_csv(case_ids, coords, class_ids, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "x", "y", "class_id"])
        for cid, (x, y), cls in zip(case_ids, coords, class_ids):
            writer.writerow([cid, repr(float(x)), repr(float(y)), cls])
