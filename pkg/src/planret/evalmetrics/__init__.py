"""Retrieval metrics, clustering scores, 2D projection, report files."""

from .clustering import (adjusted_mutual_info, adjusted_rand, clustering_report,
                         contingency_table, expected_mutual_info,
                         homogeneity_completeness_v, mutual_info)
from .projection import pca_project_2d
from .report import (CLUSTER_NAMES, METRIC_NAMES, MetricsReport, evaluate_rankings,
                     write_comparison_csv, write_metrics_csv, write_projection_csv)
from .retrieval import (LabeledRanking, confusion_at_k, metrics_at_k,
                        predicted_labels_top1, retrieval_score)

__all__ = [
    "CLUSTER_NAMES", "LabeledRanking", "METRIC_NAMES", "MetricsReport",
    "adjusted_mutual_info", "adjusted_rand", "clustering_report",
    "confusion_at_k", "contingency_table", "evaluate_rankings",
    "expected_mutual_info", "homogeneity_completeness_v", "metrics_at_k",
    "mutual_info", "pca_project_2d", "predicted_labels_top1",
    "retrieval_score", "write_comparison_csv", "write_metrics_csv",
    "write_projection_csv",
]
