"""Chance-adjusted and entropy-based partition agreement scores.

All five scores are computed from the contingency table of (true class,
predicted label) counts. Entropies are in nats; every score is a ratio of
entropies or mutual informations, so the base cancels. The expected mutual
information in AMI uses the exact hypergeometric model, and AMI normalizes
by the arithmetic mean of the two entropies.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln


def contingency_table(true_labels, pred_labels):
    """Counts n_ij of items with true class i and predicted label j."""
    true_labels = list(true_labels)
    pred_labels = list(pred_labels)
    if len(true_labels) != len(pred_labels):
        raise ValueError("label sequences differ in length")
    rows = sorted(set(true_labels))
    cols = sorted(set(pred_labels))
    ri = {v: i for i, v in enumerate(rows)}
    ci = {v: i for i, v in enumerate(cols)}
    table = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for t, p in zip(true_labels, pred_labels):
        table[ri[t], ci[p]] += 1
    return table


def _entropy(counts, n):
    counts = counts[counts > 0]
    p = counts / n
    return float(-(p * np.log(p)).sum())


def homogeneity_completeness_v(table):
    """(homogeneity, completeness, V) from a contingency table.

    homogeneity = 1 - H(C|K)/H(C) (1 when H(C) = 0); completeness is the
    mirror image; V is their harmonic mean (0 when both are 0).
    """
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    if n < 1:
        raise ValueError("empty contingency table")
    a = table.sum(axis=1)  # true-class marginals
    b = table.sum(axis=0)  # predicted-label marginals
    h_c = _entropy(a, n)
    h_k = _entropy(b, n)
    nz = table > 0
    joint = table[nz] / n
    # H(C|K) = -sum p(c,k) log( p(c,k) / p(k) )
    pk = (b / n)[np.nonzero(nz)[1]]
    h_c_given_k = float(-(joint * np.log(joint / pk)).sum())
    pc = (a / n)[np.nonzero(nz)[0]]
    h_k_given_c = float(-(joint * np.log(joint / pc)).sum())
    hom = 1.0 if h_c == 0 else 1.0 - h_c_given_k / h_c
    com = 1.0 if h_k == 0 else 1.0 - h_k_given_c / h_k
    v = 0.0 if hom + com == 0 else 2.0 * hom * com / (hom + com)
    return hom, com, v


def _pair_count(x):
    return x * (x - 1) // 2


def _partitions_identical(table):
    """True when the two partitions are equal up to label renaming."""
    table = np.asarray(table)
    nz_rows = (table > 0).sum(axis=1)
    nz_cols = (table > 0).sum(axis=0)
    return bool((nz_rows == 1).all() and (nz_cols == 1).all())


def adjusted_rand(table):
    """Hubert-Arabie adjusted Rand index from a contingency table."""
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    if n < 2:
        raise ValueError(f"adjusted Rand index needs N >= 2, got {n}")
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    index = int(sum(_pair_count(int(v)) for v in table.reshape(-1)))
    sum_a = int(sum(_pair_count(int(v)) for v in a))
    sum_b = int(sum(_pair_count(int(v)) for v in b))
    total_pairs = _pair_count(n)
    expected = sum_a * sum_b / total_pairs
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0 if _partitions_identical(table) else 0.0
    return float((index - expected) / (maximum - expected))


def expected_mutual_info(table):
    """Exact E[MI] under the hypergeometric model of random tables with the
    observed marginals."""
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    a = [int(v) for v in table.sum(axis=1)]
    b = [int(v) for v in table.sum(axis=0)]
    lg = gammaln  # log-factorial via gammaln(x + 1)
    log_n_fact = lg(n + 1)
    emi = 0.0
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            for nij in range(lo, hi + 1):
                log_p = (lg(ai + 1) + lg(bj + 1) + lg(n - ai + 1) + lg(n - bj + 1)
                         - log_n_fact - lg(nij + 1) - lg(ai - nij + 1)
                         - lg(bj - nij + 1) - lg(n - ai - bj + nij + 1))
                emi += (nij / n) * math.log(n * nij / (ai * bj)) * math.exp(log_p)
    return float(emi)


def mutual_info(table):
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    mi = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            nij = int(table[i, j])
            if nij:
                mi += (nij / n) * math.log(n * nij / (int(a[i]) * int(b[j])))
    return float(mi)


def adjusted_mutual_info(table):
    """AMI = (MI - E[MI]) / (mean(H(C), H(K)) - E[MI]); 0 on a zero denominator."""
    table = np.asarray(table, dtype=np.int64)
    n = int(table.sum())
    if n < 2:
        raise ValueError(f"adjusted mutual information needs N >= 2, got {n}")
    mi = mutual_info(table)
    emi = expected_mutual_info(table)
    h_c = _entropy(table.sum(axis=1), n)
    h_k = _entropy(table.sum(axis=0), n)
    denom = 0.5 * (h_c + h_k) - emi
    if abs(denom) < 1e-15:
        return 0.0
    return float((mi - emi) / denom)


def clustering_report(true_labels, pred_labels):
    """All five partition scores from raw label sequences."""
    table = contingency_table(true_labels, pred_labels)
    hom, com, v = homogeneity_completeness_v(table)
    return {
        "homogeneity": hom,
        "completeness": com,
        "v_measure": v,
        "adjusted_rand": adjusted_rand(table),
        "adjusted_mutual_info": adjusted_mutual_info(table),
    }
