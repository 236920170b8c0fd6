"""Batch embedding of datasets with optional thread fan-out.

Evaluation-time embedding consumes anatomy channels only; the dose branch
never runs here. Every op in the encoder is per-sample, so chunking and
threading cannot change the numbers; results are merged in input order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..volumes import assemble_channels


def embed_dataset(model, dataset, case_ids, threads=1, chunk_size=16):
    """Embed the given cases; returns (N x M float32 matrix, ids in order)."""
    case_ids = list(case_ids)
    out = np.zeros((len(case_ids), model.config.embed_dim), dtype=np.float32)

    def run_chunk(lo):
        ids = case_ids[lo:lo + chunk_size]
        batch = np.stack([assemble_channels(dataset.load_case(cid)[0], "anatomy")
                          for cid in ids])
        out[lo:lo + len(ids)] = model.encode(batch)

    starts = range(0, len(case_ids), chunk_size)
    if threads <= 1:
        for lo in starts:
            run_chunk(lo)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_chunk, starts))
    return out, case_ids
