"""The plan database: embedding records with filterable metadata, exact
brute-force k-nearest-neighbor retrieval, and a binary file format.

Distances are Euclidean, accumulated in float64 for stable ordering; ties
break by lexicographic case id so results are reproducible. Retrieval is
exact by design (databases here hold hundreds of plans).

File format (`PLIX`): magic, version u32, dim u32, count u32, then per
record: u32 id length + id bytes, u32 meta length + key-value text block,
dim float32 vector. All integers and floats little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kvtext
from .volumes import CaseMeta

MAGIC = b"PLIX"
VERSION = 1


class EmptyDatabaseError(LookupError):
    """A query ran against an empty (possibly over-filtered) database."""


class IndexFormatError(ValueError):
    """Bad magic, version, or truncated index file."""


@dataclass
class EmbeddingRecord:
    case_id: str
    vector: np.ndarray
    meta: CaseMeta
    dose_path: str = ""

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float32)
        if self.vector.ndim != 1:
            raise ValueError(f"vector must be 1-d, got shape {self.vector.shape}")
        if not np.isfinite(self.vector).all():
            raise ValueError(f"record {self.case_id}: vector has non-finite entries")


@dataclass
class QueryResult:
    case_ids: list
    distances: list
    filter_description: str = "all"
    truncated: bool = False


class PlanIndex:
    """Append-only embedding store over one fixed dimension."""

    def __init__(self, dim):
        self.dim = int(dim)
        self.records = []
        self._ids = set()

    def __len__(self):
        return len(self.records)

    def insert(self, record):
        if record.vector.shape != (self.dim,):
            raise ValueError(f"record {record.case_id}: vector dim "
                             f"{record.vector.shape[0]} != index dim {self.dim}")
        if record.case_id in self._ids:
            raise ValueError(f"duplicate case id {record.case_id!r}")
        self.records.append(record)
        self._ids.add(record.case_id)

    def filter(self, predicate=None, description="all"):
        """View of records satisfying the predicate (all-pass when None)."""
        if predicate is None:
            return IndexView(self, list(self.records), description)
        return IndexView(self, [r for r in self.records if predicate(r.meta)],
                         description)

    def query_knn(self, query, k):
        return self.filter().query_knn(query, k)


@dataclass
class IndexView:
    parent: PlanIndex
    records: list
    description: str = "all"

    def __len__(self):
        return len(self.records)

    def query_knn(self, query, k):
        """Exact Euclidean top-k with case-id tie-break."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = np.asarray(query, dtype=np.float64).reshape(-1)
        if query.shape[0] != self.parent.dim:
            raise ValueError(f"query dim {query.shape[0]} != index dim {self.parent.dim}")
        if not self.records:
            raise EmptyDatabaseError(
                f"no records to query (filter: {self.description})")
        mat = np.stack([r.vector for r in self.records]).astype(np.float64)
        dists = np.sqrt(((mat - query) ** 2).sum(axis=1))
        order = sorted(range(len(self.records)),
                       key=lambda i: (dists[i], self.records[i].case_id))
        top = order[:k]
        return QueryResult(case_ids=[self.records[i].case_id for i in top],
                           distances=[float(dists[i]) for i in top],
                           filter_description=self.description,
                           truncated=k > len(self.records))

    def record_by_id(self, case_id):
        for r in self.records:
            if r.case_id == case_id:
                return r
        raise KeyError(case_id)


def _meta_block(record):
    meta = record.meta
    pairs = [
        ("case_id", meta.case_id),
        ("body_site", meta.body_site),
        ("multi_target", meta.multi_target),
        ("ptv_size", meta.ptv_size),
        ("ptv_location", meta.ptv_location),
        ("split", meta.split),
        ("prescription", meta.prescription),
        ("dose_path", record.dose_path),
    ]
    return kvtext.dumps(pairs).encode()


def _meta_from_block(block):
    kv = kvtext.loads(block.decode())
    meta = CaseMeta(case_id=kv["case_id"], body_site=kv["body_site"],
                    multi_target=kvtext.parse_bool(kv["multi_target"]),
                    ptv_size=kv["ptv_size"], ptv_location=kv["ptv_location"],
                    split=kv["split"], prescription=float(kv["prescription"]))
    return meta, kv.get("dose_path", "")


def save_index(index, path):
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<III", VERSION, index.dim, len(index.records))
    for record in index.records:
        ident = record.case_id.encode()
        meta = _meta_block(record)
        blob += struct.pack("<I", len(ident)) + ident
        blob += struct.pack("<I", len(meta)) + meta
        blob += np.ascontiguousarray(record.vector, dtype="<f4").tobytes()
    Path(path).write_bytes(bytes(blob))


def load_index(path):
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise IndexFormatError(f"{path}: bad magic {raw[:4]!r}")
    try:
        version, dim, count = struct.unpack_from("<III", raw, 4)
    except struct.error as exc:
        raise IndexFormatError(f"{path}: truncated header") from exc
    if version != VERSION:
        raise IndexFormatError(f"{path}: unsupported version {version}")
    index = PlanIndex(dim)
    offset = 16
    try:
        for _ in range(count):
            (id_len,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            ident = raw[offset:offset + id_len].decode()
            offset += id_len
            (meta_len,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            meta, dose_path = _meta_from_block(raw[offset:offset + meta_len])
            offset += meta_len
            vec = np.frombuffer(raw, dtype="<f4", count=dim, offset=offset).copy()
            if vec.shape[0] != dim:
                raise IndexFormatError(f"{path}: truncated vector for {ident}")
            offset += dim * 4
            index.insert(EmbeddingRecord(ident, vec, meta, dose_path))
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise IndexFormatError(f"{path}: truncated or corrupt record ({exc})") from exc
    if offset != len(raw):
        raise IndexFormatError(f"{path}: {len(raw) - offset} trailing bytes")
    return index


def site_filter(site):
    return lambda meta: meta.body_site == site


def criteria_filter(**wanted):
    """Predicate over CaseMeta attribute equality, e.g. body_site='prostate'."""
    def predicate(meta):
        return all(getattr(meta, key) == value for key, value in wanted.items())
    return predicate
