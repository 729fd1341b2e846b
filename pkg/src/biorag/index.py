"""Exact flat cosine index over chunk embeddings, with binary persistence.

Search is a full scan: scores are dot products against unit-norm vectors,
ranked descending with ties broken by ascending chunk id. The on-disk
format bundles vectors and chunk texts so a service can run from one file;
a CRC over the payload rejects any corrupted byte at load time.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chunking import Chunk
from .embedding import EmbeddingProviderConfig, embed_batch
from .errors import (
    CorruptFile,
    DimensionMismatch,
    DuplicateChunkId,
    EmptyIndex,
    FormatVersionMismatch,
    IoFailure,
)

MAGIC = b"RAGIDX"
FORMAT_VERSION = 1


@dataclass
class SearchHit:
    chunk_id: str
    score: float
    rank: int


@dataclass
class RetrievalConfig:
    top_k: int = 5
    min_score: float = -1.0

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")


@dataclass
class VectorIndex:
    dimension: int
    chunk_ids: list[str]
    vectors: np.ndarray  # (n, dimension) float32, unit-norm rows
    chunk_store: dict[str, Chunk]
    corpus_name: str = ""
    embedder_fingerprint: str = ""

    def __len__(self) -> int:
        return len(self.chunk_ids)


def build_index(
    chunks: list[Chunk],
    provider: EmbeddingProviderConfig,
    corpus_name: str = "",
) -> VectorIndex:
    """Embed chunks in order and assemble the index."""
    if not chunks:
        raise EmptyIndex("cannot build an index from zero chunks")
    seen: set[str] = set()
    for chunk in chunks:
        if chunk.chunk_id in seen:
            raise DuplicateChunkId(chunk.chunk_id)
        seen.add(chunk.chunk_id)
    vectors = embed_batch([c.text for c in chunks], provider)
    matrix = np.stack(vectors).astype(np.float32)
    return VectorIndex(
        dimension=provider.dimension,
        chunk_ids=[c.chunk_id for c in chunks],
        vectors=matrix,
        chunk_store={c.chunk_id: c for c in chunks},
        corpus_name=corpus_name,
        embedder_fingerprint=provider.fingerprint(),
    )


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit-norm vectors, clamped into [-1, 1]."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a.astype(np.float64), b.astype(np.float64)), -1.0, 1.0))


def search(
    index: VectorIndex,
    query_vec: np.ndarray,
    cfg: RetrievalConfig | None = None,
) -> list[SearchHit]:
    """Exact top-k scan of the whole index."""
    cfg = cfg or RetrievalConfig()
    if len(index) == 0:
        raise EmptyIndex("index has no entries")
    query = np.asarray(query_vec, dtype=np.float64)
    if query.shape != (index.dimension,):
        raise DimensionMismatch(
            f"query shape {query.shape}, index dimension {index.dimension}"
        )
    scores = np.clip(index.vectors.astype(np.float64) @ query, -1.0, 1.0)
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.chunk_ids[i]))
    hits = []
    for rank, i in enumerate(order[: cfg.top_k], start=1):
        if scores[i] < cfg.min_score:
            break
        hits.append(SearchHit(chunk_id=index.chunk_ids[i], score=float(scores[i]), rank=rank))
    return hits


# --- persistence ----------------------------------------------------------
#
# magic(6) | version u32 | crc32 u32 | covered payload:
#   dimension u32 | count u64 | fingerprint lp | corpus_name lp |
#   entries: chunk_id lp | dimension * f32 | chunk JSON lp
# All integers little-endian; lp = u32 length prefix + UTF-8 bytes.

_HEADER = struct.Struct("<6sII")


def _lp(data: bytes) -> bytes:
    return struct.pack("<I", len(data)) + data


def _chunk_json(chunk: Chunk) -> bytes:
    record = {
        "chunk_id": chunk.chunk_id,
        "doc_id": chunk.doc_id,
        "ordinal": chunk.ordinal,
        "text": chunk.text,
        "char_start": chunk.char_start,
        "char_end": chunk.char_end,
    }
    return json.dumps(record, ensure_ascii=False, sort_keys=True).encode("utf-8")


def save_index(index: VectorIndex, path: str | Path) -> None:
    parts = [
        struct.pack("<IQ", index.dimension, len(index)),
        _lp(index.embedder_fingerprint.encode("utf-8")),
        _lp(index.corpus_name.encode("utf-8")),
    ]
    matrix = np.ascontiguousarray(index.vectors, dtype="<f4")
    for i, chunk_id in enumerate(index.chunk_ids):
        parts.append(_lp(chunk_id.encode("utf-8")))
        parts.append(matrix[i].tobytes())
        parts.append(_lp(_chunk_json(index.chunk_store[chunk_id])))
    payload = b"".join(parts)
    blob = _HEADER.pack(MAGIC, FORMAT_VERSION, zlib.crc32(payload)) + payload
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise CorruptFile("unexpected end of data")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def lp_str(self) -> str:
        raw = self.take(self.u32())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptFile(f"invalid UTF-8: {exc}") from exc

    def done(self) -> bool:
        return self.pos == len(self.data)


def load_index(path: str | Path) -> VectorIndex:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise CorruptFile("file shorter than header")
    magic, version, crc = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptFile("bad magic")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"file version {version}, supported {FORMAT_VERSION}")
    payload = blob[_HEADER.size:]
    if zlib.crc32(payload) != crc:
        raise CorruptFile("checksum mismatch")

    cur = _Cursor(payload)
    dimension = cur.u32()
    count = cur.u64()
    fingerprint = cur.lp_str()
    corpus_name = cur.lp_str()
    chunk_ids: list[str] = []
    rows: list[np.ndarray] = []
    chunk_store: dict[str, Chunk] = {}
    for _ in range(count):
        chunk_id = cur.lp_str()
        vec = np.frombuffer(cur.take(dimension * 4), dtype="<f4")
        raw_chunk = cur.lp_str()
        try:
            record = json.loads(raw_chunk)
            chunk = Chunk(
                chunk_id=record["chunk_id"],
                doc_id=record["doc_id"],
                ordinal=record["ordinal"],
                text=record["text"],
                char_start=record["char_start"],
                char_end=record["char_end"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptFile(f"invalid chunk record: {exc}") from exc
        if chunk_id in chunk_store:
            raise CorruptFile(f"duplicate chunk_id {chunk_id!r}")
        chunk_ids.append(chunk_id)
        rows.append(vec)
        chunk_store[chunk_id] = chunk
    if not cur.done():
        raise CorruptFile("trailing bytes after last entry")
    matrix = (
        np.stack(rows).astype(np.float32)
        if rows else np.zeros((0, dimension), dtype=np.float32)
    )
    return VectorIndex(
        dimension=dimension,
        chunk_ids=chunk_ids,
        vectors=matrix,
        chunk_store=chunk_store,
        corpus_name=corpus_name,
        embedder_fingerprint=fingerprint,
    )
