"""Per-frame caption embeddings and exact cosine top-K key-frame retrieval."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .docmodel import VideoDocument
from .errors import DimensionMismatch, ZeroVector


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class FrameEmbeddings:
    video_id: str
    frame_ids: tuple[int, ...]
    matrix: np.ndarray  # (T, d), read-only

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise DimensionMismatch(f"need a non-empty (T, d) matrix, got shape {m.shape}")
        if m.shape[0] != len(self.frame_ids):
            raise DimensionMismatch("one vector per frame id required")
        if list(self.frame_ids) != sorted(set(self.frame_ids)):
            raise ValueError("frame ids must be unique and ascending")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "frame_ids", tuple(int(i) for i in self.frame_ids))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def vectors(self) -> list[tuple[int, list[float]]]:
        return [(fid, row.tolist()) for fid, row in zip(self.frame_ids, self.matrix)]

    def __eq__(self, other):
        if not isinstance(other, FrameEmbeddings):
            return NotImplemented
        return (self.video_id == other.video_id and self.frame_ids == other.frame_ids
                and np.array_equal(self.matrix, other.matrix))

    __hash__ = None


@dataclass(frozen=True)
class RetrievalResult:
    ranked: tuple[tuple[int, float], ...]
    k: int

    @property
    def ids(self) -> list[int]:
        return [fid for fid, _ in self.ranked]

    def to_json(self) -> dict:
        return {"k": self.k, "ranked": [[fid, score] for fid, score in self.ranked]}


def rank_frames(query_vec: Sequence[float], embeddings: FrameEmbeddings, k: int) -> RetrievalResult:
    """Top-k frames by cosine to ``query_vec``; ties go to the earlier frame."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (embeddings.dimension,):
        raise DimensionMismatch(f"query has shape {q.shape}, frames have dimension {embeddings.dimension}")
    qn = np.linalg.norm(q)
    if qn == 0:
        raise ZeroVector("query embedding is zero")
    m = embeddings.matrix
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        bad = [embeddings.frame_ids[i] for i in np.flatnonzero(norms == 0)]
        raise ZeroVector(f"zero embedding for frames {bad}")
    # row-wise reduction keeps identical rows bit-identical, so exact ties stay ties
    scores = ((m / norms[:, None]) * (q / qn)).sum(axis=1)
    ids = np.asarray(embeddings.frame_ids)
    order = np.lexsort((ids, -scores))[:min(k, len(ids))]
    return RetrievalResult(tuple((int(ids[i]), float(scores[i])) for i in order), k)


def caption_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class EmbeddingCache:
    """Append-only JSON Lines store of frame vectors; last record wins per key."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._data: dict[tuple[str, int, str], list[float]] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key = (obj["video_id"], int(obj["frame_id"]), obj["caption_hash"])
                    self._data[key] = [float(x) for x in obj["vector"]]
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    continue  # a torn trailing write; the entry is recomputed

    def get(self, video_id: str, frame_id: int, chash: str):
        return self._data.get((video_id, frame_id, chash))

    def put_many(self, records: list[tuple[str, int, str, list[float]]]) -> None:
        if not records:
            return
        lines = []
        with self._lock:
            for video_id, frame_id, chash, vec in records:
                self._data[(video_id, frame_id, chash)] = list(vec)
                lines.append(json.dumps({"video_id": video_id, "frame_id": frame_id,
                                         "caption_hash": chash, "vector": list(vec)}))
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")

    def __len__(self):
        return len(self._data)


def embed_frames(doc: VideoDocument, embedder, cache: EmbeddingCache | None = None,
                 batch_size: int = 256) -> FrameEmbeddings:
    """Embed each frame's short caption; augmentations are never embedded."""
    captions = [rec.short_caption for rec in doc.frames]
    hashes = [caption_hash(c) for c in captions]
    vectors: list = [None] * len(captions)
    if cache is not None:
        for i, rec in enumerate(doc.frames):
            vectors[i] = cache.get(doc.video_id, rec.frame_id, hashes[i])
    todo = [i for i, v in enumerate(vectors) if v is None]
    fresh = []
    for start in range(0, len(todo), batch_size):
        chunk = todo[start:start + batch_size]
        out = embedder.embed([captions[i] for i in chunk])
        if len(out) != len(chunk):
            raise DimensionMismatch(f"embedder returned {len(out)} vectors for {len(chunk)} texts")
        for i, vec in zip(chunk, out):
            vectors[i] = vec
            fresh.append((doc.video_id, doc.frames[i].frame_id, hashes[i], vec))
    if len({len(v) for v in vectors}) != 1:
        raise DimensionMismatch("frame embeddings have inconsistent dimensions")
    if cache is not None:
        cache.put_many(fresh)
    return FrameEmbeddings(doc.video_id, tuple(r.frame_id for r in doc.frames), np.array(vectors))


def retrieve_topk(query: str, embeddings: FrameEmbeddings, k: int, embedder) -> RetrievalResult:
    if k < 1:
        raise ValueError("k must be >= 1")
    (qvec,) = embedder.embed([query])
    return rank_frames(qvec, embeddings, k)
