"""Embedding providers (precomputed files or HTTP service) and vector math."""

from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from crisismine.corpus import Corpus, content_digest, serialize_corpus

_MAGIC = b"CMVEC1\n"


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple
    vectors: np.ndarray  # (n, dim) float32

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d matrix")
        if len(self.ids) != vectors.shape[0]:
            raise ValueError("id count != row count")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in embedding matrix")
        if not np.isfinite(vectors).all():
            raise ValueError("non-finite embedding values")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.ids)


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero vector")
    return float(np.dot(a, b) / (na * nb))


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float32)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if (norms == 0).any():
        raise ValueError("cannot normalize zero rows")
    return matrix / norms


def write_vector_file(matrix: EmbeddingMatrix, path) -> None:
    """Binary layout: magic, dim u32, count u32, id table (utf-8, LF), float32 rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    id_blob = "\n".join(matrix.ids).encode("utf-8")
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIQ", matrix.dim, len(matrix), len(id_blob)))
        fh.write(id_blob)
        fh.write(matrix.vectors.astype("<f4").tobytes())
    tmp.replace(path)


def read_vector_file(path) -> EmbeddingMatrix:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise EmbeddingError(f"{path}: not a vector file")
        dim, count, id_len = struct.unpack("<IIQ", fh.read(16))
        ids = fh.read(id_len).decode("utf-8").split("\n") if id_len else []
        data = np.frombuffer(fh.read(count * dim * 4), dtype="<f4").reshape(count, dim)
    return EmbeddingMatrix(ids=tuple(ids), vectors=data.copy())


def write_vectors_jsonl(matrix: EmbeddingMatrix, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for seg_id, row in zip(matrix.ids, matrix.vectors):
            fh.write(json.dumps({"id": seg_id, "vector": [float(x) for x in row]}) + "\n")


def read_vectors_jsonl(path) -> EmbeddingMatrix:
    ids, rows = [], []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            ids.append(obj["id"])
            rows.append(obj["vector"])
    return EmbeddingMatrix(ids=tuple(ids), vectors=np.asarray(rows, dtype=np.float32))


class FileEmbeddingProvider:
    """Serves precomputed vectors from a binary or JSONL vector file."""

    def __init__(self, path):
        path = Path(path)
        if path.suffix == ".jsonl":
            matrix = read_vectors_jsonl(path)
        else:
            matrix = read_vector_file(path)
        self._by_id = dict(zip(matrix.ids, matrix.vectors))
        self.dim = matrix.dim
        self.name = f"file:{path.name}"

    def embed(self, ids, texts) -> np.ndarray:
        missing = [i for i in ids if i not in self._by_id]
        if missing:
            raise EmbeddingError(f"ids missing from vector file: {missing[:10]}")
        return np.stack([self._by_id[i] for i in ids])


class HttpEmbeddingProvider:
    """POSTs text batches to an embedding endpoint.

    Contract: ``POST {endpoint} {"texts": [...]} -> {"vectors": [[...]]}``.
    """

    def __init__(self, endpoint: str, dim: int = 384, batch_size: int = 32,
                 concurrency: int = 4, timeout: float = 60.0, retries: int = 2,
                 transport=None):
        import httpx

        self.endpoint = endpoint
        self.dim = dim
        self.batch_size = batch_size
        self.concurrency = concurrency
        self.retries = retries
        self.name = f"http:{endpoint}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _post_batch(self, batch_ids, batch_texts):
        last_exc = None
        for _ in range(self.retries + 1):
            try:
                resp = self._client.post(self.endpoint, json={"texts": list(batch_texts)})
                resp.raise_for_status()
                vectors = resp.json()["vectors"]
                if len(vectors) != len(batch_texts):
                    raise EmbeddingError(
                        f"endpoint returned {len(vectors)} vectors for "
                        f"{len(batch_texts)} texts (ids {batch_ids[:3]}...)"
                    )
                return np.asarray(vectors, dtype=np.float32)
            except EmbeddingError:
                raise
            except Exception as exc:
                last_exc = exc
        raise EmbeddingError(f"embedding request failed for ids {list(batch_ids)[:10]}: {last_exc}")

    def embed(self, ids, texts) -> np.ndarray:
        batches = [
            (ids[i:i + self.batch_size], texts[i:i + self.batch_size])
            for i in range(0, len(texts), self.batch_size)
        ]
        with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
            results = list(pool.map(lambda b: self._post_batch(*b), batches))
        out = np.concatenate(results) if results else np.zeros((0, self.dim), np.float32)
        if out.shape[0] and out.shape[1] != self.dim:
            raise EmbeddingError(
                f"dimension mismatch: endpoint returned {out.shape[1]}, expected {self.dim}"
            )
        return out


def _segment_side_text(seg, side: str) -> str:
    if side == "source":
        return seg.source_text
    if side == "target":
        return seg.target_text
    if side == "concat":
        return f"{seg.source_text} {seg.target_text}"
    raise ValueError(f"unknown embedding side: {side!r}")


def embed_segments(corpus: Corpus, provider, side: str = "source",
                   cache_dir=None) -> EmbeddingMatrix:
    """One vector per segment, corpus order. Results are cached on disk keyed
    by (corpus digest, side, provider name)."""
    cache_path = None
    if cache_dir is not None:
        digest = content_digest(serialize_corpus(corpus))
        key = content_digest(f"{digest}|{side}|{provider.name}".encode())
        cache_path = Path(cache_dir) / f"{key}.vec"
        if cache_path.exists():
            return read_vector_file(cache_path)
    ids = [s.id for s in corpus]
    texts = [_segment_side_text(s, side) for s in corpus]
    matrix = EmbeddingMatrix(ids=tuple(ids),
                             vectors=np.asarray(provider.embed(ids, texts), np.float32))
    if cache_path is not None:
        write_vector_file(matrix, cache_path)
    return matrix
