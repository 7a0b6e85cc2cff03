"""Text embedding acquisition: HTTP client with retries, an append-only
JSON-lines cache, and a deterministic offline pseudo-embedder.

Remote embedding calls cost money, so the cache is authoritative: a vector
is fetched at most once per (text digest, model tag) and appended to the
cache file before it is returned. The pseudo-embedder stands in for the
service in tests and offline runs; it is seeded purely by the text digest,
so results survive process restarts.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EMBED_DIM",
    "EmbeddingVector",
    "EmbeddingError",
    "EmbeddingServiceError",
    "EmbeddingCache",
    "HttpEmbeddingClient",
    "PseudoEmbeddingClient",
    "pseudo_embed",
    "embed_texts",
    "text_digest",
    "vectors_to_matrix",
]

EMBED_DIM = 1536


class EmbeddingError(ValueError):
    """Invalid embedding input (empty text, malformed cache entry)."""


class EmbeddingServiceError(RuntimeError):
    """The embedding service failed after the configured retries."""


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    text_digest: str
    model_tag: str

    def __post_init__(self):
        if self.values.shape != (EMBED_DIM,):
            raise EmbeddingError(
                f"embedding must have length {EMBED_DIM}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise EmbeddingError("embedding contains non-finite entries")


class EmbeddingCache:
    """Append-only JSONL store keyed by (text digest, model tag).

    Appends go through a single lock so interrupted runs leave at worst one
    truncated trailing line, which is skipped on reload.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str], np.ndarray] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                        vec = np.asarray(obj["values"], dtype=np.float64)
                    except (json.JSONDecodeError, KeyError, TypeError):
                        continue  # truncated tail from an interrupted run
                    if vec.shape == (EMBED_DIM,):
                        self._entries[(obj["digest"], obj["model_tag"])] = vec

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str, model_tag: str) -> np.ndarray | None:
        return self._entries.get((digest, model_tag))

    def put(self, digest: str, model_tag: str, values: np.ndarray) -> None:
        with self._lock:
            if (digest, model_tag) in self._entries:
                return
            self._entries[(digest, model_tag)] = values
            line = json.dumps({"digest": digest, "model_tag": model_tag,
                               "values": values.tolist()})
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class PseudoEmbeddingClient:
    """Offline stand-in for the embedding service; see :func:`pseudo_embed`."""

    model_tag = "pseudo-1536"

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [pseudo_embed(t).values for t in texts]


class HttpEmbeddingClient:
    """Minimal JSON-over-HTTP embedding client with exponential backoff.

    Expects the service to accept {"model": tag, "input": [texts]} and
    answer {"data": [{"index": i, "embedding": [...]}]}. The credential is
    read from an environment variable, never from configuration files.
    """

    def __init__(self, endpoint: str, model_tag: str,
                 credential_env: str = "GWPKAN_EMBED_API_KEY",
                 timeout: float = 30.0, max_retries: int = 3,
                 backoff_base: float = 0.5):
        self.endpoint = endpoint
        self.model_tag = model_tag
        self.credential_env = credential_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        import requests

        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.credential_env, "")
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        payload = {"model": self.model_tag, "input": texts}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                resp = requests.post(self.endpoint, json=payload,
                                     headers=headers, timeout=self.timeout)
                if resp.status_code >= 500:
                    last_error = EmbeddingServiceError(
                        f"server error {resp.status_code}")
                    continue
                resp.raise_for_status()
                body = resp.json()
            except EmbeddingServiceError:
                continue
            except Exception as exc:  # connection errors, bad JSON, 4xx
                last_error = exc
                continue
            rows = sorted(body["data"], key=lambda d: d["index"])
            vectors = [np.asarray(r["embedding"], dtype=np.float64) for r in rows]
            if len(vectors) != len(texts):
                raise EmbeddingServiceError(
                    f"service returned {len(vectors)} vectors for {len(texts)} texts")
            for v in vectors:
                if v.shape != (EMBED_DIM,):
                    raise EmbeddingServiceError(
                        f"service returned a vector of length {v.shape[0]}, "
                        f"expected {EMBED_DIM}")
            return vectors
        raise EmbeddingServiceError(
            f"embedding request failed after {self.max_retries + 1} attempts: "
            f"{last_error}")


def pseudo_embed(text: str) -> EmbeddingVector:
    """Deterministic unit-norm vector derived from the text digest alone.

    A counter-based generator keyed by the digest makes equal texts map to
    identical vectors while distinct texts come out nearly orthogonal in
    1536 dimensions.
    """
    if text == "":
        raise EmbeddingError("embeddings of empty text are undefined")
    digest = text_digest(text)
    key = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:16], "big")
    rng = np.random.Generator(np.random.Philox(key=key))
    values = rng.standard_normal(EMBED_DIM)
    values /= np.linalg.norm(values)
    return EmbeddingVector(values=values, text_digest=digest,
                           model_tag=PseudoEmbeddingClient.model_tag)


def embed_texts(texts: list[str], client, cache: EmbeddingCache,
                batch_size: int = 64, parallel_batches: int = 4) -> list[EmbeddingVector]:
    """Embed texts in input order, fetching only cache misses in batches."""
    for i, t in enumerate(texts):
        if t == "":
            raise EmbeddingError(f"text at index {i} is empty; "
                                 "embeddings of empty text are undefined")
    tag = client.model_tag
    digests = [text_digest(t) for t in texts]

    miss_order: list[int] = []
    seen_digests: set[str] = set()
    for i, dg in enumerate(digests):
        if cache.get(dg, tag) is None and dg not in seen_digests:
            miss_order.append(i)
            seen_digests.add(dg)

    if miss_order:
        batches = [miss_order[k:k + batch_size]
                   for k in range(0, len(miss_order), batch_size)]

        def fetch(batch: list[int]) -> list[np.ndarray]:
            return client.embed_batch([texts[i] for i in batch])

        if parallel_batches > 1 and len(batches) > 1:
            with ThreadPoolExecutor(max_workers=parallel_batches) as pool:
                results = list(pool.map(fetch, batches))
        else:
            results = [fetch(b) for b in batches]
        for batch, vectors in zip(batches, results):
            for i, vec in zip(batch, vectors):
                if vec.shape != (EMBED_DIM,):
                    raise EmbeddingServiceError(
                        f"vector for text index {i} has length {vec.shape[0]}, "
                        f"expected {EMBED_DIM}")
                cache.put(digests[i], tag, vec)

    out = []
    for i, dg in enumerate(digests):
        values = cache.get(dg, tag)
        if values is None:
            raise EmbeddingServiceError(f"no vector for text index {i} after fetch")
        out.append(EmbeddingVector(values=values, text_digest=dg, model_tag=tag))
    return out


def vectors_to_matrix(row_ids: list[str], vectors: list[EmbeddingVector],
                      prefix: str):
    """Stack embedding vectors into a FeatureMatrix with prefixed columns."""
    from .descriptors import FeatureMatrix

    if len(row_ids) != len(vectors):
        raise EmbeddingError(
            f"{len(row_ids)} ids for {len(vectors)} vectors")
    rows = np.vstack([v.values for v in vectors]) if vectors \
        else np.zeros((0, EMBED_DIM))
    names = tuple(f"{prefix}_e{j}" for j in range(EMBED_DIM))
    return FeatureMatrix(names, rows, tuple(row_ids), label=prefix)
