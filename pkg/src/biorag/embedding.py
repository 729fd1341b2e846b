"""Unit-norm dense vectors for chunks and queries.

Two providers share one contract: a network-free deterministic hash
embedder (token + character-3-gram buckets) used for tests and offline
runs, and a client for any HTTP endpoint speaking the common JSON
embeddings schema (POST /v1/embeddings). Every vector leaving this module
is L2-normalized, so downstream cosine similarity is a plain dot product.
"""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    HttpError,
    MalformedResponse,
    ProviderUnreachable,
)

DEFAULT_DIMENSION = 384

#: Published seed for the deterministic embedder; part of its contract.
HASH_SEED = b"biorag-hashgram-v1"

RETRY_ATTEMPTS = 3
_BACKOFF_BASE_S = 0.1

_TOKEN_RE = re.compile(r"[a-z0-9]+")
NORM_TOLERANCE = 1e-6


@dataclass
class EmbeddingProviderConfig:
    kind: str = "deterministic"  # deterministic | remote
    endpoint_url: str = ""
    model_name: str = ""
    dimension: int = DEFAULT_DIMENSION
    timeout_ms: int = 30_000
    max_batch: int = 64

    def __post_init__(self):
        if self.kind not in ("deterministic", "remote"):
            raise ValueError(f"unknown provider kind: {self.kind!r}")
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        if self.timeout_ms <= 0 or self.max_batch <= 0:
            raise ValueError("timeout_ms and max_batch must be positive")

    def fingerprint(self) -> str:
        """Identifier binding indexes to the provider that filled them."""
        return f"{self.kind}:{self.model_name}:{self.dimension}"


def _normalize(values, d: int) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != d:
        raise DimensionMismatch(f"expected dimension {d}, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise MalformedResponse("vector contains non-finite values")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise EmptyInput("zero vector cannot be normalized")
    return (vec / norm).astype(np.float32)


def _bucket(feature: str, d: int) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=HASH_SEED).digest()
    return int.from_bytes(digest, "little") % d


def embed_deterministic(text: str, d: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Pure hash embedding: lowercase tokens and their character 3-grams
    each add weight 1 to a bucket; the result is L2-normalized float32."""
    if d < 8:
        raise ValueError("dimension must be at least 8")
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        raise EmptyInput(f"no tokens in {text!r}")
    acc = np.zeros(d, dtype=np.float64)
    for token in tokens:
        acc[_bucket(token, d)] += 1.0
        for i in range(len(token) - 2):
            acc[_bucket(token[i:i + 3], d)] += 1.0
    return _normalize(acc, d)


def _embeddings_url(base: str) -> str:
    base = base.rstrip("/")
    return base if base.endswith("/v1/embeddings") else base + "/v1/embeddings"


def remote_embed_request(
    texts: list[str], cfg: EmbeddingProviderConfig
) -> list[np.ndarray]:
    """One wire round-trip: POST the batch, validate, normalize.

    Transport failures and 5xx responses are retried with exponential
    backoff; other HTTP errors surface immediately.
    """
    payload = {"model": cfg.model_name, "input": list(texts)}
    url = _embeddings_url(cfg.endpoint_url)
    timeout = cfg.timeout_ms / 1000.0

    last_error: Exception | None = None
    for attempt in range(RETRY_ATTEMPTS):
        if attempt:
            time.sleep(_BACKOFF_BASE_S * (2 ** (attempt - 1)))
        try:
            response = httpx.post(url, json=payload, timeout=timeout)
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = HttpError(response.status_code, response.text)
            continue
        if response.status_code != 200:
            raise HttpError(response.status_code, response.text)
        return _parse_embeddings_response(response, len(texts), cfg.dimension)
    raise ProviderUnreachable(
        f"{url}: giving up after {RETRY_ATTEMPTS} attempts ({last_error})"
    )


def _parse_embeddings_response(
    response: httpx.Response, expected: int, d: int
) -> list[np.ndarray]:
    try:
        body = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"response is not JSON: {exc}") from exc
    data = body.get("data") if isinstance(body, dict) else None
    if not isinstance(data, list):
        raise MalformedResponse("missing 'data' array")
    if len(data) != expected:
        raise MalformedResponse(f"expected {expected} embeddings, got {len(data)}")
    slots: list[np.ndarray | None] = [None] * expected
    for item in data:
        if not isinstance(item, dict) or "embedding" not in item or "index" not in item:
            raise MalformedResponse("embedding item lacks 'index'/'embedding'")
        idx = item["index"]
        if not isinstance(idx, int) or not 0 <= idx < expected or slots[idx] is not None:
            raise MalformedResponse(f"bad embedding index {idx!r}")
        values = item["embedding"]
        if not isinstance(values, list):
            raise MalformedResponse("'embedding' is not an array")
        if len(values) != d:
            raise DimensionMismatch(f"configured dimension {d}, endpoint returned {len(values)}")
        try:
            slots[idx] = _normalize(values, d)
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"non-numeric embedding values: {exc}") from exc
    return [vec for vec in slots if vec is not None]


def embed_batch(texts: list[str], provider: EmbeddingProviderConfig) -> list[np.ndarray]:
    """Embed texts in order, splitting oversized batches transparently."""
    if not texts:
        raise EmptyInput("no texts to embed")
    for i, text in enumerate(texts):
        if not text or not text.strip():
            raise EmptyInput(f"text {i} is empty")
    if provider.kind == "deterministic":
        return [embed_deterministic(t, provider.dimension) for t in texts]
    vectors: list[np.ndarray] = []
    for start in range(0, len(texts), provider.max_batch):
        vectors.extend(remote_embed_request(texts[start:start + provider.max_batch], provider))
    return vectors
