"""Embedding-based semantic similarity with pluggable providers.

Two providers ship in the box:

* ``mock``: a deterministic hashed bag-of-words embedding. Each token is
  hashed (blake2b) to a bucket index and a sign, the signed counts are
  accumulated, and the vector is L2-normalized. Identical texts embed to
  bit-identical vectors on every platform, which makes hermetic tests and
  reproducible pipeline runs possible without any network.
* ``remote``: an HTTP service speaking the JSON contract
  ``{"model": str, "texts": [str, ...]}`` -> ``{"vectors": [[float, ...], ...]}``.

Negative cosine values are clamped to 0 in the similarity score: text that
actively contradicts the knowledge is no more faithful than unrelated text,
and the fusion step needs all components on the same [0, 1] scale.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import httpx

from .metrics import tokenize
from .providers import (
    InFlightLimiter,
    ProviderUnavailable,
    RetryPolicy,
    auth_headers,
    call_with_retries,
)

DEFAULT_DIMENSION = 256
DEFAULT_BATCH_SIZE = 32


class DimensionMismatch(Exception):
    """Vectors of different dimensions were mixed."""


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("embedding vector must not be empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("embedding vector contains non-finite values")

    @property
    def dimension(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "mock"  # "mock" or "remote"
    endpoint: str = ""
    model: str = "hashed-bow"
    api_key: str = ""
    dimension: int = DEFAULT_DIMENSION
    timeout: float = 10.0
    batch_size: int = DEFAULT_BATCH_SIZE
    max_in_flight: int = 8
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "remote"):
            raise ValueError(f"unknown embedding provider kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote embedding provider requires an endpoint")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


class EmbeddingClient(Protocol):
    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


def _hashed_bow(text: str, dimension: int) -> EmbeddingVector:
    vec = [0.0] * dimension
    for token in tokenize(text):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        index = int.from_bytes(digest[:4], "big") % dimension
        vec[index] += 1.0 if digest[4] & 1 else -1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm > 0:
        vec = [v / norm for v in vec]
    return EmbeddingVector(tuple(vec))


class MockEmbeddingClient:
    """Deterministic offline embedder; see the module docstring for the scheme."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        _check_texts(texts)
        return [_hashed_bow(text, self.dimension) for text in texts]


class RemoteEmbeddingClient:
    """HTTP embedding client with batching, retries, and an in-flight cap."""

    def __init__(self, config: EmbeddingProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._limiter = InFlightLimiter(config.max_in_flight)
        self._http = httpx.Client(
            timeout=config.timeout,
            transport=transport,
            headers=auth_headers(config.api_key),
        )

    def close(self) -> None:
        self._http.close()

    def embed_batch(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        _check_texts(texts)
        vectors: list[EmbeddingVector] = []
        for start in range(0, len(texts), self.config.batch_size):
            batch = list(texts[start : start + self.config.batch_size])
            vectors.extend(
                call_with_retries(lambda b=batch: self._embed_once(b), self.config.retry)
            )
        dims = {v.dimension for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"provider returned mixed dimensions {sorted(dims)}")
        return vectors

    def _embed_once(self, batch: list[str]) -> list[EmbeddingVector]:
        payload = {"model": self.config.model, "texts": batch}
        try:
            with self._limiter:
                response = self._http.post(self.config.endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"embedding request failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(
                f"embedding provider returned HTTP {response.status_code}"
            )
        try:
            raw = response.json()["vectors"]
            vectors = [EmbeddingVector(tuple(float(x) for x in vec)) for vec in raw]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(batch):
            raise ProviderUnavailable(
                f"provider returned {len(vectors)} vectors for {len(batch)} texts"
            )
        return vectors


def make_embedding_client(
    config: EmbeddingProviderConfig, transport: httpx.BaseTransport | None = None
) -> EmbeddingClient:
    if config.kind == "mock":
        return MockEmbeddingClient(config.dimension)
    return RemoteEmbeddingClient(config, transport=transport)


def _check_texts(texts: Sequence[str]) -> None:
    if not texts:
        raise ValueError("embed_batch requires at least one text")
    if any(not text.strip() for text in texts):
        raise ValueError("embed_batch texts must be non-empty after trimming")


def embed_batch(
    texts: Sequence[str], provider: EmbeddingProviderConfig
) -> list[EmbeddingVector]:
    """One-shot convenience wrapper; long-lived callers should hold a client."""
    client = make_embedding_client(provider)
    try:
        return client.embed_batch(texts)
    finally:
        if isinstance(client, RemoteEmbeddingClient):
            client.close()


def cosine_similarity(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """dot(u, v) / (|u| * |v|); 0 when either vector has zero norm."""
    if u.dimension != v.dimension:
        raise DimensionMismatch(f"dimensions differ: {u.dimension} vs {v.dimension}")
    # Pre-scaling by the max components keeps the squared sums away from
    # underflow/overflow for extreme inputs; cosine itself is scale-free.
    scale_u = max(abs(a) for a in u.values)
    scale_v = max(abs(b) for b in v.values)
    if scale_u == 0.0 or scale_v == 0.0:
        return 0.0
    dot = 0.0
    norm2_u = 0.0
    norm2_v = 0.0
    for a, b in zip(u.values, v.values):
        a /= scale_u
        b /= scale_v
        dot += a * b
        norm2_u += a * a
        norm2_v += b * b
    return dot / math.sqrt(norm2_u * norm2_v)


def semantic_similarity_score(
    response: str, knowledge: str, provider: EmbeddingClient | EmbeddingProviderConfig
) -> float:
    """Clamped cosine similarity between the two texts' embeddings, in [0, 1]."""
    if not response.strip() or not knowledge.strip():
        raise ValueError("semantic similarity requires non-empty texts")
    if isinstance(provider, EmbeddingProviderConfig):
        response_vec, knowledge_vec = embed_batch([response, knowledge], provider)
    else:
        response_vec, knowledge_vec = provider.embed_batch([response, knowledge])
    return max(0.0, cosine_similarity(response_vec, knowledge_vec))
