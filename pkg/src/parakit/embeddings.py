"""Sentence embeddings behind a pluggable provider interface.

Two providers share one contract: every embedding is a 512-dimensional
unit-norm float64 vector. The ``remote`` provider speaks a small JSON
wire protocol to an external encoder service (the real semantic model
lives there); the ``fallback`` provider is a deterministic character
3-gram hasher that keeps the scoring and selection machinery fully
testable offline. Fallback similarities are NOT comparable to scores
produced by a real sentence encoder.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
import requests

from .errors import ContractError, InputError, TransportError

EMBEDDING_DIM = 512
EMBED_URL_ENV = "PARAKIT_EMBED_URL"

ProviderKind = Literal["remote", "fallback"]

# FNV-1a, 64-bit
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF

# Boundary markers pad the text so even a single character yields a 3-gram.
_PAD_START = "\x02"
_PAD_END = "\x03"


@dataclass(frozen=True)
class ProviderConfig:
    """Which embedding provider to use and how to reach it.

    ``endpoint`` is required for (and only meaningful to) the remote kind;
    the PARAKIT_EMBED_URL environment variable overrides it when set.
    ``max_concurrency`` bounds in-flight request batches; results are
    reassembled in request order regardless.
    """

    kind: ProviderKind = "fallback"
    endpoint: str | None = None
    timeout: float = 10.0
    max_batch: int = 32
    retries: int = 2
    max_concurrency: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "fallback"):
            raise ValueError(f"kind must be 'remote' or 'fallback', got {self.kind!r}")
        if self.kind == "fallback" and self.endpoint is not None:
            raise ValueError("endpoint is only meaningful for the remote provider")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries}")
        if self.max_concurrency < 1:
            raise ValueError(f"max_concurrency must be >= 1, got {self.max_concurrency}")


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _FNV_MASK
    return h


def embed_fallback(text: str) -> np.ndarray:
    """Deterministic hash embedding of ``text``.

    Character 3-grams of the case-folded text (padded with boundary
    markers) are hashed with 64-bit FNV-1a; each 3-gram adds +/-1 (sign
    taken from one hash bit) to bucket ``hash mod 512``, accumulated left
    to right, and the result is L2-normalized. Identical text always maps
    to a bitwise-identical vector on every platform.
    """
    if not text:
        raise InputError("cannot embed empty text")
    padded = _PAD_START + text.casefold() + _PAD_END
    vec = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    for i in range(len(padded) - 2):
        h = _fnv1a(padded[i : i + 3].encode("utf-8"))
        bucket = h % EMBEDDING_DIM
        vec[bucket] += 1.0 if (h >> 9) & 1 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise InputError("text hashed to the zero vector; cannot embed")
    return vec / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"vector dimensions differ: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise InputError("cosine similarity is undefined for the zero vector")
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def _resolve_endpoint(config: ProviderConfig) -> str:
    endpoint = os.environ.get(EMBED_URL_ENV) or config.endpoint
    if not endpoint:
        raise InputError(
            "remote embedding provider needs an endpoint "
            f"(config or {EMBED_URL_ENV})"
        )
    return endpoint.rstrip("/")


def _embed_batch_remote(
    texts: list[str], endpoint: str, config: ProviderConfig, batch_index: int
) -> list[np.ndarray]:
    url = f"{endpoint}/v1/embed"
    last_error: Exception | None = None
    for _attempt in range(config.retries + 1):
        try:
            response = requests.post(url, json={"texts": texts}, timeout=config.timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code != 200:
            last_error = TransportError(
                f"embedding endpoint returned HTTP {response.status_code}",
                batch_index=batch_index,
            )
            if 400 <= response.status_code < 500:
                raise last_error
            continue
        try:
            payload = response.json()
            vectors = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ContractError(
                f"malformed embedding response for batch {batch_index}: {exc}"
            ) from exc
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ContractError(
                f"embedding response for batch {batch_index} has "
                f"{len(vectors) if isinstance(vectors, list) else 'non-list'} vectors "
                f"for {len(texts)} texts"
            )
        out: list[np.ndarray] = []
        for text_index, raw in enumerate(vectors):
            vec = np.asarray(raw, dtype=np.float64)
            if vec.shape != (EMBEDDING_DIM,):
                raise ContractError(
                    f"embedding for batch {batch_index} item {text_index} has "
                    f"dimension {vec.shape}, expected ({EMBEDDING_DIM},)"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ContractError(
                    f"embedding for batch {batch_index} item {text_index} is the zero vector"
                )
            # Keep the unit-norm contract even for providers that return raw vectors.
            if abs(norm - 1.0) > 1e-6:
                vec = vec / norm
            out.append(vec)
        return out
    if isinstance(last_error, TransportError):
        raise last_error
    raise TransportError(
        f"embedding endpoint unreachable after {config.retries + 1} attempts: {last_error}",
        batch_index=batch_index,
    )


def embed(texts: list[str], config: ProviderConfig = ProviderConfig()) -> list[np.ndarray]:
    """Embed ``texts`` in order, one unit-norm 512-dim vector per input.

    The fallback provider hashes locally; the remote provider POSTs
    ``{"texts": [...]}`` to ``{endpoint}/v1/embed`` in batches of at most
    ``max_batch``, retrying each batch on transport failures.
    """
    if not texts:
        raise InputError("embed requires at least one text")
    for index, text in enumerate(texts):
        if not text or not text.strip():
            raise InputError(f"text at index {index} is empty")

    if config.kind == "fallback":
        return [embed_fallback(text) for text in texts]

    endpoint = _resolve_endpoint(config)
    batches = [texts[i : i + config.max_batch] for i in range(0, len(texts), config.max_batch)]
    if config.max_concurrency == 1 or len(batches) == 1:
        results = [
            _embed_batch_remote(batch, endpoint, config, batch_index)
            for batch_index, batch in enumerate(batches)
        ]
    else:
        with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
            results = list(
                pool.map(
                    lambda pair: _embed_batch_remote(pair[1], endpoint, config, pair[0]),
                    enumerate(batches),
                )
            )
    return [vec for batch in results for vec in batch]
