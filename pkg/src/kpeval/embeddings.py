"""Phrase embedding providers and the vector algebra shared by all semantic metrics."""

from __future__ import annotations

import json
import threading
from pathlib import Path

import numpy as np
import requests

from .errors import (
    DimMismatch,
    EmptyPhrase,
    EmptySet,
    MissingEmbedding,
    ParseError,
    ProviderUnavailable,
    ZeroNorm,
)


def as_vector(components) -> np.ndarray:
    """Validate and convert raw components to a float64 vector."""
    vec = np.asarray(components, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise DimMismatch(f"expected a non-empty 1-d vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ZeroNorm("vector has non-finite components")
    if not np.any(vec):
        raise ZeroNorm("zero vector rejected at ingestion")
    return vec


def cos_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against round-off."""
    if a.shape != b.shape:
        raise DimMismatch(f"dim {a.shape[0]} vs {b.shape[0]}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroNorm("cosine undefined for zero-norm vector")
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def union(vectors) -> np.ndarray:
    """Element-wise maximum of a non-empty set of same-dimension vectors."""
    vectors = list(vectors)
    if not vectors:
        raise EmptySet("union of an empty vector set")
    dim = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != dim:
            raise DimMismatch(f"dim {v.shape[0]} vs {dim}")
    return np.max(np.stack(vectors), axis=0)


class EmbeddingProvider:
    """Base provider: memo cache keyed on exact phrase text, synchronized."""

    kind = "abstract"

    def __init__(self):
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def identity(self) -> str:
        raise NotImplementedError

    def _fetch(self, texts: list[str]) -> list[np.ndarray]:
        raise NotImplementedError

    def embed(self, phrases: list[str]) -> list[np.ndarray]:
        """One vector per phrase text, in order; repeats served from cache."""
        for text in phrases:
            if not text:
                raise EmptyPhrase("cannot embed an empty phrase text")
        with self._lock:
            missing = [t for t in dict.fromkeys(phrases) if t not in self._cache]
        if missing:
            fetched = self._fetch(missing)
            with self._lock:
                for text, vec in zip(missing, fetched):
                    # first write wins so repeats stay bitwise-identical
                    self._cache.setdefault(text, vec)
        with self._lock:
            return [self._cache[t] for t in phrases]


class FileEmbeddingProvider(EmbeddingProvider):
    """Deterministic provider backed by a JSONL file of phrase -> vector records."""

    kind = "file-backed"

    def __init__(self, path: str | Path):
        super().__init__()
        self.path = str(path)
        self._store: dict[str, np.ndarray] = {}
        self.dim: int | None = None
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}:{line_no}: invalid JSON ({exc})") from exc
                if "phrase" not in record or "vector" not in record:
                    raise ParseError(f"{path}:{line_no}: needs 'phrase' and 'vector'")
                vec = as_vector(record["vector"])
                if self.dim is None:
                    self.dim = vec.shape[0]
                elif vec.shape[0] != self.dim:
                    raise DimMismatch(
                        f"{path}:{line_no}: dim {vec.shape[0]} != {self.dim}"
                    )
                self._store[str(record["phrase"])] = vec
        if not self._store:
            raise ParseError(f"{path}: embedding file has no records")

    @property
    def identity(self) -> str:
        return f"file:{self.path}"

    def _fetch(self, texts):
        vectors = []
        for text in texts:
            if text not in self._store:
                raise MissingEmbedding(f"no stored vector for phrase {text!r}")
            vectors.append(self._store[text])
        return vectors


class MappingEmbeddingProvider(EmbeddingProvider):
    """In-memory provider over an explicit phrase -> components mapping."""

    kind = "file-backed"

    def __init__(self, mapping: dict[str, list[float]]):
        super().__init__()
        self._store = {text: as_vector(vec) for text, vec in mapping.items()}

    @property
    def identity(self) -> str:
        return "mapping"

    def _fetch(self, texts):
        vectors = []
        for text in texts:
            if text not in self._store:
                raise MissingEmbedding(f"no stored vector for phrase {text!r}")
            vectors.append(self._store[text])
        return vectors


class HttpEmbeddingProvider(EmbeddingProvider):
    """Provider speaking the sidecar protocol: POST {base}/embed."""

    kind = "http-backed"

    def __init__(self, base_url: str, timeout: float = 60.0, batch_size: int = 64):
        super().__init__()
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self.dim: int | None = None
        self._session = requests.Session()

    @property
    def identity(self) -> str:
        return f"http:{self.base_url}"

    def _post(self, phrases: list[str]):
        try:
            resp = self._session.post(
                f"{self.base_url}/embed",
                json={"phrases": phrases},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"embed endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(
                f"embed endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
            dim = int(payload["dim"])
            vectors = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed embed response: {exc}") from exc
        if len(vectors) != len(phrases):
            raise ProviderUnavailable(
                f"embed response has {len(vectors)} vectors for {len(phrases)} phrases"
            )
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise ProviderUnavailable(f"embed dim changed: {dim} != {self.dim}")
        return [as_vector(v) for v in vectors]

    def _fetch(self, texts):
        out = []
        for start in range(0, len(texts), self.batch_size):
            out.extend(self._post(texts[start : start + self.batch_size]))
        return out
