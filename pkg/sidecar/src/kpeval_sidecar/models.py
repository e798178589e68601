"""Model backends served over HTTP.

Hash-based backends are fully deterministic and need no weights; they keep
the protocol testable offline. The checkpoint backend serves a phrase
encoder trained by the fine-tuning command.
"""

from __future__ import annotations

import hashlib
import math


def _hash_unit_floats(text: str, count: int) -> list[float]:
    """Deterministic floats in [0, 1] derived from sha256 of the text."""
    out = []
    block = b""
    counter = 0
    while len(out) < count:
        block = hashlib.sha256(f"{counter}:{text}".encode("utf-8")).digest()
        for i in range(0, len(block) - 1, 2):
            if len(out) == count:
                break
            out.append(int.from_bytes(block[i : i + 2], "big") / 65535.0)
        counter += 1
    return out


class HashEmbedModel:
    """Deterministic pseudo-embeddings; one vector per distinct text."""

    def __init__(self, dim: int = 8):
        self.dim = dim
        self.name = f"embed:hash-{dim}"

    def embed(self, texts: list[str]) -> list[list[float]]:
        vectors = []
        for text in texts:
            values = [round(2.0 * u - 1.0, 6) for u in _hash_unit_floats(text, self.dim)]
            if not any(values):
                values[0] = 1.0
            vectors.append(values)
        return vectors


class CheckpointEmbedModel:
    """Serves a phrase encoder checkpoint produced by the training command."""

    def __init__(self, path: str):
        from .simcse import load_encoder

        self.encoder = load_encoder(path)
        self.encoder.eval()
        self.dim = self.encoder.dim
        self.name = f"embed:checkpoint-{self.dim}"

    def embed(self, texts: list[str]) -> list[list[float]]:
        import torch

        with torch.no_grad():
            matrix = self.encoder(texts)
        return [[float(v) for v in row] for row in matrix]


class HashScoreModel:
    """Deterministic boolean-QA masses derived from the prompt text."""

    name = "score:hash"

    def score(self, items: list[tuple[str, str]]) -> list[tuple[float, float]]:
        out = []
        for dimension, prompt in items:
            [u] = _hash_unit_floats(f"{dimension}\x00{prompt}", 1)
            p_yes = 0.05 + 0.9 * u
            out.append((round(p_yes, 6), round(1.0 - p_yes, 6)))
        return out


class LexicalRerankModel:
    """Token-overlap reranker standing in for a cross-encoder."""

    name = "rerank:lexical"

    def rerank(self, query: str, candidates: list[tuple[str, str]]):
        query_tokens = set(query.lower().split())
        scored = []
        for doc_id, text in candidates:
            doc_tokens = set(text.lower().split())
            if not query_tokens or not doc_tokens:
                score = 0.0
            else:
                overlap = len(query_tokens & doc_tokens)
                score = overlap / math.sqrt(len(query_tokens) * len(doc_tokens))
            scored.append((doc_id, round(score, 6)))
        scored.sort(key=lambda item: (-item[1], item[0]))
        return scored
