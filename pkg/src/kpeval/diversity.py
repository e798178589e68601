"""Reference-free diversity metrics over a prediction set."""

from __future__ import annotations

from .corpus import Phrase
from .embeddings import EmbeddingProvider, cos_sim


def dup_token_ratio(predictions: list[Phrase]) -> float:
    """Share of stemmed tokens that repeat an earlier stem.

    Multiplicity inside a single phrase counts too. Degenerate sets with at
    most one stem score 0.
    """
    stems = [s for p in predictions for s in p.stems]
    if len(stems) <= 1:
        return 0.0
    return 1.0 - len(set(stems)) / len(stems)


def emb_sim(predictions: list[Phrase], provider: EmbeddingProvider) -> float:
    """Mean pairwise cosine over all ordered pairs i != j; 0 below two phrases."""
    m = len(predictions)
    if m < 2:
        return 0.0
    vectors = provider.embed([p.raw for p in predictions])
    total = 0.0
    for i in range(m):
        for j in range(m):
            if i != j:
                total += cos_sim(vectors[i], vectors[j])
    return total / (m * (m - 1))
