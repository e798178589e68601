"""Reference-based saliency and coverage metrics, semantic and lexical."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Phrase
from .embeddings import EmbeddingProvider, cos_sim, union
from .errors import EmptyReferences, EmptySet


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MatchDecision:
    """Best match of one phrase against a candidate set, with its score."""

    source_phrase: Phrase
    best_match: Phrase | None
    score: float
    strategy: str


def f1_score(precision: float, recall: float) -> float:
    if precision + recall > 0:
        return 2 * precision * recall / (precision + recall)
    return 0.0


def make_prf(precision: float, recall: float) -> PRF:
    return PRF(precision=precision, recall=recall, f1=f1_score(precision, recall))


def _require_references(references) -> None:
    if not references:
        raise EmptyReferences("reference-based metric needs at least one reference")


def _sub_match(key_a: str, key_b: str) -> bool:
    # contiguous substring of stem keys, aligned on token boundaries
    return f" {key_a} " in f" {key_b} " or f" {key_b} " in f" {key_a} "


def exact_match_prf(predictions: list[Phrase], references: list[Phrase]) -> PRF:
    """Stem-level exact matching precision/recall/F1."""
    _require_references(references)
    ref_keys = {y.stem_key for y in references}
    pred_keys = {p.stem_key for p in predictions}
    precision = (
        sum(1 for p in predictions if p.stem_key in ref_keys) / len(predictions)
        if predictions
        else 0.0
    )
    recall = sum(1 for y in references if y.stem_key in pred_keys) / len(references)
    return make_prf(precision, recall)


def substring_match_prf(predictions: list[Phrase], references: list[Phrase]) -> PRF:
    """Match two phrases when either stem key is a substring of the other."""
    _require_references(references)
    precision = (
        sum(
            1
            for p in predictions
            if any(_sub_match(p.stem_key, y.stem_key) for y in references)
        )
        / len(predictions)
        if predictions
        else 0.0
    )
    recall = sum(
        1
        for y in references
        if any(_sub_match(p.stem_key, y.stem_key) for p in predictions)
    ) / len(references)
    return make_prf(precision, recall)


def r_precision(predictions: list[Phrase], references: list[Phrase]) -> float:
    """Fraction of the top |Y| predictions approximately matching a reference."""
    _require_references(references)
    top = predictions[: len(references)]
    matched = sum(
        1 for p in top if any(_sub_match(p.stem_key, y.stem_key) for y in references)
    )
    return matched / len(references)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l_prf(predictions: list[Phrase], references: list[Phrase]) -> PRF:
    """Rouge-L over the concatenated stem sequences of both phrase lists."""
    _require_references(references)
    pred_seq = [s for p in predictions for s in p.stems]
    ref_seq = [s for y in references for s in y.stems]
    lcs = _lcs_length(pred_seq, ref_seq)
    precision = lcs / len(pred_seq) if pred_seq else 0.0
    recall = lcs / len(ref_seq)
    return make_prf(precision, recall)


def similarity_matrix(
    predictions: list[Phrase],
    references: list[Phrase],
    provider: EmbeddingProvider,
) -> list[list[float]]:
    """Pairwise cosine similarities, rows = predictions, columns = references."""
    pred_vecs = provider.embed([p.raw for p in predictions]) if predictions else []
    ref_vecs = provider.embed([y.raw for y in references]) if references else []
    return [[cos_sim(pv, rv) for rv in ref_vecs] for pv in pred_vecs]


def sem_scores(matrix: list[list[float]], alpha: float = 0.0) -> tuple[float, float]:
    """Semantic precision and recall from a similarity table.

    Per row (prediction): the best above-threshold similarity to any column
    (reference); zero when nothing clears alpha. Precision averages rows,
    recall averages the symmetric per-column maxima. Empty sides score 0.
    """
    n_rows = len(matrix)
    n_cols = len(matrix[0]) if n_rows else 0

    def gated(value: float) -> float:
        return value if value > alpha else 0.0

    if n_rows and n_cols:
        sem_p = sum(max(gated(v) for v in row) for row in matrix) / n_rows
        sem_r = (
            sum(max(gated(matrix[i][j]) for i in range(n_rows)) for j in range(n_cols))
            / n_cols
        )
    else:
        sem_p = 0.0
        sem_r = 0.0
    return sem_p, sem_r


def sem_prf(
    predictions: list[Phrase],
    references: list[Phrase],
    provider: EmbeddingProvider,
    alpha: float = 0.0,
) -> PRF:
    """Phrase-level semantic matching precision/recall/F1."""
    _require_references(references)
    matrix = similarity_matrix(predictions, references, provider)
    if not matrix:
        # no predictions: precision 0, and every reference's max over the
        # empty prediction set is 0
        return make_prf(0.0, 0.0)
    sem_p, sem_r = sem_scores(matrix, alpha)
    return make_prf(sem_p, sem_r)


def sem_cov(
    predictions: list[Phrase],
    references: list[Phrase],
    provider: EmbeddingProvider,
) -> float:
    """Cosine between the max-pooled set representations of both sides."""
    if not predictions or not references:
        raise EmptySet("sem_cov needs non-empty predictions and references")
    pred_vecs = provider.embed([p.raw for p in predictions])
    ref_vecs = provider.embed([y.raw for y in references])
    return cos_sim(union(pred_vecs), union(ref_vecs))


def match_phrase_to_set(
    phrase: Phrase,
    candidates: list[Phrase],
    strategy: str,
    provider: EmbeddingProvider | None = None,
    alpha: float = 0.0,
) -> MatchDecision:
    """Best candidate for a phrase under a matching strategy.

    Ties break toward the earliest candidate position.
    """
    if not candidates:
        raise EmptySet("match_phrase_to_set needs at least one candidate")
    if strategy == "exact":
        for cand in candidates:
            if cand.stem_key == phrase.stem_key:
                return MatchDecision(phrase, cand, 1.0, strategy)
        return MatchDecision(phrase, None, 0.0, strategy)
    if strategy == "substring":
        for cand in candidates:
            if _sub_match(phrase.stem_key, cand.stem_key):
                return MatchDecision(phrase, cand, 1.0, strategy)
        return MatchDecision(phrase, None, 0.0, strategy)
    if strategy == "semantic":
        if provider is None:
            raise ValueError("semantic matching needs an embedding provider")
        vecs = provider.embed([phrase.raw] + [c.raw for c in candidates])
        sims = [cos_sim(vecs[0], v) for v in vecs[1:]]
        best_idx = None
        for i, sim in enumerate(sims):
            if sim > alpha and (best_idx is None or sim > sims[best_idx]):
                best_idx = i
        if best_idx is None:
            return MatchDecision(phrase, None, 0.0, strategy)
        return MatchDecision(phrase, candidates[best_idx], sims[best_idx], strategy)
    raise ValueError(f"unknown matching strategy {strategy!r}")
