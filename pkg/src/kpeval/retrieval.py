"""Retrieval indexes and the utility metrics built on them."""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from . import porter
from .corpus import EvalInstance, tokenize, truncate_tokens
from .embeddings import EmbeddingProvider, as_vector
from .errors import (
    EmptyCorpus,
    EmptyQuery,
    MissingDoc,
    ParseError,
    ProviderUnavailable,
)

INDEX_FORMAT_VERSION = 1

QUERY_JOIN = " ; "

BM25_K1 = 1.2
BM25_B = 0.75


@dataclass(frozen=True)
class RankedList:
    """Retrieval result, entries ordered by descending score."""

    entries: tuple[tuple[str, float], ...]

    def rank_of(self, doc_id: str) -> int | None:
        """1-based rank of doc_id, or None when absent."""
        for rank, (entry_id, _) in enumerate(self.entries, start=1):
            if entry_id == doc_id:
                return rank
        return None


def index_tokens(text: str) -> list[str]:
    """Corpus normalization for retrieval: tokenize then Porter-stem."""
    return [porter.stem(t) for t in tokenize(text)]


def corpus_hash(docs: list[tuple[str, str]]) -> str:
    digest = hashlib.sha256()
    for doc_id, text in docs:
        digest.update(json.dumps([doc_id, text], ensure_ascii=False).encode("utf-8"))
    return digest.hexdigest()


def _top_k(scores: dict[str, float], k: int) -> RankedList:
    # descending score, ties broken by ascending doc_id
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return RankedList(entries=tuple(ordered[:k]))


class Bm25Index:
    """Okapi BM25 over stem-tokenized documents."""

    kind = "bm25"

    def __init__(self, doc_ids, doc_tfs, k1: float = BM25_K1, b: float = BM25_B,
                 source_hash: str = ""):
        if not doc_ids:
            raise EmptyCorpus("bm25 index over an empty corpus")
        self.doc_ids = list(doc_ids)
        self.doc_tfs = [dict(tf) for tf in doc_tfs]
        self.k1 = k1
        self.b = b
        self.source_hash = source_hash
        self.doc_lengths = [sum(tf.values()) for tf in self.doc_tfs]
        self.avg_length = sum(self.doc_lengths) / len(self.doc_lengths)
        self.df = Counter()
        for tf in self.doc_tfs:
            self.df.update(tf.keys())
        self.n_docs = len(self.doc_ids)

    @classmethod
    def build(cls, docs: list[tuple[str, str]], k1: float = BM25_K1,
              b: float = BM25_B) -> "Bm25Index":
        if not docs:
            raise EmptyCorpus("bm25 index over an empty corpus")
        doc_ids = [doc_id for doc_id, _ in docs]
        doc_tfs = [Counter(index_tokens(text)) for _, text in docs]
        return cls(doc_ids, doc_tfs, k1=k1, b=b, source_hash=corpus_hash(docs))

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.doc_ids

    def idf(self, term: str) -> float:
        df = self.df.get(term, 0)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    def score(self, query_terms: list[str], doc_index: int) -> float:
        tf = self.doc_tfs[doc_index]
        length_norm = self.k1 * (
            1.0 - self.b + self.b * self.doc_lengths[doc_index] / self.avg_length
        )
        score = 0.0
        for term in query_terms:
            freq = tf.get(term, 0)
            if freq == 0:
                continue
            score += self.idf(term) * (freq * (self.k1 + 1.0)) / (freq + length_norm)
        return score

    def retrieve(self, query: str, k: int) -> RankedList:
        terms = index_tokens(query)
        if not terms:
            raise EmptyQuery(f"query {query!r} has no terms")
        scores = {
            doc_id: self.score(terms, i) for i, doc_id in enumerate(self.doc_ids)
        }
        return _top_k(scores, k)


class DenseIndex:
    """Exact cosine search over document embeddings."""

    kind = "dense"

    def __init__(self, doc_ids, doc_vectors, provider: EmbeddingProvider,
                 source_hash: str = ""):
        if not doc_ids:
            raise EmptyCorpus("dense index over an empty corpus")
        self.doc_ids = list(doc_ids)
        self.provider = provider
        self.source_hash = source_hash
        matrix = np.stack([as_vector(v) for v in doc_vectors])
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        self._unit_matrix = matrix / norms

    @classmethod
    def build(cls, docs: list[tuple[str, str]], provider: EmbeddingProvider,
              truncate: int | None = 512) -> "DenseIndex":
        if not docs:
            raise EmptyCorpus("dense index over an empty corpus")
        texts = [truncate_tokens(text, truncate) for _, text in docs]
        vectors = provider.embed(texts)
        doc_ids = [doc_id for doc_id, _ in docs]
        return cls(doc_ids, vectors, provider, source_hash=corpus_hash(docs))

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.doc_ids

    def retrieve(self, query: str, k: int) -> RankedList:
        if not query.strip():
            raise EmptyQuery("empty dense query")
        qvec = self.provider.embed([query])[0]
        qnorm = np.linalg.norm(qvec)
        sims = self._unit_matrix @ (qvec / qnorm)
        scores = {
            doc_id: float(min(1.0, max(-1.0, sims[i])))
            for i, doc_id in enumerate(self.doc_ids)
        }
        return _top_k(scores, k)


class RerankRetriever:
    """Dense retrieval re-ranked by the sidecar's cross-encoder endpoint."""

    kind = "rerank"

    def __init__(self, dense: DenseIndex, docs: list[tuple[str, str]],
                 base_url: str, depth: int = 100, timeout: float = 120.0):
        self.dense = dense
        self.texts = dict(docs)
        self.base_url = base_url.rstrip("/")
        self.depth = depth
        self.timeout = timeout
        self.doc_ids = dense.doc_ids
        self._session = requests.Session()

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.dense

    def retrieve(self, query: str, k: int) -> RankedList:
        shortlist = self.dense.retrieve(query, self.depth)
        candidates = [
            {"id": doc_id, "text": self.texts[doc_id]}
            for doc_id, _ in shortlist.entries
        ]
        try:
            resp = self._session.post(
                f"{self.base_url}/rerank",
                json={"query": query, "candidates": candidates},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"rerank endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"rerank endpoint returned {resp.status_code}")
        try:
            ranked = [(str(r["id"]), float(r["score"])) for r in resp.json()["ranked"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed rerank response: {exc}") from exc
        return RankedList(entries=tuple(ranked[:k]))


def build_index(docs: list[tuple[str, str]], kind: str,
                provider: EmbeddingProvider | None = None,
                truncate: int | None = 512):
    if kind == "bm25":
        return Bm25Index.build(docs)
    if kind == "dense":
        if provider is None:
            raise ValueError("dense index needs an embedding provider")
        return DenseIndex.build(docs, provider, truncate=truncate)
    raise ValueError(f"unknown index kind {kind!r}")


def retrieve(index, query: str, k: int) -> RankedList:
    if k < 1:
        raise ValueError("k must be >= 1")
    return index.retrieve(query, k)


def join_query(predictions, limit: int | None = None) -> str:
    phrases = predictions if limit is None else predictions[:limit]
    return QUERY_JOIN.join(p.raw for p in phrases)


def rr_at_k(instance: EvalInstance, indexes, k: int) -> float:
    """Mean reciprocal rank of the source document across retrievers."""
    query = join_query(instance.predictions)
    total = 0.0
    for index in indexes:
        if instance.id not in index:
            raise MissingDoc(f"document {instance.id!r} not in {index.kind} index")
        rank = retrieve(index, query, k).rank_of(instance.id)
        total += 1.0 / rank if rank is not None else 0.0
    return total / len(indexes)


def spare_from_prefix(j: int, base: int) -> float:
    return 1.0 - min(base, j) / base


def spare(instance: EvalInstance, indexes, k: int, base: int = 5) -> float:
    """Retrieval-efficiency score from the shortest prefix that succeeds.

    Per retriever, j is the minimal number of top-ranked predictions whose
    joined query places the document in the top k; prefixes past `base`
    cannot improve the score, so the scan stops there.
    """
    if base < 1:
        raise ValueError("base must be >= 1")
    total = 0.0
    for index in indexes:
        if instance.id not in index:
            raise MissingDoc(f"document {instance.id!r} not in {index.kind} index")
        j = base
        for prefix_len in range(1, min(len(instance.predictions), base) + 1):
            query = join_query(instance.predictions, prefix_len)
            if retrieve(index, query, k).rank_of(instance.id) is not None:
                j = prefix_len
                break
        total += spare_from_prefix(j, base)
    return total / len(indexes)


def save_index(index, path: str | Path) -> None:
    """Persist an index as JSONL with a format-version header."""
    header = {
        "format_version": INDEX_FORMAT_VERSION,
        "kind": index.kind,
        "corpus_hash": index.source_hash,
    }
    with open(path, "w", encoding="utf-8") as fh:
        if index.kind == "bm25":
            header["params"] = {"k1": index.k1, "b": index.b}
            fh.write(json.dumps(header) + "\n")
            for doc_id, tf in zip(index.doc_ids, index.doc_tfs):
                fh.write(json.dumps({"id": doc_id, "tf": tf}) + "\n")
        elif index.kind == "dense":
            fh.write(json.dumps(header) + "\n")
            matrix = index._unit_matrix
            for i, doc_id in enumerate(index.doc_ids):
                fh.write(json.dumps({"id": doc_id, "vector": matrix[i].tolist()}) + "\n")
        else:
            raise ValueError(f"cannot persist index kind {index.kind!r}")


def load_index(path: str | Path, expected_hash: str,
               provider: EmbeddingProvider | None = None):
    """Load a persisted index; returns None when stale or version-mismatched."""
    with open(path, encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid index header ({exc})") from exc
        if header.get("format_version") != INDEX_FORMAT_VERSION:
            return None
        if header.get("corpus_hash") != expected_hash:
            return None
        kind = header.get("kind")
        records = [json.loads(line) for line in fh if line.strip()]
    if kind == "bm25":
        params = header.get("params", {})
        return Bm25Index(
            [r["id"] for r in records],
            [r["tf"] for r in records],
            k1=params.get("k1", BM25_K1),
            b=params.get("b", BM25_B),
            source_hash=expected_hash,
        )
    if kind == "dense":
        if provider is None:
            raise ValueError("loading a dense index needs an embedding provider")
        return DenseIndex(
            [r["id"] for r in records],
            [r["vector"] for r in records],
            provider,
            source_hash=expected_hash,
        )
    raise ParseError(f"{path}: unknown index kind {kind!r}")
