"""Correlation statistics, bootstrap intervals, and embedding-space diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingProvider, cos_sim
from .errors import (
    AllTied,
    EmptySet,
    LengthMismatch,
    TooFewPhrases,
    TooFewValid,
    ZeroVariance,
)

BOOTSTRAP_METHOD = "percentile"


@dataclass(frozen=True)
class PairedScores:
    """Per-input metric values paired with human values."""

    items: tuple[tuple[str, float, float], ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise LengthMismatch("paired scores need at least 2 items")
        ids = [input_id for input_id, _, _ in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate input_ids in paired scores")
        for _, metric_value, human_value in self.items:
            if not (math.isfinite(metric_value) and math.isfinite(human_value)):
                raise ValueError("paired scores must be finite")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        metric = np.array([m for _, m, _ in self.items], dtype=np.float64)
        human = np.array([h for _, _, h in self.items], dtype=np.float64)
        return metric, human


def _check_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 2:
        raise LengthMismatch("need at least 2 paired values")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation."""
    x, y = _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.dot(xc, xc))
    sy = float(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("constant input to pearson")
    value = float(np.dot(xc, yc)) / math.sqrt(sx * sy)
    return min(1.0, max(-1.0, value))


def rankdata(values) -> np.ndarray:
    """Fractional ranks (1-based), ties receive the average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg_rank = (i + j) / 2.0 + 1.0
        for pos in range(i, j + 1):
            ranks[order[pos]] = avg_rank
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation over fractional ranks."""
    x, y = _check_pair(x, y)
    return pearson(rankdata(x), rankdata(y))


def _tie_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_tau(x, y) -> float:
    """Kendall's tau-b with tie correction."""
    x, y = _check_pair(x, y)
    n = x.shape[0]
    sign_x = np.sign(x[:, None] - x[None, :])
    sign_y = np.sign(y[:, None] - y[None, :])
    # each unordered pair appears twice in the product matrix
    s = float(np.sum(sign_x * sign_y)) / 2.0
    n0 = n * (n - 1) // 2
    tx = _tie_pairs(x)
    ty = _tie_pairs(y)
    denom = math.sqrt(float(n0 - tx) * float(n0 - ty))
    if denom == 0.0:
        raise AllTied("kendall tau denominator is zero")
    return min(1.0, max(-1.0, s / denom))


_STATS = {"pearson": pearson, "spearman": spearman, "kendall": kendall_tau}


@dataclass(frozen=True)
class CorrelationResult:
    pearson_r: float
    spearman_rho: float
    kendall_tau: float
    stat: str
    ci_low: float | None
    ci_high: float | None
    n_resamples: int
    level: float
    n_degenerate: int = 0
    method: str = BOOTSTRAP_METHOD
    metric: str = ""
    dimension: str = ""


def bootstrap_ci(paired: PairedScores, stat: str = "kendall",
                 n_resamples: int = 1000, level: float = 0.95,
                 seed: int = 0) -> CorrelationResult:
    """Input-level bootstrap percentile interval for a correlation statistic.

    Resamples are seeded independently by index, so results do not depend on
    evaluation order. Degenerate resamples (no variance / all tied) are
    skipped and counted; more than 50% degenerate raises TooFewValid.
    """
    if stat not in _STATS:
        raise ValueError(f"unknown statistic {stat!r}")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    metric, human = paired.arrays()
    n = metric.shape[0]
    stat_fn = _STATS[stat]

    values = []
    n_degenerate = 0
    for i in range(n_resamples):
        rng = np.random.default_rng((seed, i))
        idx = rng.integers(0, n, size=n)
        try:
            values.append(stat_fn(metric[idx], human[idx]))
        except (ZeroVariance, AllTied):
            n_degenerate += 1
    if n_degenerate > n_resamples / 2:
        raise TooFewValid(
            f"{n_degenerate}/{n_resamples} bootstrap resamples were degenerate"
        )
    tail = (1.0 - level) / 2.0
    ci_low, ci_high = np.percentile(values, [100 * tail, 100 * (1 - tail)])
    return CorrelationResult(
        pearson_r=pearson(metric, human),
        spearman_rho=spearman(metric, human),
        kendall_tau=kendall_tau(metric, human),
        stat=stat,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        n_resamples=n_resamples,
        level=level,
        n_degenerate=n_degenerate,
    )


def alignment(variation_pairs: list[tuple[str, str]],
              provider: EmbeddingProvider) -> float:
    """Mean cosine similarity over name-variation pairs."""
    if not variation_pairs:
        raise EmptySet("alignment needs at least one variation pair")
    left = provider.embed([a for a, _ in variation_pairs])
    right = provider.embed([b for _, b in variation_pairs])
    sims = [cos_sim(a, b) for a, b in zip(left, right)]
    return sum(sims) / len(sims)


def uniformity(phrases: list[str], provider: EmbeddingProvider,
               n_pairs: int = 50000, seed: int = 0) -> float:
    """Mean cosine over randomly sampled distinct-index phrase pairs."""
    if len(set(phrases)) < 2:
        raise TooFewPhrases("uniformity needs at least 2 distinct phrases")
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    vectors = np.stack(provider.embed(list(phrases)))
    unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    n = len(phrases)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n - 1, size=n_pairs)
    j = j + (j >= i)  # uniform over indexes distinct from i
    sims = np.einsum("ij,ij->i", unit[i], unit[j])
    return float(np.clip(sims, -1.0, 1.0).mean())
