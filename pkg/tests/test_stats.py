import math
import random

import numpy as np
import pytest

from kpeval import stats
from kpeval.embeddings import MappingEmbeddingProvider
from kpeval.errors import (
    AllTied,
    EmptySet,
    LengthMismatch,
    TooFewPhrases,
    TooFewValid,
    ZeroVariance,
)


def tau_b_oracle(x, y):
    """O(n^2) pair-counting tau-b used as the independent reference."""
    n = len(x)
    s = 0
    tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (x[i] > x[j]) - (x[i] < x[j])
            dy = (y[i] > y[j]) - (y[i] < y[j])
            s += dx * dy
            if dx == 0:
                tx += 1
            if dy == 0:
                ty += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - tx) * (n0 - ty))
    return s / denom


def test_pearson_affine():
    x = [1.0, 2.0, 5.0, 9.0]
    y = [2 * v + 1 for v in x]
    assert stats.pearson(x, y) == pytest.approx(1.0)
    assert stats.pearson(x, [-v for v in x]) == pytest.approx(-1.0)


def test_pearson_hand_value():
    assert stats.pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)


def test_pearson_errors():
    with pytest.raises(ZeroVariance):
        stats.pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        stats.pearson([1, 2], [1, 2, 3])
    with pytest.raises(LengthMismatch):
        stats.pearson([1], [2])


def test_rankdata_average_ties():
    assert stats.rankdata([10, 20, 20, 30]).tolist() == [1.0, 2.5, 2.5, 4.0]
    assert stats.rankdata([3, 1, 2]).tolist() == [3.0, 1.0, 2.0]


def test_spearman_monotone_transform():
    x = [0.2, 1.5, 3.0, 9.9]
    y = [math.exp(v) for v in x]
    assert stats.spearman(x, y) == pytest.approx(1.0)
    assert stats.spearman(x, list(reversed(x))) == pytest.approx(-1.0)


def test_spearman_tie_case_matches_hand_ranks():
    x = [1.0, 2.0, 2.0, 3.0]
    y = [1.0, 2.0, 3.0, 4.0]
    expected = stats.pearson([1.0, 2.5, 2.5, 4.0], [1.0, 2.0, 3.0, 4.0])
    assert stats.spearman(x, y) == pytest.approx(expected, abs=1e-12)


def test_kendall_identical_ordering():
    assert stats.kendall_tau([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)


def test_kendall_single_swap():
    # one discordant pair out of six
    assert stats.kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6)


def test_kendall_constant_side():
    with pytest.raises(AllTied):
        stats.kendall_tau([1, 1, 1], [1, 2, 3])


def test_kendall_matches_pair_counting_oracle():
    rng = random.Random(99)
    for _ in range(200):
        n = rng.randint(2, 50)
        # draw from a small value set so ties are common
        x = [rng.randint(0, 6) for _ in range(n)]
        y = [rng.randint(0, 6) for _ in range(n)]
        try:
            got = stats.kendall_tau(x, y)
        except AllTied:
            n0 = n * (n - 1) // 2
            assert min(
                n0 - sum(1 for i in range(n) for j in range(i + 1, n) if x[i] == x[j]),
                n0 - sum(1 for i in range(n) for j in range(i + 1, n) if y[i] == y[j]),
            ) == 0
            continue
        assert got == pytest.approx(tau_b_oracle(x, y), abs=1e-12)


def paired(items):
    return stats.PairedScores(items=tuple(items))


def test_paired_scores_validation():
    with pytest.raises(LengthMismatch):
        paired([("a", 1.0, 1.0)])
    with pytest.raises(ValueError):
        paired([("a", 1.0, 1.0), ("a", 2.0, 2.0)])
    with pytest.raises(ValueError):
        paired([("a", float("nan"), 1.0), ("b", 2.0, 2.0)])


def test_bootstrap_perfect_correlation():
    data = paired([(f"d{i}", float(i), float(i)) for i in range(10)])
    result = stats.bootstrap_ci(data, stat="pearson", n_resamples=200, seed=3)
    assert result.ci_low == pytest.approx(1.0)
    assert result.ci_high == pytest.approx(1.0)
    assert result.pearson_r == pytest.approx(1.0)


def test_bootstrap_deterministic_per_seed():
    rng = random.Random(8)
    data = paired([(f"d{i}", rng.random(), rng.random()) for i in range(30)])
    a = stats.bootstrap_ci(data, stat="kendall", n_resamples=100, seed=7)
    b = stats.bootstrap_ci(data, stat="kendall", n_resamples=100, seed=7)
    assert (a.ci_low, a.ci_high) == (b.ci_low, b.ci_high)
    c = stats.bootstrap_ci(data, stat="kendall", n_resamples=100, seed=8)
    assert (a.ci_low, a.ci_high) != (c.ci_low, c.ci_high)


def test_bootstrap_single_resample_zero_width():
    data = paired([("a", 0.1, 0.4), ("b", 0.9, 0.2), ("c", 0.5, 0.6)])
    result = stats.bootstrap_ci(data, stat="pearson", n_resamples=1, seed=1)
    assert result.ci_low == result.ci_high


def test_bootstrap_too_few_valid():
    # seed 0, resample 0 over two items draws indices [1, 1]: degenerate
    data = paired([("a", 0.0, 0.0), ("b", 1.0, 1.0)])
    with pytest.raises(TooFewValid):
        stats.bootstrap_ci(data, stat="pearson", n_resamples=1, seed=0)


def test_bootstrap_counts_degenerate_resamples():
    data = paired([("a", 0.0, 0.0), ("b", 1.0, 1.0), ("c", 2.0, 2.0)])
    result = stats.bootstrap_ci(data, stat="pearson", n_resamples=50, seed=5)
    assert 0 <= result.n_degenerate <= 25
    assert result.method == "percentile"


def test_alignment_examples():
    provider = MappingEmbeddingProvider({
        "a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 0.0],
    })
    assert stats.alignment([("a", "a"), ("b", "b")], provider) == pytest.approx(1.0)
    assert stats.alignment([("a", "b"), ("a", "c")], provider) == pytest.approx(0.5)
    with pytest.raises(EmptySet):
        stats.alignment([], provider)


def test_uniformity_identical_embeddings():
    provider = MappingEmbeddingProvider({"a": [1.0, 0.0], "b": [2.0, 0.0]})
    value = stats.uniformity(["a", "b"], provider, n_pairs=500, seed=1)
    assert value == pytest.approx(1.0)


def test_uniformity_reproducible_and_orthogonal():
    provider = MappingEmbeddingProvider({
        "e1": [1, 0, 0, 0], "e2": [0, 1, 0, 0], "e3": [0, 0, 1, 0], "e4": [0, 0, 0, 1],
    })
    phrases = ["e1", "e2", "e3", "e4"]
    first = stats.uniformity(phrases, provider, n_pairs=20000, seed=11)
    second = stats.uniformity(phrases, provider, n_pairs=20000, seed=11)
    assert first == second
    assert abs(first) <= 0.02


def test_uniformity_needs_distinct_phrases():
    provider = MappingEmbeddingProvider({"a": [1.0, 0.0]})
    with pytest.raises(TooFewPhrases):
        stats.uniformity(["a", "a"], provider)


def test_invariance_under_monotone_transforms():
    rng = random.Random(21)
    x = [rng.random() for _ in range(40)]
    y = [rng.random() for _ in range(40)]
    fx = [math.exp(3 * v) for v in x]
    assert stats.spearman(fx, y) == pytest.approx(stats.spearman(x, y), abs=1e-12)
    assert stats.kendall_tau(fx, y) == pytest.approx(stats.kendall_tau(x, y), abs=1e-12)
    gx = [2.5 * v + 7 for v in x]
    assert stats.pearson(gx, y) == pytest.approx(stats.pearson(x, y), abs=1e-12)
