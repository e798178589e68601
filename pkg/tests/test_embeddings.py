import json
import random

import numpy as np
import pytest

from kpeval import embeddings
from kpeval.errors import (
    DimMismatch,
    EmptyPhrase,
    EmptySet,
    MissingEmbedding,
    ProviderUnavailable,
    ZeroNorm,
)


def vec(*components):
    return np.array(components, dtype=np.float64)


def test_cos_sim_identical():
    assert embeddings.cos_sim(vec(1, 2, 3), vec(1, 2, 3)) == 1.0


def test_cos_sim_orthogonal():
    assert embeddings.cos_sim(vec(1, 0), vec(0, 1)) == 0.0


def test_cos_sim_hand_value():
    assert abs(embeddings.cos_sim(vec(1, 1), vec(1, 0)) - 0.70710678) < 1e-8


def test_cos_sim_errors():
    with pytest.raises(DimMismatch):
        embeddings.cos_sim(vec(1, 0), vec(1, 0, 0))
    with pytest.raises(ZeroNorm):
        embeddings.cos_sim(vec(0, 0), vec(1, 0))


def test_cos_sim_symmetric_and_scale_invariant():
    rng = random.Random(11)
    for _ in range(200):
        dim = rng.randint(1, 16)
        a = vec(*(rng.uniform(-5, 5) for _ in range(dim)))
        b = vec(*(rng.uniform(-5, 5) for _ in range(dim)))
        if not a.any() or not b.any():
            continue
        assert embeddings.cos_sim(a, b) == embeddings.cos_sim(b, a)
        c = rng.uniform(0.01, 100.0)
        assert abs(embeddings.cos_sim(c * a, b) - embeddings.cos_sim(a, b)) < 1e-9


def test_cos_sim_clamped():
    a = vec(1e-8, 1.0)
    assert -1.0 <= embeddings.cos_sim(a, a) <= 1.0


def test_union_examples():
    single = vec(3, -1)
    assert np.array_equal(embeddings.union([single]), single)
    assert np.array_equal(embeddings.union([vec(1, 0), vec(0, 1)]), vec(1, 1))
    assert np.array_equal(embeddings.union([vec(2, -3), vec(-1, 5)]), vec(2, 5))


def test_union_errors():
    with pytest.raises(EmptySet):
        embeddings.union([])
    with pytest.raises(DimMismatch):
        embeddings.union([vec(1, 0), vec(1, 0, 0)])


def test_union_properties():
    rng = random.Random(5)
    for _ in range(100):
        dim = rng.randint(1, 8)
        vectors = [
            vec(*(rng.uniform(-4, 4) for _ in range(dim)))
            for _ in range(rng.randint(1, 6))
        ]
        united = embeddings.union(vectors)
        for v in vectors:
            assert np.all(united >= v)
        shuffled = vectors[:]
        rng.shuffle(shuffled)
        assert np.array_equal(embeddings.union(shuffled), united)
        assert np.array_equal(embeddings.union(vectors + vectors), united)


def test_as_vector_rejects_bad_input():
    with pytest.raises(ZeroNorm):
        embeddings.as_vector([0.0, 0.0])
    with pytest.raises(ZeroNorm):
        embeddings.as_vector([float("nan"), 1.0])
    with pytest.raises(DimMismatch):
        embeddings.as_vector([[1.0], [2.0]])


@pytest.fixture
def file_provider(tmp_path):
    path = tmp_path / "vectors.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for phrase, vector in [
            ("alpha", [1.0, 0.0]),
            ("beta", [0.0, 1.0]),
            ("gamma", [0.5, 0.5]),
        ]:
            fh.write(json.dumps({"phrase": phrase, "vector": vector}) + "\n")
    return embeddings.FileEmbeddingProvider(path)


def test_file_provider_returns_stored_vector(file_provider):
    [v] = file_provider.embed(["alpha"])
    assert np.array_equal(v, vec(1.0, 0.0))
    assert file_provider.dim == 2
    assert file_provider.kind == "file-backed"


def test_file_provider_missing_phrase_named(file_provider):
    with pytest.raises(MissingEmbedding, match="delta"):
        file_provider.embed(["alpha", "delta"])


def test_file_provider_batch_with_repeat(file_provider):
    out = file_provider.embed(["alpha", "beta", "alpha"])
    assert len(out) == 3
    assert np.array_equal(out[0], out[2])


def test_embed_rejects_empty_text(file_provider):
    with pytest.raises(EmptyPhrase):
        file_provider.embed([""])


def test_mapping_provider_cache_identity():
    provider = embeddings.MappingEmbeddingProvider({"x": [1.0, 2.0]})
    first = provider.embed(["x"])[0]
    second = provider.embed(["x"])[0]
    assert first is second


def test_http_provider_unreachable():
    provider = embeddings.HttpEmbeddingProvider("http://127.0.0.1:9", timeout=0.5)
    with pytest.raises(ProviderUnavailable):
        provider.embed(["anything"])
