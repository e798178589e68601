import json
import random

import pytest

from kpeval import corpus
from kpeval.errors import DuplicateId, EmptyPhrase, ParseError


def test_normalize_phrase_stems():
    phrase = corpus.normalize_phrase("Word Recognition")
    assert phrase.tokens == ("word", "recognition")
    assert phrase.stems == ("word", "recognit")
    assert phrase.stem_key == "word recognit"


def test_normalize_single_token():
    phrase = corpus.normalize_phrase("online")
    assert phrase.tokens == ("online",)
    assert len(phrase.stems) == 1


def test_normalize_whitespace_only_rejected():
    with pytest.raises(EmptyPhrase):
        corpus.normalize_phrase("   ")
    with pytest.raises(EmptyPhrase):
        corpus.normalize_phrase("...!?")


def test_tokenize_strips_edge_punctuation_keeps_hyphens():
    assert corpus.tokenize("State-of-the-art, (really)!") == [
        "state-of-the-art",
        "really",
    ]
    assert corpus.tokenize("foo's bar.") == ["foo's", "bar"]


def test_normalize_deterministic_and_lengths():
    a = corpus.normalize_phrase("Neural  Networks")
    b = corpus.normalize_phrase("Neural  Networks")
    assert a == b
    assert len(a.stems) == len(a.tokens)


def test_renormalizing_tokens_is_stable():
    rng = random.Random(7)
    pool = [
        "Online Handwriting", "word recognitions!", "state-of-the-art models",
        "  Deep   LEARNING ", "graphs; and, networks", "a b c",
    ]
    for _ in range(50):
        raw = rng.choice(pool)
        first = corpus.normalize_phrase(raw)
        again = corpus.normalize_phrase(" ".join(first.tokens))
        assert again.tokens == first.tokens
        assert again.stems == first.stems


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def _record(doc_id, **overrides):
    record = {
        "id": doc_id,
        "title": f"title {doc_id}",
        "abstract": f"abstract text for {doc_id}",
        "references": "online ; cursive ; word recognition",
        "predictions": "online handwriting ; cursive",
    }
    record.update(overrides)
    return record


def test_load_dataset_two_lines(tmp_path):
    path = tmp_path / "data.jsonl"
    _write_jsonl(path, [_record("d1"), _record("d2")])
    dataset = corpus.load_dataset(path)
    assert len(dataset.instances) == 2
    assert [doc_id for doc_id, _ in dataset.corpus_docs] == ["d1", "d2"]
    assert dataset.corpus_docs[0][1] == "title d1 abstract text for d1"


def test_load_dataset_splits_reference_field(tmp_path):
    path = tmp_path / "data.jsonl"
    _write_jsonl(path, [_record("d1")])
    inst = corpus.load_dataset(path).instances[0]
    assert [r.raw for r in inst.references] == [
        "online", "cursive", "word recognition",
    ]


def test_load_dataset_missing_field_names_line(tmp_path):
    path = tmp_path / "data.jsonl"
    record = _record("d1")
    del record["references"]
    _write_jsonl(path, [_record("d0"), record])
    with pytest.raises(ParseError, match=r"2: missing field 'references'"):
        corpus.load_dataset(path)


def test_load_dataset_duplicate_id(tmp_path):
    path = tmp_path / "data.jsonl"
    _write_jsonl(path, [_record("d1"), _record("d1")])
    with pytest.raises(DuplicateId):
        corpus.load_dataset(path)


def test_load_dataset_with_corpus_file(tmp_path):
    inst_path = tmp_path / "data.jsonl"
    corpus_path = tmp_path / "corpus.jsonl"
    _write_jsonl(inst_path, [_record("d1")])
    _write_jsonl(corpus_path, [
        {"id": "d1", "text": "doc one"},
        {"id": "extra", "text": "unlabeled doc"},
    ])
    dataset = corpus.load_dataset(inst_path, corpus_path)
    assert len(dataset.corpus_docs) == 2

    _write_jsonl(corpus_path, [{"id": "other", "text": "nope"}])
    with pytest.raises(ParseError, match="lacks instance ids"):
        corpus.load_dataset(inst_path, corpus_path)


def test_dataset_round_trip(tmp_path):
    path = tmp_path / "data.jsonl"
    _write_jsonl(path, [_record("d1"), _record("d2", predictions="a ; b ; c")])
    first = corpus.load_dataset(path)
    out_inst = tmp_path / "again.jsonl"
    out_corpus = tmp_path / "corpus.jsonl"
    corpus.save_dataset(first, out_inst, out_corpus)
    second = corpus.load_dataset(out_inst, out_corpus)
    assert first == second


def test_dedupe_predictions():
    phrases = [corpus.normalize_phrase(t) for t in ["neural net", "Neural Net"]]
    assert len(corpus.dedupe_predictions(phrases)) == 1

    phrases = [corpus.normalize_phrase(t) for t in ["a", "b"]]
    assert [p.raw for p in corpus.dedupe_predictions(phrases)] == ["a", "b"]

    phrases = [corpus.normalize_phrase(t) for t in ["nets", "net", "net"]]
    survivors = corpus.dedupe_predictions(phrases)
    assert [p.raw for p in survivors] == ["nets"]


def test_dedupe_is_subsequence():
    rng = random.Random(3)
    pool = ["net", "nets", "deep net", "graph", "graphs", "model"]
    for _ in range(50):
        raws = [rng.choice(pool) for _ in range(rng.randint(0, 8))]
        phrases = [corpus.normalize_phrase(t) for t in raws]
        out = corpus.dedupe_predictions(phrases)
        assert len(out) <= len(phrases)
        it = iter(phrases)
        assert all(p in it for p in out)  # subsequence check


def test_truncate_tokens():
    assert corpus.truncate_tokens("a b c d", 2) == "a b"
    assert corpus.truncate_tokens("a b", 512) == "a b"
    assert corpus.truncate_tokens("a b", None) == "a b"
