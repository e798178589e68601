import random

import pytest

from kpeval import quality
from kpeval.corpus import EvalInstance, normalize_phrase, truncate_tokens
from kpeval.errors import DegenerateMass, EmptyPredictions, ProviderUnavailable


def phrase(text):
    return normalize_phrase(text)


def make_instance(preds, title="a title", body="some body text"):
    return EvalInstance(
        id="doc", title=title, body=body, references=(),
        predictions=tuple(phrase(p) for p in preds),
    )


class FixedScoreProvider:
    kind = "stub"
    identity = "fixed"

    def __init__(self, pairs):
        self.pairs = list(pairs)
        self.seen = []

    def score(self, items):
        self.seen.extend(items)
        return self.pairs[: len(items)]


def test_naturalness_prompt_exact_bytes():
    prompt = quality.build_naturalness_prompt(phrase("word recognition"))
    assert prompt.text == (
        "question: Is this a natural utterance? </s> "
        "utterance: This is an article about word recognition."
    )
    assert prompt.dimension == "naturalness"


def test_naturalness_prompt_keeps_raw_text():
    prompt = quality.build_naturalness_prompt(phrase("U.S. policy"))
    assert prompt.text.endswith("This is an article about U.S. policy.")


def test_faithfulness_prompt_exact_bytes():
    prompt = quality.build_faithfulness_prompt(phrase("neural nets"), "doc words here")
    assert prompt.text == (
        "question: Is this claim consistent with the document? </s> "
        "summary: the concept neural nets is mentioned or described in the "
        "document. </s> document: doc words here"
    )
    assert prompt.dimension == "faithfulness"


def test_faithfulness_prompt_empty_document_still_well_formed():
    prompt = quality.build_faithfulness_prompt(phrase("x y"), "")
    assert prompt.text.endswith("</s> document: ")


def test_faithfulness_prompt_respects_truncation():
    doc = " ".join(f"w{i}" for i in range(600))
    truncated = truncate_tokens(doc, 512)
    prompt = quality.build_faithfulness_prompt(phrase("topic"), truncated)
    rendered_doc = prompt.text.split("document: ", 1)[1]
    assert len(rendered_doc.split()) == 512


def test_prompts_injective_and_reproducible():
    seen = set()
    for i in range(50):
        p = phrase(f"phrase number {i}")
        text = quality.build_naturalness_prompt(p).text
        assert text == quality.build_naturalness_prompt(p).text
        assert text not in seen
        seen.add(text)


def test_boolean_qa_score():
    assert quality.boolean_qa_score(0.5, 0.5) == 0.5
    assert quality.boolean_qa_score(0.3, 0.0) == 1.0
    assert quality.boolean_qa_score(0.2, 0.6) == pytest.approx(0.25)
    with pytest.raises(DegenerateMass):
        quality.boolean_qa_score(0.0, 0.0)
    with pytest.raises(ValueError):
        quality.boolean_qa_score(-0.1, 0.5)


def test_boolean_qa_complement():
    rng = random.Random(4)
    for _ in range(100):
        p = rng.uniform(0, 2)
        q = rng.uniform(0, 2)
        if p + q == 0:
            continue
        total = quality.boolean_qa_score(p, q) + quality.boolean_qa_score(q, p)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_score_dimension_all_yes():
    inst = make_instance(["alpha", "beta"])
    provider = FixedScoreProvider([(1.0, 0.0), (1.0, 0.0)])
    assert quality.score_dimension(inst, "naturalness", provider) == 1.0


def test_score_dimension_mean():
    inst = make_instance(["alpha", "beta"])
    provider = FixedScoreProvider([(0.5, 0.5), (0.2, 0.6)])
    value = quality.score_dimension(inst, "naturalness", provider)
    assert value == pytest.approx((0.5 + 0.25) / 2)


def test_score_dimension_empty_predictions():
    inst = make_instance([])
    with pytest.raises(EmptyPredictions):
        quality.score_dimension(inst, "naturalness", FixedScoreProvider([]))


def test_score_dimension_unreachable_provider_reports_count():
    inst = make_instance(["alpha", "beta", "gamma"])
    provider = quality.HttpScoreProvider("http://127.0.0.1:9", timeout=0.4)
    with pytest.raises(ProviderUnavailable, match="3 prompts"):
        quality.score_dimension(inst, "naturalness", provider)


def test_score_dimension_permutation_invariant():
    table = {
        "a": (0.9, 0.3),
        "b": (0.1, 0.8),
        "c": (0.6, 0.6),
    }

    class TableProvider:
        kind = "stub"
        identity = "table"

        def score(self, items):
            key = lambda prompt: prompt.split("about ")[1][0]
            return [table[key(prompt)] for _, prompt in items]

    first = quality.score_dimension(make_instance(["a", "b", "c"]), "naturalness",
                                    TableProvider())
    second = quality.score_dimension(make_instance(["c", "a", "b"]), "naturalness",
                                     TableProvider())
    assert first == pytest.approx(second, abs=1e-12)


def test_stub_provider_contract():
    provider = quality.StubScoreProvider()
    items = [("naturalness", "prompt one"), ("naturalness", "prompt two")]
    first = provider.score(items)
    second = provider.score(items)
    assert first == second
    for p_yes, p_no in first:
        assert p_yes >= 0 and p_no >= 0 and p_yes + p_no > 0
    assert first[0] != first[1]


def test_faithfulness_uses_truncated_doc():
    long_body = " ".join(f"tok{i}" for i in range(1000))
    inst = make_instance(["alpha"], body=long_body)
    provider = FixedScoreProvider([(1.0, 1.0)])
    quality.score_dimension(inst, "faithfulness", provider, truncate=16)
    _, prompt = provider.seen[0]
    rendered_doc = prompt.split("document: ", 1)[1]
    assert len(rendered_doc.split()) == 16
