#!/usr/bin/env python3
"""Regenerate the golden prompt file used by the acceptance suite.

The templates here are written out independently of the package code so the
golden file pins the wire format rather than echoing the implementation.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "golden"

FUZZ_PHRASES = [
    "word recognition",
    "online",
    "state-of-the-art models",
    "U.S. foreign policy",
    "value-at-risk (VaR)",
    "naive Bayes classifier",
    "Schrödinger equation",
    "ελληνικά keyphrases",
    "C++ template metaprogramming",
    "self-supervised learning.",
    "question: nested prompt",
    "phrases; with; separators",
    "a",
    "123 numbers 456",
    "hyphenated-multi-word-term",
    "trailing period.",
    "McDonald's franchise model",
    "日本語のキーフレーズ",
    "mixed CASE Phrase",
    "quote \"inside\" phrase",
]

DOC_TEXT = "short document body used for the faithfulness golden prompts"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "prompts.jsonl", "w", encoding="utf-8") as fh:
        for phrase in FUZZ_PHRASES:
            naturalness = (
                "question: Is this a natural utterance? </s> utterance: "
                "This is an article about " + phrase + "."
            )
            faithfulness = (
                "question: Is this claim consistent with the document? </s> "
                "summary: the concept " + phrase
                + " is mentioned or described in the document. </s> document: "
                + DOC_TEXT
            )
            record = {
                "phrase": phrase,
                "doc_text": DOC_TEXT,
                "naturalness": naturalness,
                "faithfulness": faithfulness,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
