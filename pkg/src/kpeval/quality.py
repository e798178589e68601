"""Boolean-QA prompt construction and scoring for naturalness and faithfulness."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import requests

from .corpus import EvalInstance, Phrase, truncate_tokens
from .errors import DegenerateMass, EmptyPredictions, ProviderUnavailable

NATURALNESS = "naturalness"
FAITHFULNESS = "faithfulness"

# rendered byte-for-byte; do not restyle the separators
_NATURALNESS_TEMPLATE = (
    "question: Is this a natural utterance? </s> "
    "utterance: This is an article about {phrase}."
)
_FAITHFULNESS_TEMPLATE = (
    "question: Is this claim consistent with the document? </s> "
    "summary: the concept {phrase} is mentioned or described in the document. </s> "
    "document: {document}"
)


@dataclass(frozen=True)
class QualityPrompt:
    dimension: str
    text: str


def build_naturalness_prompt(phrase: Phrase) -> QualityPrompt:
    return QualityPrompt(
        dimension=NATURALNESS,
        text=_NATURALNESS_TEMPLATE.format(phrase=phrase.raw),
    )


def build_faithfulness_prompt(phrase: Phrase, doc_text: str) -> QualityPrompt:
    """Render the consistency prompt; doc_text must be pre-truncated."""
    return QualityPrompt(
        dimension=FAITHFULNESS,
        text=_FAITHFULNESS_TEMPLATE.format(phrase=phrase.raw, document=doc_text),
    )


def boolean_qa_score(p_yes: float, p_no: float) -> float:
    """Probability mass of "Yes" normalized over the two answers."""
    if p_yes < 0 or p_no < 0:
        raise ValueError(f"negative probability mass ({p_yes}, {p_no})")
    total = p_yes + p_no
    if total == 0:
        raise DegenerateMass("p_yes + p_no == 0")
    return p_yes / total


class StubScoreProvider:
    """Deterministic pseudo-probabilities from a hash of the prompt text."""

    kind = "stub"
    identity = "stub"

    def score(self, items: list[tuple[str, str]]) -> list[tuple[float, float]]:
        out = []
        for _dimension, prompt in items:
            digest = hashlib.sha256(prompt.encode("utf-8")).digest()
            unit = int.from_bytes(digest[:8], "big") / 2**64
            p_yes = 0.05 + 0.9 * unit
            out.append((p_yes, 1.0 - p_yes))
        return out


class HttpScoreProvider:
    """Score provider speaking the sidecar protocol: POST {base}/score."""

    kind = "http-backed"

    def __init__(self, base_url: str, timeout: float = 120.0, batch_size: int = 16):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self._session = requests.Session()

    @property
    def identity(self) -> str:
        return f"http:{self.base_url}"

    def _post(self, items):
        payload = {
            "items": [{"dimension": d, "prompt": p} for d, p in items]
        }
        try:
            resp = self._session.post(
                f"{self.base_url}/score", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"score endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(
                f"score endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            scores = [
                (float(s["p_yes"]), float(s["p_no"])) for s in resp.json()["scores"]
            ]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed score response: {exc}") from exc
        if len(scores) != len(items):
            raise ProviderUnavailable(
                f"score response has {len(scores)} entries for {len(items)} items"
            )
        return scores

    def score(self, items):
        out = []
        for start in range(0, len(items), self.batch_size):
            out.extend(self._post(items[start : start + self.batch_size]))
        return out


def build_prompts(instance: EvalInstance, dimension: str,
                  truncate: int | None = 512) -> list[QualityPrompt]:
    if dimension == NATURALNESS:
        return [build_naturalness_prompt(p) for p in instance.predictions]
    if dimension == FAITHFULNESS:
        doc_text = truncate_tokens(instance.doc_text, truncate)
        return [build_faithfulness_prompt(p, doc_text) for p in instance.predictions]
    raise ValueError(f"unknown quality dimension {dimension!r}")


def score_dimension(instance: EvalInstance, dimension: str, provider,
                    truncate: int | None = 512) -> float:
    """Mean boolean-QA score over the instance's predictions."""
    if not instance.predictions:
        raise EmptyPredictions(f"document {instance.id!r} has no predictions")
    prompts = build_prompts(instance, dimension, truncate=truncate)
    try:
        raw = provider.score([(p.dimension, p.text) for p in prompts])
    except ProviderUnavailable as exc:
        raise ProviderUnavailable(f"{exc} (after building {len(prompts)} prompts)") from exc
    values = [boolean_qa_score(p_yes, p_no) for p_yes, p_no in raw]
    return sum(values) / len(values)
