"""Dataset ingestion, phrase normalization, and core evaluation types."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import porter
from .errors import DuplicateId, EmptyPhrase, ParseError

PHRASE_SEP = ";"


@dataclass(frozen=True)
class Phrase:
    """A keyphrase with its normalized token and stem forms."""

    raw: str
    tokens: tuple[str, ...]
    stems: tuple[str, ...]
    stem_key: str


@dataclass(frozen=True)
class EvalInstance:
    """One document with reference phrases and rank-ordered predictions."""

    id: str
    title: str
    body: str
    references: tuple[Phrase, ...]
    predictions: tuple[Phrase, ...]

    @property
    def doc_text(self) -> str:
        return f"{self.title} {self.body}".strip()


@dataclass(frozen=True)
class Dataset:
    instances: tuple[EvalInstance, ...]
    corpus_docs: tuple[tuple[str, str], ...]


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and not token[start].isalnum():
        start += 1
    while end > start and not token[end - 1].isalnum():
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation, keep hyphens."""
    tokens = []
    for piece in text.lower().split():
        piece = _strip_edge_punct(piece)
        if piece:
            tokens.append(piece)
    return tokens


def normalize_phrase(raw: str) -> Phrase:
    """Build a Phrase: lowercase tokens plus their Porter stems.

    Raises EmptyPhrase when no tokens survive normalization.
    """
    tokens = tuple(tokenize(raw))
    if not tokens:
        raise EmptyPhrase(f"no tokens survive normalization of {raw!r}")
    stems = tuple(porter.stem(t) for t in tokens)
    return Phrase(raw=raw.strip(), tokens=tokens, stems=stems, stem_key=" ".join(stems))


def split_phrase_field(field: str) -> list[Phrase]:
    """Parse a ';'-separated phrase list, skipping empty segments."""
    phrases = []
    for part in field.split(PHRASE_SEP):
        part = part.strip()
        if part:
            phrases.append(normalize_phrase(part))
    return phrases


def dedupe_predictions(predictions: list[Phrase]) -> list[Phrase]:
    """Drop later duplicates by stem_key, keeping first-occurrence order."""
    seen = set()
    out = []
    for p in predictions:
        if p.stem_key not in seen:
            seen.add(p.stem_key)
            out.append(p)
    return out


def truncate_tokens(text: str, budget: int | None) -> str:
    """Keep at most `budget` whitespace tokens of text."""
    if budget is None:
        return text
    tokens = text.split()
    if len(tokens) <= budget:
        return text
    return " ".join(tokens[:budget])


def _parse_instance(record: dict, path: str, line_no: int) -> EvalInstance:
    for field in ("id", "title", "references", "predictions"):
        if field not in record:
            raise ParseError(f"{path}:{line_no}: missing field {field!r}")
    if "abstract" in record:
        body = record["abstract"]
    elif "body" in record:
        body = record["body"]
    else:
        raise ParseError(f"{path}:{line_no}: missing field 'abstract'")
    try:
        references = tuple(split_phrase_field(str(record["references"])))
        predictions = tuple(split_phrase_field(str(record["predictions"])))
    except EmptyPhrase as exc:
        raise ParseError(f"{path}:{line_no}: {exc}") from exc
    return EvalInstance(
        id=str(record["id"]),
        title=str(record["title"]),
        body=str(body),
        references=references,
        predictions=predictions,
    )


def _read_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{line_no}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{line_no}: record is not an object")
            yield line_no, record


def load_dataset(instances_path: str | Path, corpus_path: str | Path | None = None) -> Dataset:
    """Load a JSONL dataset; the retrieval corpus defaults to the instances.

    Instance records carry id, title, abstract (or body), references and
    predictions (';'-separated). Corpus records carry id and text.
    """
    instances = []
    seen_ids = set()
    for line_no, record in _read_jsonl(instances_path):
        instance = _parse_instance(record, str(instances_path), line_no)
        if instance.id in seen_ids:
            raise DuplicateId(f"{instances_path}:{line_no}: duplicate id {instance.id!r}")
        seen_ids.add(instance.id)
        instances.append(instance)

    if corpus_path is None:
        corpus_docs = tuple((inst.id, inst.doc_text) for inst in instances)
    else:
        corpus_docs = []
        corpus_ids = set()
        for line_no, record in _read_jsonl(corpus_path):
            for field in ("id", "text"):
                if field not in record:
                    raise ParseError(f"{corpus_path}:{line_no}: missing field {field!r}")
            doc_id = str(record["id"])
            if doc_id in corpus_ids:
                raise DuplicateId(f"{corpus_path}:{line_no}: duplicate id {doc_id!r}")
            corpus_ids.add(doc_id)
            corpus_docs.append((doc_id, str(record["text"])))
        missing = seen_ids - corpus_ids
        if missing:
            raise ParseError(
                f"{corpus_path}: corpus lacks instance ids: {sorted(missing)}"
            )
        corpus_docs = tuple(corpus_docs)

    return Dataset(instances=tuple(instances), corpus_docs=tuple(corpus_docs))


def save_dataset(dataset: Dataset, instances_path: str | Path,
                 corpus_path: str | Path | None = None) -> None:
    """Write a Dataset back to the JSONL formats accepted by load_dataset."""
    with open(instances_path, "w", encoding="utf-8") as fh:
        for inst in dataset.instances:
            record = {
                "id": inst.id,
                "title": inst.title,
                "abstract": inst.body,
                "references": " ; ".join(p.raw for p in inst.references),
                "predictions": " ; ".join(p.raw for p in inst.predictions),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    if corpus_path is not None:
        with open(corpus_path, "w", encoding="utf-8") as fh:
            for doc_id, text in dataset.corpus_docs:
                fh.write(json.dumps({"id": doc_id, "text": text}, ensure_ascii=False) + "\n")
