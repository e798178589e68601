#!/usr/bin/env python3
"""Regenerate the bundled 10-document mini dataset and its embedding file.

The vectors are deterministic hashes of the exact strings the pipeline
requests (phrases, document texts, and retrieval queries), so the full
six-dimension evaluation runs offline against the file-backed provider.
"""

import hashlib
import json
from pathlib import Path

DIM = 16
BASE = 5
OUT = Path(__file__).resolve().parent.parent / "src" / "kpeval" / "data" / "mini"

DOCS = [
    {
        "id": "mini-01",
        "title": "an integration of online and pseudo online information for cursive word recognition",
        "abstract": "We combine online stroke data with pseudo online representations rendered from the trajectory. A classifier combination scheme merges decisions from both channels and improves cursive word recognition on handwriting benchmarks.",
        "references": "online ; cursive ; word recognition ; offline ; handwriting ; classifier combination",
        "predictions": "online cursive word recognition ; pseudo online information ; stroke order independent ; classification decisions ; single engine ; offline representation",
    },
    {
        "id": "mini-02",
        "title": "neural keyphrase generation with copy mechanisms",
        "abstract": "Sequence to sequence models generate keyphrases that may be absent from the source document. A copy mechanism lets the decoder reuse rare source tokens, improving recall on scientific abstracts.",
        "references": "keyphrase generation ; copy mechanism ; sequence to sequence ; scientific abstracts",
        "predictions": "keyphrase generation ; neural networks ; copy mechanism ; encoder decoder ; absent keyphrases",
    },
    {
        "id": "mini-03",
        "title": "graph based ranking for unsupervised keyword extraction",
        "abstract": "We rank candidate noun phrases with a random walk over a word cooccurrence graph. The method needs no training data and is competitive with supervised feature based extractors on news articles.",
        "references": "graph ranking ; keyword extraction ; random walk ; unsupervised learning",
        "predictions": "graph based ranking ; keyword extraction ; cooccurrence graph ; news articles ; noun phrases ; random walk",
    },
    {
        "id": "mini-04",
        "title": "dense passage retrieval for open domain question answering",
        "abstract": "Dense encoders map questions and passages into a shared vector space. Retrieval by inner product outperforms sparse bag of words baselines when training data is plentiful.",
        "references": "dense retrieval ; question answering ; passage ranking ; vector space",
        "predictions": "dense passage retrieval ; open domain question answering ; inner product search ; sparse baselines",
    },
    {
        "id": "mini-05",
        "title": "contrastive learning of sentence embeddings with dropout noise",
        "abstract": "Two dropout perturbed encodings of the same sentence form a positive pair while other sentences in the batch act as negatives. The objective spreads unrelated sentences apart and tightens paraphrase clusters.",
        "references": "contrastive learning ; sentence embeddings ; dropout ; paraphrase",
        "predictions": "contrastive learning ; sentence embeddings ; dropout noise ; positive pairs ; in batch negatives",
    },
    {
        "id": "mini-06",
        "title": "evaluating factual consistency of abstractive summaries",
        "abstract": "Abstractive summarizers hallucinate entities and relations that the source never states. We probe consistency with question answering and entailment models and report a benchmark of common failure modes.",
        "references": "factual consistency ; abstractive summarization ; hallucination ; evaluation benchmark",
        "predictions": "factual consistency ; abstractive summaries ; hallucinated entities ; question answering probes",
    },
    {
        "id": "mini-07",
        "title": "okapi weighting for probabilistic document retrieval",
        "abstract": "Term frequency saturation and document length normalization are combined in a single weighting formula. The scheme remains a strong baseline for ad hoc document retrieval decades after its introduction.",
        "references": "okapi weighting ; probabilistic retrieval ; term frequency ; length normalization",
        "predictions": "okapi weighting ; document retrieval ; term frequency saturation ; length normalization ; strong baseline",
    },
    {
        "id": "mini-08",
        "title": "topic segmentation of meeting transcripts with lexical chains",
        "abstract": "Lexical chains track repeated and related vocabulary across utterances. Chain boundaries align with topic shifts, enabling unsupervised segmentation of long meeting transcripts.",
        "references": "topic segmentation ; meeting transcripts ; lexical chains ; topic shifts",
        "predictions": "topic segmentation ; lexical chains ; meeting transcripts ; repeated vocabulary ; unsupervised segmentation ; topic shift detection",
    },
    {
        "id": "mini-09",
        "title": "cross lingual transfer for low resource named entity recognition",
        "abstract": "Multilingual encoders transfer entity knowledge from high resource languages to low resource ones. Simple vocabulary alignment further narrows the gap without any target language labels.",
        "references": "cross lingual transfer ; named entity recognition ; low resource languages ; multilingual encoders",
        "predictions": "cross lingual transfer ; named entity recognition ; vocabulary alignment ; zero shot labels",
    },
    {
        "id": "mini-10",
        "title": "spectral clustering of citation networks",
        "abstract": "Eigenvectors of the normalized graph laplacian reveal community structure in citation networks. The clusters recover research areas that match manually curated subject codes.",
        "references": "spectral clustering ; citation networks ; community structure ; graph laplacian",
        "predictions": "spectral clustering",
    },
]


def hash_vector(text: str) -> list[float]:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    extended = digest + hashlib.sha256(digest).digest()
    values = []
    for i in range(DIM):
        pair = extended[2 * i : 2 * i + 2]
        unit = int.from_bytes(pair, "big") / 65535.0
        values.append(round(2.0 * unit - 1.0, 6))
    if not any(values):
        values[0] = 1.0
    return values


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    with open(OUT / "instances.jsonl", "w", encoding="utf-8") as fh:
        for doc in DOCS:
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")

    texts = []
    for doc in DOCS:
        preds = [p.strip() for p in doc["predictions"].split(";") if p.strip()]
        refs = [r.strip() for r in doc["references"].split(";") if r.strip()]
        texts.extend(preds)
        texts.extend(refs)
        texts.append(f"{doc['title']} {doc['abstract']}".strip())
        texts.append(" ; ".join(preds))
        for j in range(1, min(len(preds), BASE) + 1):
            texts.append(" ; ".join(preds[:j]))

    with open(OUT / "vectors.jsonl", "w", encoding="utf-8") as fh:
        for text in dict.fromkeys(texts):
            record = {"phrase": text, "vector": hash_vector(text)}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
