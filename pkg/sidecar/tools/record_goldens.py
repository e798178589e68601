#!/usr/bin/env python3
"""Record the protocol golden suite from the live sidecar app.

The recorded file is replayed two ways: against the sidecar itself (server
conformance) and, copied into the toolkit's test tree, against its HTTP
providers via a stub server (client conformance).
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from kpeval_sidecar.app import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "golden"

CASES = [
    {
        "name": "health",
        "method": "GET",
        "path": "/health",
        "request": None,
    },
    {
        "name": "embed-pair",
        "method": "POST",
        "path": "/embed",
        "request": {"phrases": ["keyphrase extraction", "neural network"]},
    },
    {
        "name": "embed-repeat",
        "method": "POST",
        "path": "/embed",
        "request": {"phrases": ["word recognition", "word recognition"]},
    },
    {
        "name": "score-both-dimensions",
        "method": "POST",
        "path": "/score",
        "request": {
            "items": [
                {
                    "dimension": "naturalness",
                    "prompt": (
                        "question: Is this a natural utterance? </s> utterance: "
                        "This is an article about word recognition."
                    ),
                },
                {
                    "dimension": "faithfulness",
                    "prompt": (
                        "question: Is this claim consistent with the document? </s> "
                        "summary: the concept word recognition is mentioned or "
                        "described in the document. </s> document: a tiny document"
                    ),
                },
            ]
        },
    },
    {
        "name": "rerank-two-candidates",
        "method": "POST",
        "path": "/rerank",
        "request": {
            "query": "graph ranking",
            "candidates": [
                {"id": "d1", "text": "graph based ranking"},
                {"id": "d2", "text": "unrelated text"},
            ],
        },
    },
]


def main() -> None:
    client = TestClient(create_app())
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "protocol.jsonl", "w", encoding="utf-8") as fh:
        for case in CASES:
            if case["method"] == "GET":
                response = client.get(case["path"])
            else:
                response = client.post(case["path"], json=case["request"])
            assert response.status_code == 200, (case["name"], response.text)
            record = dict(case)
            record["status"] = response.status_code
            record["response"] = response.json()
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
