import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from kpeval_sidecar.app import SidecarSettings, create_app

GOLDEN_PATH = Path(__file__).parent / "golden" / "protocol.jsonl"


def load_goldens():
    with open(GOLDEN_PATH, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.mark.parametrize("case", load_goldens(), ids=lambda c: c["name"])
def test_golden_suite_against_live_app(client, case):
    if case["method"] == "GET":
        response = client.get(case["path"])
    else:
        response = client.post(case["path"], json=case["request"])
    assert response.status_code == case["status"]
    assert response.json() == case["response"]


def test_responses_are_stateless(client):
    body = {"phrases": ["repeatable phrase"]}
    first = client.post("/embed", json=body).json()
    second = client.post("/embed", json=body).json()
    assert first == second


def test_same_phrase_twice_in_one_batch(client):
    body = {"phrases": ["twin", "twin"]}
    vectors = client.post("/embed", json=body).json()["vectors"]
    assert vectors[0] == vectors[1]


def test_score_preserves_batch_order(client):
    items = [
        {"dimension": "naturalness", "prompt": f"prompt {i}"} for i in range(5)
    ]
    scores = client.post("/score", json={"items": items}).json()["scores"]
    reversed_scores = client.post(
        "/score", json={"items": list(reversed(items))}
    ).json()["scores"]
    assert scores == list(reversed(reversed_scores))
    for pair in scores:
        assert pair["p_yes"] >= 0 and pair["p_no"] >= 0
        assert pair["p_yes"] + pair["p_no"] > 0


def test_rerank_single_candidate_and_permutation(client):
    single = client.post(
        "/rerank",
        json={"query": "q", "candidates": [{"id": "only", "text": "q text"}]},
    ).json()["ranked"]
    assert [r["id"] for r in single] == ["only"]

    candidates = [
        {"id": f"c{i}", "text": f"text about topic {i}"} for i in range(4)
    ]
    ranked = client.post(
        "/rerank", json={"query": "topic 2", "candidates": candidates}
    ).json()["ranked"]
    assert sorted(r["id"] for r in ranked) == [c["id"] for c in candidates]


def test_rerank_duplicate_ids_rejected(client):
    response = client.post(
        "/rerank",
        json={
            "query": "q",
            "candidates": [
                {"id": "dup", "text": "a"},
                {"id": "dup", "text": "b"},
            ],
        },
    )
    assert response.status_code == 400


def test_empty_and_oversize_batches_rejected():
    client = TestClient(create_app(SidecarSettings(max_batch=2)))
    assert client.post("/embed", json={"phrases": []}).status_code == 400
    assert client.post(
        "/embed", json={"phrases": ["a", "b", "c"]}
    ).status_code == 400
    assert client.post("/score", json={"items": []}).status_code == 400


def test_not_ready_returns_503():
    client = TestClient(create_app(SidecarSettings(embed=None, score=None,
                                                   rerank=None)))
    health = client.get("/health").json()
    assert health == {"ready": False, "models": []}
    assert client.post("/embed", json={"phrases": ["x"]}).status_code == 503
    assert client.post("/score", json={"items": [
        {"dimension": "naturalness", "prompt": "p"}
    ]}).status_code == 503
    assert client.post("/rerank", json={
        "query": "q", "candidates": [{"id": "a", "text": "t"}]
    }).status_code == 503


def test_malformed_request_rejected(client):
    assert client.post("/embed", json={"wrong": []}).status_code == 422
    assert client.post("/score", json={"items": [{"prompt": "no dimension"}]}
                       ).status_code == 422


def test_checkpoint_backend_serves_trained_encoder(tmp_path):
    from kpeval_sidecar.simcse import TrainConfig, simcse_finetune

    phrases = tmp_path / "phrases.txt"
    phrases.write_text("\n".join(f"phrase {i}" for i in range(8)))
    out = tmp_path / "encoder.pt"
    simcse_finetune(TrainConfig(
        phrase_file=str(phrases), batch_size=4, dim=12, output_path=str(out)
    ))
    client = TestClient(create_app(SidecarSettings(embed=f"checkpoint:{out}")))
    health = client.get("/health").json()
    assert health["ready"] is True
    assert "embed:checkpoint-12" in health["models"]
    response = client.post("/embed", json={"phrases": ["phrase 1", "phrase 1"]})
    payload = response.json()
    assert payload["dim"] == 12
    assert payload["vectors"][0] == payload["vectors"][1]
