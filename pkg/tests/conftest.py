import importlib.resources

import pytest

from kpeval.corpus import normalize_phrase

# worked example: predictions of one system vs the dataset references
WORKED_EXAMPLE_REFERENCES = [
    "online",
    "cursive",
    "word recognition",
    "offline",
    "handwriting",
    "classifier combination",
]
WORKED_EXAMPLE_PREDICTIONS = [
    "online cursive word recognition",
    "pseudo online information",
    "stroke order independent",
    "classification decisions",
    "single engine",
    "offline representation",
]


@pytest.fixture
def worked_example():
    preds = [normalize_phrase(p) for p in WORKED_EXAMPLE_PREDICTIONS]
    refs = [normalize_phrase(r) for r in WORKED_EXAMPLE_REFERENCES]
    return preds, refs


@pytest.fixture(scope="session")
def mini_data_dir():
    return importlib.resources.files("kpeval") / "data" / "mini"
