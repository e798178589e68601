"""Model sidecar serving embeddings, boolean-QA scores, and reranking."""

__version__ = "0.1.0"
