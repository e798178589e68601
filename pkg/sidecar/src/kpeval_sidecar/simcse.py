"""Keyphrase-aware contrastive fine-tuning of a phrase encoder.

Each batch is encoded twice with independent dropout noise; the two
encodings of the same phrase form the positive pair against in-batch
negatives. Defaults follow the published training setup (batch size 512,
learning rate 1e-6, max sequence length 12, one epoch).
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn


class TrainingDiverged(RuntimeError):
    """Non-finite loss encountered; message names the batch index."""


@dataclass(frozen=True)
class TrainConfig:
    phrase_file: str
    batch_size: int = 512
    learning_rate: float = 1e-6
    max_seq_len: int = 12
    epochs: int = 1
    temperature: float = 0.05
    dim: int = 32
    buckets: int = 4096
    dropout: float = 0.1
    seed: int = 0
    output_path: str = "phrase_encoder.pt"


def simcse_loss(h: torch.Tensor, h_prime: torch.Tensor,
                temperature: float) -> torch.Tensor:
    """Contrastive loss over cosine similarities of paired encodings.

    Mean over the batch of -log softmax_i(sim(h_i, h_j') / temperature)
    where the matching index is the positive.
    """
    if h.shape != h_prime.shape:
        raise ValueError(f"shape mismatch: {tuple(h.shape)} vs {tuple(h_prime.shape)}")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    a = F.normalize(h, dim=-1)
    b = F.normalize(h_prime, dim=-1)
    logits = (a @ b.T) / temperature
    targets = torch.arange(h.shape[0], device=h.device)
    return F.cross_entropy(logits, targets)


def _token_bucket(token: str, buckets: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % buckets


class TinyPhraseEncoder(nn.Module):
    """Hashed bag-of-tokens encoder; dropout provides the stochastic passes."""

    def __init__(self, dim: int = 32, buckets: int = 4096, dropout: float = 0.1,
                 max_seq_len: int = 12):
        super().__init__()
        self.dim = dim
        self.buckets = buckets
        self.max_seq_len = max_seq_len
        self.embedding = nn.Embedding(buckets, dim)
        self.dropout = nn.Dropout(dropout)
        self.proj = nn.Linear(dim, dim)

    def forward(self, texts: list[str]) -> torch.Tensor:
        pooled = []
        for text in texts:
            tokens = text.split()[: self.max_seq_len] or [""]
            ids = torch.tensor(
                [_token_bucket(t, self.buckets) for t in tokens], dtype=torch.long
            )
            pooled.append(self.embedding(ids).mean(dim=0))
        stacked = torch.stack(pooled)
        return self.proj(self.dropout(stacked))


def load_phrases(path: str | Path) -> list[str]:
    """Phrase list, lowercased and deduplicated, file order preserved."""
    phrases = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip().lower()
            if line:
                phrases.append(line)
    return list(dict.fromkeys(phrases))


def simcse_finetune(config: TrainConfig,
                    encoder: TinyPhraseEncoder | None = None) -> dict:
    """Train the encoder and save a checkpoint with the config embedded."""
    phrases = load_phrases(config.phrase_file)
    if not phrases:
        raise ValueError(f"phrase file {config.phrase_file!r} is empty")

    torch.manual_seed(config.seed)
    if encoder is None:
        encoder = TinyPhraseEncoder(
            dim=config.dim,
            buckets=config.buckets,
            dropout=config.dropout,
            max_seq_len=config.max_seq_len,
        )
    encoder.train()
    optimizer = torch.optim.AdamW(encoder.parameters(), lr=config.learning_rate)

    losses = []
    step = 0
    for _epoch in range(config.epochs):
        for start in range(0, len(phrases), config.batch_size):
            batch = phrases[start : start + config.batch_size]
            h = encoder(batch)
            h_prime = encoder(batch)
            loss = simcse_loss(h, h_prime, config.temperature)
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at batch {step}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
            step += 1

    checkpoint = {
        "config": dataclasses.asdict(config),
        "state_dict": encoder.state_dict(),
        "losses": losses,
        "n_phrases": len(phrases),
    }
    torch.save(checkpoint, config.output_path)
    return checkpoint


def load_encoder(path: str | Path) -> TinyPhraseEncoder:
    checkpoint = torch.load(path, map_location="cpu", weights_only=False)
    cfg = checkpoint["config"]
    encoder = TinyPhraseEncoder(
        dim=cfg["dim"],
        buckets=cfg["buckets"],
        dropout=cfg["dropout"],
        max_seq_len=cfg["max_seq_len"],
    )
    encoder.load_state_dict(checkpoint["state_dict"])
    return encoder
