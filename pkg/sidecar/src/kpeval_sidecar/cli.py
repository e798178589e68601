"""Sidecar entry points: serve the HTTP API or run contrastive fine-tuning."""

from __future__ import annotations

import argparse
import sys

from .app import SidecarSettings, create_app
from .simcse import TrainConfig, simcse_finetune


def _cmd_serve(args) -> int:
    import uvicorn

    settings = SidecarSettings(
        embed=args.embed,
        score=args.score,
        rerank=args.rerank,
        max_batch=args.max_batch,
    )
    uvicorn.run(create_app(settings), host=args.host, port=args.port)
    return 0


def _cmd_train(args) -> int:
    config = TrainConfig(
        phrase_file=args.phrases,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        max_seq_len=args.max_seq_len,
        epochs=args.epochs,
        temperature=args.temperature,
        dim=args.dim,
        seed=args.seed,
        output_path=args.output,
    )
    checkpoint = simcse_finetune(config)
    losses = checkpoint["losses"]
    print(
        f"trained on {checkpoint['n_phrases']} phrases, {len(losses)} steps, "
        f"first loss {losses[0]:.6f}, last loss {losses[-1]:.6f}"
    )
    print(config.output_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpeval-sidecar")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8900)
    p_serve.add_argument("--embed", default="hash",
                         help="hash, hash:<dim>, or checkpoint:<path>")
    p_serve.add_argument("--score", default="hash")
    p_serve.add_argument("--rerank", default="lexical")
    p_serve.add_argument("--max-batch", type=int, default=128)
    p_serve.set_defaults(func=_cmd_serve)

    p_train = sub.add_parser("train", help="contrastive fine-tuning")
    p_train.add_argument("--phrases", required=True,
                         help="text file, one phrase per line")
    p_train.add_argument("--output", default="phrase_encoder.pt")
    p_train.add_argument("--batch-size", type=int, default=512)
    p_train.add_argument("--learning-rate", type=float, default=1e-6)
    p_train.add_argument("--max-seq-len", type=int, default=12)
    p_train.add_argument("--epochs", type=int, default=1)
    p_train.add_argument("--temperature", type=float, default=0.05)
    p_train.add_argument("--dim", type=int, default=32)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=_cmd_train)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
