"""Command-line entry points: eval, meta-eval, index, diag."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline, retrieval, stats
from .corpus import load_dataset
from .errors import KpEvalError

SIDECAR_URL_ENV = "KPEVAL_SIDECAR_URL"


def _sidecar_url(args) -> str | None:
    return getattr(args, "sidecar_url", None) or os.environ.get(SIDECAR_URL_ENV)


def _add_provider_flags(parser):
    parser.add_argument("--embeddings-file", help="file-backed embedding provider")
    parser.add_argument(
        "--sidecar-url",
        help=f"model sidecar base url (or env {SIDECAR_URL_ENV})",
    )


def _add_dataset_flags(parser):
    parser.add_argument("--instances", required=True, help="instances JSONL file")
    parser.add_argument("--corpus", help="retrieval corpus JSONL (defaults to instances)")


def _cmd_eval(args) -> int:
    config = pipeline.EvalConfig(
        instances_path=args.instances,
        corpus_path=args.corpus,
        dimensions=tuple(args.dimensions),
        baselines=args.baselines,
        alpha=args.alpha,
        k=args.k,
        base=args.base,
        truncate=args.truncate,
        retrievers=tuple(args.retrievers),
        embeddings_file=args.embeddings_file,
        sidecar_url=_sidecar_url(args),
        scorer=args.scorer,
        rerank=args.rerank,
        dedupe=args.dedupe,
        seed=args.seed,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    report = pipeline.run_eval(config)
    formats = tuple(args.formats)
    written = pipeline.emit_report(report, config.out_dir, formats=formats)
    written.append(pipeline.write_metadata(report, config.out_dir))
    for path in written:
        print(path)
    return 0


def _cmd_meta_eval(args) -> int:
    pairs = []
    for spec in args.pair:
        parts = spec.split(":")
        if len(parts) != 2:
            raise KpEvalError(f"--pair must look like metric:dimension, got {spec!r}")
        pairs.append((parts[0], parts[1]))
    config = pipeline.MetaEvalConfig(
        instances_path=args.instances,
        corpus_path=args.corpus,
        human_path=args.human,
        pairs=tuple(pairs),
        system_id=args.system_id,
        alpha=args.alpha,
        stat=args.stat,
        n_resamples=args.resamples,
        level=args.level,
        seed=args.seed,
        embeddings_file=args.embeddings_file,
        sidecar_url=_sidecar_url(args),
        out_dir=args.out_dir,
    )
    results = pipeline.run_meta_eval(config)
    path = pipeline.emit_meta_report(results, config.out_dir)
    for result in results:
        print(
            f"{result.metric} vs {result.dimension}: "
            f"r={result.pearson_r:.3f} rho={result.spearman_rho:.3f} "
            f"tau={result.kendall_tau:.3f} "
            f"{result.stat} CI[{result.ci_low:.3f}, {result.ci_high:.3f}]"
        )
    print(path)
    return 0


def _cmd_index(args) -> int:
    dataset = load_dataset(args.instances, args.corpus)
    docs = list(dataset.corpus_docs)
    embedder = pipeline.build_embedding_provider(
        args.embeddings_file, _sidecar_url(args)
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind in args.retrievers:
        index = retrieval.build_index(
            docs, kind, provider=embedder, truncate=args.truncate
        )
        path = out_dir / f"index_{kind}.jsonl"
        retrieval.save_index(index, path)
        print(path)
    return 0


def _cmd_diag(args) -> int:
    embedder = pipeline.build_embedding_provider(
        args.embeddings_file, _sidecar_url(args)
    )
    if embedder is None:
        raise KpEvalError("diag needs an embedding provider")
    out = {}
    if args.pairs_file:
        pairs = []
        with open(args.pairs_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                pairs.append((str(record["phrase"]), str(record["variant"])))
        out["alignment"] = stats.alignment(pairs, embedder)
    if args.phrases_file:
        with open(args.phrases_file, encoding="utf-8") as fh:
            phrases = [line.strip() for line in fh if line.strip()]
        out["uniformity"] = stats.uniformity(
            phrases, embedder, n_pairs=args.n_pairs, seed=args.seed
        )
    if "alignment" in out and "uniformity" in out:
        out["delta"] = out["alignment"] - out["uniformity"]
    if not out:
        raise KpEvalError("diag needs --pairs-file and/or --phrases-file")
    print(json.dumps(out, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpeval",
        description="Score keyphrase predictions along six dimensions "
        "and meta-evaluate metrics against human judgments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate predictions on a dataset")
    _add_dataset_flags(p_eval)
    _add_provider_flags(p_eval)
    p_eval.add_argument(
        "--dimensions", nargs="*", default=list(pipeline.DIMENSIONS),
        help="subset of: " + " ".join(pipeline.DIMENSIONS),
    )
    p_eval.add_argument("--baselines", action="store_true",
                        help="also compute lexical baseline metrics")
    p_eval.add_argument("--alpha", type=float, default=0.0)
    p_eval.add_argument("--k", type=int, default=5)
    p_eval.add_argument("--base", type=int, default=5)
    p_eval.add_argument("--truncate", type=int, default=512)
    p_eval.add_argument("--retrievers", nargs="*", default=["bm25", "dense"])
    p_eval.add_argument("--scorer", choices=["stub", "http"])
    p_eval.add_argument("--rerank", action="store_true",
                        help="add the sidecar cross-encoder retriever")
    p_eval.add_argument("--dedupe", action="store_true",
                        help="drop duplicate predictions by stem before scoring")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.add_argument("--formats", nargs="*", default=["machine", "table"])
    p_eval.add_argument("--out-dir", default="kpeval_out")
    p_eval.set_defaults(func=_cmd_eval)

    p_meta = sub.add_parser("meta-eval", help="correlate metrics with human scores")
    _add_dataset_flags(p_meta)
    _add_provider_flags(p_meta)
    p_meta.add_argument("--human", required=True, help="human judgments JSONL")
    p_meta.add_argument(
        "--pair", action="append", required=True,
        help="metric:dimension pair, repeatable (e.g. sem_f1:f1)",
    )
    p_meta.add_argument("--system-id", help="restrict judgments to one system")
    p_meta.add_argument("--alpha", type=float, default=0.0)
    p_meta.add_argument("--stat", choices=["pearson", "spearman", "kendall"],
                        default="kendall")
    p_meta.add_argument("--resamples", type=int, default=1000)
    p_meta.add_argument("--level", type=float, default=0.95)
    p_meta.add_argument("--seed", type=int, default=0)
    p_meta.add_argument("--out-dir", default="kpeval_out")
    p_meta.set_defaults(func=_cmd_meta_eval)

    p_index = sub.add_parser("index", help="prebuild retrieval indexes")
    _add_dataset_flags(p_index)
    _add_provider_flags(p_index)
    p_index.add_argument("--retrievers", nargs="*", default=["bm25"])
    p_index.add_argument("--truncate", type=int, default=512)
    p_index.add_argument("--out-dir", default="kpeval_out")
    p_index.set_defaults(func=_cmd_index)

    p_diag = sub.add_parser("diag", help="embedding alignment/uniformity diagnostics")
    _add_provider_flags(p_diag)
    p_diag.add_argument("--pairs-file", help="JSONL of {phrase, variant} records")
    p_diag.add_argument("--phrases-file", help="one phrase per line, for uniformity")
    p_diag.add_argument("--n-pairs", type=int, default=50000)
    p_diag.add_argument("--seed", type=int, default=0)
    p_diag.set_defaults(func=_cmd_diag)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except KpEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
