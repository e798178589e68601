"""Pipeline orchestration, configuration, and report emission."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, diversity, quality, ref_metrics, retrieval, stats
from .corpus import Dataset, EvalInstance, dedupe_predictions, load_dataset
from .embeddings import FileEmbeddingProvider, HttpEmbeddingProvider
from .errors import (
    ConfigError,
    EmptyReport,
    LengthMismatch,
    ParseError,
    UnmatchedIds,
)
from .quality import HttpScoreProvider, StubScoreProvider

logger = logging.getLogger("kpeval")

DIMENSIONS = (
    "naturalness",
    "faithfulness",
    "saliency",
    "coverage",
    "diversity",
    "utility",
)

_EMBEDDING_DIMENSIONS = {"saliency", "coverage", "diversity"}
_SCORED_DIMENSIONS = {"naturalness", "faithfulness"}

# reference-based per-document metrics available to the meta-eval harness
_META_METRICS = (
    "exact_p", "exact_r", "exact_f1",
    "substring_p", "substring_r", "substring_f1",
    "r_precision",
    "rouge_l_p", "rouge_l_r", "rouge_l_f1",
    "sem_p", "sem_r", "sem_f1", "sem_cov",
)

# report table layout: (header, metric key); RR/Spare keys depend on config
_TABLE_COLUMNS = (
    ("#KP", "num_kp"),
    ("SemP", "sem_p"),
    ("SemR", "sem_r"),
    ("SemF1", "sem_f1"),
    ("SemCov", "sem_cov"),
    ("Nat.", "naturalness"),
    ("Faith.", "faithfulness"),
    ("dup", "dup_token_ratio"),
    ("emb_sim", "emb_sim"),
)


@dataclass(frozen=True)
class EvalConfig:
    instances_path: str
    corpus_path: str | None = None
    dimensions: tuple[str, ...] = DIMENSIONS
    baselines: bool = False
    alpha: float = 0.0
    k: int = 5
    base: int = 5
    truncate: int = 512
    retrievers: tuple[str, ...] = ("bm25", "dense")
    embeddings_file: str | None = None
    sidecar_url: str | None = None
    scorer: str | None = None  # "stub" or "http"
    rerank: bool = False
    dedupe: bool = False
    seed: int = 0
    workers: int = 1
    out_dir: str = "kpeval_out"


@dataclass(frozen=True)
class MetaEvalConfig:
    instances_path: str
    human_path: str
    pairs: tuple[tuple[str, str], ...]  # (metric key, human dimension)
    corpus_path: str | None = None
    system_id: str | None = None
    alpha: float = 0.0
    stat: str = "kendall"
    n_resamples: int = 1000
    level: float = 0.95
    seed: int = 0
    embeddings_file: str | None = None
    sidecar_url: str | None = None
    out_dir: str = "kpeval_out"


@dataclass
class DimensionReport:
    per_document: dict[str, dict[str, float]]
    aggregate: dict[str, float]
    metadata: dict
    skips: list[dict] = field(default_factory=list)


def config_hash(config) -> str:
    """Hash of the parameters that determine the numbers.

    Output location and worker count are excluded: they cannot change any
    reported value.
    """
    payload = dataclasses.asdict(config)
    payload.pop("out_dir", None)
    payload.pop("workers", None)
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()


def build_embedding_provider(embeddings_file, sidecar_url):
    if embeddings_file:
        return FileEmbeddingProvider(embeddings_file)
    if sidecar_url:
        return HttpEmbeddingProvider(sidecar_url)
    return None


def _build_score_provider(scorer, sidecar_url):
    if scorer == "stub":
        return StubScoreProvider()
    if scorer == "http":
        if not sidecar_url:
            raise ConfigError("scorer 'http' needs a sidecar url")
        return HttpScoreProvider(sidecar_url)
    if scorer is None:
        return None
    raise ConfigError(f"unknown scorer {scorer!r}")


def validate_config(config: EvalConfig):
    """Fail fast on impossible dimension/provider combinations."""
    unknown = set(config.dimensions) - set(DIMENSIONS)
    if unknown:
        raise ConfigError(f"unknown dimensions: {sorted(unknown)}")
    bad_retrievers = set(config.retrievers) - {"bm25", "dense"}
    if bad_retrievers:
        raise ConfigError(f"unknown retrievers: {sorted(bad_retrievers)}")
    if "utility" in config.dimensions and not config.retrievers:
        raise ConfigError("utility requested with no retrievers")
    if config.k < 1 or config.base < 1:
        raise ConfigError("k and base must be >= 1")
    if config.rerank and not config.sidecar_url:
        raise ConfigError("rerank retriever needs a sidecar url")

    embedder = build_embedding_provider(config.embeddings_file, config.sidecar_url)
    scorer = _build_score_provider(config.scorer, config.sidecar_url)

    needs_embeddings = sorted(_EMBEDDING_DIMENSIONS & set(config.dimensions))
    if "utility" in config.dimensions and "dense" in config.retrievers:
        needs_embeddings.append("utility(dense)")
    if needs_embeddings and embedder is None:
        raise ConfigError(
            f"dimensions {needs_embeddings} need an embedding provider; "
            "configure an embeddings file or a sidecar url"
        )
    needs_scorer = sorted(_SCORED_DIMENSIONS & set(config.dimensions))
    if needs_scorer and scorer is None:
        raise ConfigError(
            f"dimensions {needs_scorer} need a score provider; "
            "configure the stub scorer or a sidecar url"
        )
    return embedder, scorer


def _build_indexes(config: EvalConfig, dataset: Dataset, embedder):
    docs = list(dataset.corpus_docs)
    indexes = []
    for kind in config.retrievers:
        indexes.append(
            retrieval.build_index(
                docs, kind, provider=embedder, truncate=config.truncate
            )
        )
    if config.rerank:
        dense = next((ix for ix in indexes if ix.kind == "dense"), None)
        if dense is None:
            dense = retrieval.build_index(
                docs, "dense", provider=embedder, truncate=config.truncate
            )
        indexes.append(
            retrieval.RerankRetriever(dense, docs, config.sidecar_url)
        )
    return indexes


def _evaluate_instance(inst: EvalInstance, config: EvalConfig, embedder, scorer,
                       indexes) -> tuple[dict[str, float], list[dict]]:
    dims = set(config.dimensions)
    metrics: dict[str, float] = {"num_kp": float(len(inst.predictions))}
    skips: list[dict] = []

    def skip(metric: str, reason: str):
        skips.append({"id": inst.id, "metric": metric, "reason": reason})

    if config.baselines:
        if inst.references:
            exact = ref_metrics.exact_match_prf(inst.predictions, inst.references)
            sub = ref_metrics.substring_match_prf(inst.predictions, inst.references)
            rouge = ref_metrics.rouge_l_prf(inst.predictions, inst.references)
            metrics.update(
                exact_p=exact.precision, exact_r=exact.recall, exact_f1=exact.f1,
                substring_p=sub.precision, substring_r=sub.recall,
                substring_f1=sub.f1,
                r_precision=ref_metrics.r_precision(inst.predictions, inst.references),
                rouge_l_p=rouge.precision, rouge_l_r=rouge.recall,
                rouge_l_f1=rouge.f1,
            )
        else:
            skip("baselines", "empty_references")

    if dims & {"saliency", "coverage"}:
        if inst.references:
            prf = ref_metrics.sem_prf(
                inst.predictions, inst.references, embedder, alpha=config.alpha
            )
            metrics.update(sem_p=prf.precision, sem_r=prf.recall, sem_f1=prf.f1)
            if not inst.predictions:
                skip("sem", "empty_predictions_zeroed")
        else:
            skip("sem", "empty_references")

    if "coverage" in dims:
        if inst.references and inst.predictions:
            metrics["sem_cov"] = ref_metrics.sem_cov(
                inst.predictions, inst.references, embedder
            )
        else:
            skip("sem_cov",
                 "empty_references" if not inst.references else "empty_predictions")

    for dim in ("naturalness", "faithfulness"):
        if dim in dims:
            if inst.predictions:
                metrics[dim] = quality.score_dimension(
                    inst, dim, scorer, truncate=config.truncate
                )
            else:
                skip(dim, "empty_predictions")

    if "diversity" in dims:
        metrics["dup_token_ratio"] = diversity.dup_token_ratio(inst.predictions)
        metrics["emb_sim"] = diversity.emb_sim(inst.predictions, embedder)
        total_stems = sum(len(p.stems) for p in inst.predictions)
        if len(inst.predictions) < 2 or total_stems <= 1:
            skip("diversity", "degenerate_diversity_zeroed")

    if "utility" in dims:
        if inst.predictions:
            metrics[f"rr@{config.k}"] = retrieval.rr_at_k(inst, indexes, config.k)
            metrics[f"spare_{config.base}@{config.k}"] = retrieval.spare(
                inst, indexes, config.k, base=config.base
            )
        else:
            skip("utility", "empty_predictions")

    return metrics, skips


def run_eval(config: EvalConfig) -> DimensionReport:
    """Evaluate every requested dimension per document and aggregate."""
    embedder, scorer = validate_config(config)
    dataset = load_dataset(config.instances_path, config.corpus_path)

    instances = list(dataset.instances)
    if config.dedupe:
        instances = [
            dataclasses.replace(
                inst, predictions=tuple(dedupe_predictions(list(inst.predictions)))
            )
            for inst in instances
        ]

    indexes = []
    if "utility" in config.dimensions:
        indexes = _build_indexes(config, dataset, embedder)

    def worker(inst: EvalInstance):
        return inst.id, _evaluate_instance(inst, config, embedder, scorer, indexes)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(worker, instances))
    else:
        results = [worker(inst) for inst in instances]

    per_document: dict[str, dict[str, float]] = {}
    skips: list[dict] = []
    for doc_id, (metrics, doc_skips) in sorted(results, key=lambda r: r[0]):
        per_document[doc_id] = metrics
        skips.extend(doc_skips)
    for entry in skips:
        logger.info("skip %(id)s %(metric)s: %(reason)s", entry)

    aggregate: dict[str, float] = {}
    keys = sorted({key for metrics in per_document.values() for key in metrics})
    for key in keys:
        values = [m[key] for m in per_document.values() if key in m]
        aggregate[key] = sum(values) / len(values)

    metadata = {
        "config": dataclasses.asdict(config),
        "config_hash": config_hash(config),
        "version": __version__,
        "providers": {
            "embeddings": embedder.identity if embedder else None,
            "scorer": scorer.identity if scorer else None,
        },
        "n_documents": len(per_document),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    return DimensionReport(
        per_document=per_document,
        aggregate=aggregate,
        metadata=metadata,
        skips=skips,
    )


def emit_report(report: DimensionReport, out_dir: str | Path,
                formats: tuple[str, ...] = ("machine", "table")) -> list[Path]:
    """Write the report body files; returns the written paths.

    The machine file header repeats only reproducible metadata (config hash,
    version, providers) so identical configurations yield identical bytes.
    """
    if not report.per_document:
        raise EmptyReport("report has no per-document rows")
    unknown = set(formats) - {"machine", "table"}
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if "machine" in formats:
        path = out_dir / "report.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            meta = {
                "record": "meta",
                "config_hash": report.metadata["config_hash"],
                "version": report.metadata["version"],
                "providers": report.metadata["providers"],
            }
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            for doc_id in sorted(report.per_document):
                record = {
                    "record": "document",
                    "id": doc_id,
                    "metrics": report.per_document[doc_id],
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            aggregate = {
                "record": "aggregate",
                "n_documents": len(report.per_document),
                "metrics": report.aggregate,
            }
            fh.write(json.dumps(aggregate, sort_keys=True) + "\n")
        written.append(path)

    if "table" in formats:
        path = out_dir / "report.txt"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_render_table(report))
        written.append(path)

    return written


def _table_columns(report: DimensionReport) -> list[tuple[str, str]]:
    columns = list(_TABLE_COLUMNS)
    config = report.metadata.get("config", {})
    k = config.get("k", 5)
    base = config.get("base", 5)
    columns.append((f"RR@{k}", f"rr@{k}"))
    columns.append((f"Spare_{base}@{k}", f"spare_{base}@{k}"))
    return columns


def _render_table(report: DimensionReport) -> str:
    columns = _table_columns(report)
    headers = ["doc"] + [header for header, _ in columns]
    rows = []
    for doc_id in sorted(report.per_document):
        metrics = report.per_document[doc_id]
        rows.append([doc_id] + [_fmt(metrics.get(key), key) for _, key in columns])
    rows.append(
        ["ALL"] + [_fmt(report.aggregate.get(key), key) for _, key in columns]
    )
    widths = [
        max(len(str(cell)) for cell in [headers[i]] + [row[i] for row in rows])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(str(c).ljust(widths[i]) for i, c in enumerate(row)))
    return "\n".join(lines) + "\n"


def _fmt(value, key: str) -> str:
    if value is None:
        return "-"
    if key == "num_kp":
        return f"{value:.1f}"
    return f"{value:.3f}"


def write_metadata(report: DimensionReport, out_dir: str | Path) -> Path:
    """Runtime metadata (timestamp, skips) kept outside the report body."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_meta.json"
    payload = dict(report.metadata)
    payload["skips"] = report.skips
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_human_judgments(path: str, dataset_ids: set[str],
                          system_id: str | None):
    judgments: dict[tuple[str, str], float] = {}
    orphans = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{line_no}: invalid JSON ({exc})") from exc
            for fieldname in ("input_id", "dimension", "value"):
                if fieldname not in record:
                    raise ParseError(f"{path}:{line_no}: missing field {fieldname!r}")
            if system_id is not None and record.get("system_id") != system_id:
                continue
            input_id = str(record["input_id"])
            if input_id not in dataset_ids:
                orphans.add(input_id)
                continue
            key = (input_id, str(record["dimension"]))
            if key in judgments:
                raise ParseError(
                    f"{path}:{line_no}: duplicate judgment for {key} "
                    "(use system_id to disambiguate)"
                )
            try:
                judgments[key] = float(record["value"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{line_no}: bad value ({exc})") from exc
    if orphans:
        raise UnmatchedIds(f"human ids not in dataset: {sorted(orphans)}")
    return judgments


def _metric_values(dataset: Dataset, metric_keys: set[str], embedder,
                   alpha: float) -> dict[str, dict[str, float]]:
    semantic = {"sem_p", "sem_r", "sem_f1", "sem_cov"} & metric_keys
    values: dict[str, dict[str, float]] = {}
    for inst in dataset.instances:
        if not inst.references:
            continue
        row: dict[str, float] = {}
        exact = ref_metrics.exact_match_prf(inst.predictions, inst.references)
        sub = ref_metrics.substring_match_prf(inst.predictions, inst.references)
        rouge = ref_metrics.rouge_l_prf(inst.predictions, inst.references)
        row.update(
            exact_p=exact.precision, exact_r=exact.recall, exact_f1=exact.f1,
            substring_p=sub.precision, substring_r=sub.recall, substring_f1=sub.f1,
            r_precision=ref_metrics.r_precision(inst.predictions, inst.references),
            rouge_l_p=rouge.precision, rouge_l_r=rouge.recall, rouge_l_f1=rouge.f1,
        )
        if semantic:
            prf = ref_metrics.sem_prf(inst.predictions, inst.references, embedder,
                                      alpha=alpha)
            row.update(sem_p=prf.precision, sem_r=prf.recall, sem_f1=prf.f1)
            if inst.predictions:
                row["sem_cov"] = ref_metrics.sem_cov(
                    inst.predictions, inst.references, embedder
                )
        values[inst.id] = row
    return values


def run_meta_eval(config: MetaEvalConfig) -> list[stats.CorrelationResult]:
    """Correlate per-document metric values against human judgments."""
    if not config.pairs:
        raise ConfigError("meta-eval needs at least one (metric, dimension) pair")
    metric_keys = {metric for metric, _ in config.pairs}
    unknown = metric_keys - set(_META_METRICS)
    if unknown:
        raise ConfigError(f"unknown meta-eval metrics: {sorted(unknown)}")
    embedder = build_embedding_provider(config.embeddings_file, config.sidecar_url)
    if {"sem_p", "sem_r", "sem_f1", "sem_cov"} & metric_keys and embedder is None:
        raise ConfigError("semantic meta-eval metrics need an embedding provider")

    dataset = load_dataset(config.instances_path, config.corpus_path)
    dataset_ids = {inst.id for inst in dataset.instances}
    judgments = _load_human_judgments(config.human_path, dataset_ids,
                                      config.system_id)
    metric_values = _metric_values(dataset, metric_keys, embedder, config.alpha)

    results = []
    for metric, dimension in config.pairs:
        items = []
        for doc_id in sorted(metric_values):
            key = (doc_id, dimension)
            if key in judgments and metric in metric_values[doc_id]:
                items.append((doc_id, metric_values[doc_id][metric], judgments[key]))
        if len(items) < 2:
            raise LengthMismatch(
                f"pair ({metric}, {dimension}) has {len(items)} matched documents"
            )
        paired = stats.PairedScores(items=tuple(items))
        result = stats.bootstrap_ci(
            paired,
            stat=config.stat,
            n_resamples=config.n_resamples,
            level=config.level,
            seed=config.seed,
        )
        results.append(
            dataclasses.replace(result, metric=metric, dimension=dimension)
        )
    return results


def emit_meta_report(results, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "meta_report.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(dataclasses.asdict(result), sort_keys=True) + "\n")
    return path
